"""Bell-experiment statistics, the CHSH functional, and the two-qubit
singular-value criterion.

For a two-qubit state the maximal CHSH value over all projective settings is
2*sqrt(mu1^2 + mu2^2), where mu1 >= mu2 are the two largest singular values
of the 3x3 Pauli correlation matrix; the state violates CHSH iff
mu1^2 + mu2^2 > 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .numerics import DEFAULT_POLICY, NumericPolicy
from .qcore import I2, PAULIS, as_matrix


@dataclass(frozen=True)
class Measurement:
    """Two binary projective observables per party, as unit Bloch vectors."""

    alice: tuple  # (a0, a1), each a length-3 unit vector
    bob: tuple

    def __post_init__(self):
        alice = tuple(np.asarray(v, dtype=float) for v in self.alice)
        bob = tuple(np.asarray(v, dtype=float) for v in self.bob)
        for v in alice + bob:
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise ValueError("Bloch vectors must be unit length")
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)


def bloch_observable(n: np.ndarray) -> np.ndarray:
    return n[0] * PAULIS[0] + n[1] * PAULIS[1] + n[2] * PAULIS[2]


def bloch_projectors(n: np.ndarray):
    """Projectors for outcomes 0 (+1 eigenvalue) and 1 (-1)."""
    obs = bloch_observable(n)
    return (I2 + obs) / 2.0, (I2 - obs) / 2.0


class Behavior:
    """P(a,b|x,y) as a (2,2,2,2) table indexed [a, b, x, y].

    Validates normalization per setting pair and no-signaling (a violation of
    either signals a construction bug upstream, not physics).
    """

    __slots__ = ("table",)

    def __init__(self, table, policy: NumericPolicy = DEFAULT_POLICY):
        t = np.array(table, dtype=float)
        if t.shape != (2, 2, 2, 2):
            raise ValueError(f"behavior table must be (2,2,2,2), got {t.shape}")
        if t.min() < -1e-12:
            raise ValueError(f"negative probability {t.min():.3e}")
        norms = t.sum(axis=(0, 1))
        if np.abs(norms - 1.0).max() > 1e-10:
            raise ValueError("probabilities do not sum to 1 per setting pair")
        # marginal of a must not depend on y, and of b not on x
        pa = t.sum(axis=1)  # [a, x, y]
        pb = t.sum(axis=0)  # [b, x, y]
        if np.abs(pa[:, :, 0] - pa[:, :, 1]).max() > 1e-9:
            raise ValueError("signaling from Bob's setting to Alice's marginal")
        if np.abs(pb[:, 0, :] - pb[:, 1, :]).max() > 1e-9:
            raise ValueError("signaling from Alice's setting to Bob's marginal")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __setattr__(self, name, value):
        raise AttributeError("Behavior is immutable")


@dataclass(frozen=True)
class Relabeling:
    """One element of the 64-element local relabeling group.

    swap_a / swap_b exchange the two settings of that party; flip_a[x] and
    flip_b[y] flip the outcome when the (already relabeled) setting is x / y.
    """

    swap_a: bool = False
    swap_b: bool = False
    flip_a: tuple = (0, 0)
    flip_b: tuple = (0, 0)

    def apply(self, p: Behavior) -> Behavior:
        t = p.table
        q = np.empty_like(t)
        for a, b, x, y in itertools.product(range(2), repeat=4):
            q[a, b, x, y] = t[
                a ^ self.flip_a[x],
                b ^ self.flip_b[y],
                x ^ int(self.swap_a),
                y ^ int(self.swap_b),
            ]
        return Behavior(q)

    def as_dict(self) -> dict:
        return {
            "swap_a": self.swap_a,
            "swap_b": self.swap_b,
            "flip_a": list(self.flip_a),
            "flip_b": list(self.flip_b),
        }


def relabeling_group():
    flips = [(0, 0), (0, 1), (1, 0), (1, 1)]
    return [
        Relabeling(sa, sb, fa, fb)
        for sa in (False, True)
        for sb in (False, True)
        for fa in flips
        for fb in flips
    ]


_GROUP = relabeling_group()


def behavior_from_state(rho, m: Measurement) -> Behavior:
    """Born-rule behavior of a two-qubit state under the given settings."""
    mat = as_matrix(rho)
    if mat.shape != (4, 4):
        raise ValueError("behavior_from_state needs a two-qubit state")
    pa = [bloch_projectors(n) for n in m.alice]
    pb = [bloch_projectors(n) for n in m.bob]
    t = np.empty((2, 2, 2, 2))
    for a, b, x, y in itertools.product(range(2), repeat=4):
        t[a, b, x, y] = np.trace(mat @ np.kron(pa[x][a], pb[y][b])).real
    return Behavior(t)


def correlators(p: Behavior) -> np.ndarray:
    """C_xy = P(a=b|x,y) - P(a!=b|x,y), as a 2x2 array indexed [x, y]."""
    t = p.table
    return t[0, 0] + t[1, 1] - t[0, 1] - t[1, 0]


def _chsh_functional(c: np.ndarray) -> float:
    return float(c[0, 0] + c[0, 1] + c[1, 0] - c[1, 1])


def chsh_value(p: Behavior):
    """Max of C00+C01+C10-C11 over the local relabeling group.

    Returns (value, relabeling achieving it).  The behavior admits a local
    hidden variable model iff the value is at most 2 (up to rounding).
    """
    best, best_r = -np.inf, _GROUP[0]
    for r in _GROUP:
        s = _chsh_functional(correlators(r.apply(p)))
        if s > best + 1e-15:
            best, best_r = s, r
    return best, best_r


def correlation_matrix(rho) -> np.ndarray:
    """R_ij = tr[rho sigma_i (x) sigma_j], i,j in {x,y,z}."""
    mat = as_matrix(rho)
    if mat.shape != (4, 4):
        raise ValueError("correlation_matrix needs a two-qubit state")
    r = np.empty((3, 3))
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            r[i, j] = np.trace(mat @ np.kron(si, sj)).real
    return r


@dataclass(frozen=True)
class HorodeckiResult:
    mu1: float
    mu2: float
    chsh_max: float
    violating: bool

    def as_dict(self) -> dict:
        return {
            "mu1": self.mu1,
            "mu2": self.mu2,
            "chsh_max": self.chsh_max,
            "violating": self.violating,
        }


def horodecki(rho, policy: NumericPolicy = DEFAULT_POLICY) -> HorodeckiResult:
    """Singular-value CHSH criterion for a two-qubit state."""
    s = np.linalg.svd(correlation_matrix(rho), compute_uv=False)
    mu1, mu2 = float(s[0]), float(s[1])
    chsh_max = 2.0 * math.hypot(mu1, mu2)
    return HorodeckiResult(mu1, mu2, chsh_max, mu1 * mu1 + mu2 * mu2 > 1.0 + policy.eps_cert)


def _canonical_svd(r: np.ndarray):
    """SVD with singular-vector signs pinned for deterministic output.

    Each left vector is flipped so its first entry above 1e-9 in magnitude is
    positive; the matching right vector is flipped with it.
    """
    u, s, vt = np.linalg.svd(r)
    u, vt = u.copy(), vt.copy()
    for k in range(3):
        col = np.round(u[:, k], 9)
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0:
            u[:, k] = -u[:, k]
            vt[k, :] = -vt[k, :]
    return u, s, vt


def optimal_measurements(rho) -> Measurement:
    """Settings achieving the two-qubit maximum 2*sqrt(mu1^2+mu2^2)."""
    u, s, vt = _canonical_svd(correlation_matrix(rho))
    mu1, mu2 = s[0], s[1]
    a0, a1 = u[:, 0], u[:, 1]
    v1, v2 = vt[0, :], vt[1, :]
    phi = math.pi / 4.0 if mu1 + mu2 < 1e-12 else math.atan2(mu2, mu1)
    b0 = math.cos(phi) * v1 + math.sin(phi) * v2
    b1 = math.cos(phi) * v1 - math.sin(phi) * v2
    return Measurement((a0, a1), (b0 / np.linalg.norm(b0), b1 / np.linalg.norm(b1)))


def su2_from_rotation(o: np.ndarray) -> np.ndarray:
    """SU(2) element U with U (n.sigma) U^dag = ((O n).sigma)."""
    x, y, z, w = Rotation.from_matrix(np.asarray(o, dtype=float)).as_quat()
    return w * I2 - 1j * (x * PAULIS[0] + y * PAULIS[1] + z * PAULIS[2])


def local_diagonalizers(rho):
    """Unitaries (U, V) rotating a two-qubit state's correlation matrix so
    that R_xx = mu1 and R_zz = mu2, plus (mu1, mu2).

    Degenerate singular values are broken deterministically by the canonical
    SVD sign convention.
    """
    u, s, vt = _canonical_svd(correlation_matrix(rho))
    mu1, mu2 = float(s[0]), float(s[1])

    def rotation(rows):
        rx, rz = rows
        ry = np.cross(rz, rx)  # right-handed completion, det +1
        return np.array([rx, ry, rz])

    oa = rotation((u[:, 0], u[:, 1]))
    ob = rotation((vt[0, :], vt[1, :]))
    return su2_from_rotation(oa), su2_from_rotation(ob), mu1, mu2
