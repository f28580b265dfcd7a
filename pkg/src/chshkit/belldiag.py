"""Verification suite for the Bell-diagonal cone machinery.

Separable maps taking Bell-diagonal states to Bell-diagonal states are
summarized by a 4x4 nonnegative trace table M; every such M decomposes as
p*D + q*G with D doubly stochastic, G in the polytope spanned by row/column
permutations of a fixed rank-one ones-block, and p, q >= 0.  This module
verifies that decomposition on constructed instances, sweeps the witness
spectrum vector N_theta for its extremal first component, brute-forces the
doubly-stochastic fixed points of N_{pi/4}, and certifies separability of
the unnormalized two-qubit operator Psi = Pi_2 + Pi_3.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .numerics import DEFAULT_POLICY
from .qcore import (
    I2,
    SX,
    SY,
    SZ,
    Dims,
    KrausMap,
    apply_kraus,
    as_matrix,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
    party_tensor,
)
from .states import bell_projectors, random_pure_product

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class NVector:
    """Spectrum of H_theta in the fixed Bell ordering (no sorting)."""

    theta: float
    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float)
        if c.shape != (4,):
            raise ValueError("need exactly four components")
        c.setflags(write=False)
        object.__setattr__(self, "components", c)


def n_vector(theta: float) -> NVector:
    c, s = math.cos(theta), math.sin(theta)
    return NVector(theta, np.array([1 - c - s, 1 + c - s, 1 - c + s, 1 + c + s]))


def n_components(thetas: np.ndarray) -> np.ndarray:
    """Vectorized N_theta, shape (4, len(thetas))."""
    c, s = np.cos(thetas), np.sin(thetas)
    return np.stack([1 - c - s, 1 + c - s, 1 - c + s, 1 + c + s])


def permutation_matrices():
    """All 24 4x4 permutation matrices P with (P v)_i = v_perm(i)."""
    out = []
    for perm in itertools.permutations(range(4)):
        p = np.zeros((4, 4))
        for i, j in enumerate(perm):
            p[i, j] = 1.0
        out.append(p)
    return out


G0 = np.array(
    [
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ]
)


def g_vertices():
    """The 36 distinct row/column permutations of the ones-block G0."""
    out = []
    for rows in itertools.combinations(range(4), 2):
        for cols in itertools.combinations(range(4), 2):
            g = np.zeros((4, 4))
            for r in rows:
                for c in cols:
                    g[r, c] = 1.0
            out.append(g)
    return out


@dataclass(frozen=True)
class MMatrix:
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (4, 4):
            raise ValueError("M must be 4x4")
        if e.min() < -DEFAULT_POLICY.eps_psd:
            raise ValueError(f"negative entry {e.min():.3e}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)


FEASIBLE = "FEASIBLE"
INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class PolytopeDecomposition:
    status: str
    p: float
    q: float
    perm_weights: np.ndarray  # over the 24 permutation vertices
    g_weights: np.ndarray  # over the 36 G vertices
    residual: float

    def reconstruction(self) -> np.ndarray:
        perms = permutation_matrices()
        gs = g_vertices()
        m = np.zeros((4, 4))
        for wgt, vtx in zip(self.perm_weights, perms):
            m += wgt * vtx
        for wgt, vtx in zip(self.g_weights, gs):
            m += wgt * vtx
        return m


def decompose_pDqG(m, residual_tol: float = 1e-8) -> PolytopeDecomposition:
    """Nonnegative least squares of M against the 24 + 36 vertex matrices."""
    entries = m.entries if isinstance(m, MMatrix) else np.asarray(m, dtype=float)
    verts = permutation_matrices() + g_vertices()
    a = np.stack([v.ravel() for v in verts], axis=1)
    wgt, res = nnls(a, entries.ravel())
    status = FEASIBLE if res < residual_tol else INFEASIBLE
    return PolytopeDecomposition(
        status=status,
        p=float(wgt[:24].sum()),
        q=float(wgt[24:].sum()),
        perm_weights=wgt[:24],
        g_weights=wgt[24:],
        residual=float(res),
    )


# ---------------------------------------------------------------------------
# omega / M construction for separable maps with the bracket signature
# [C^2] (x) [C^2]  ->  [H_A' (x) C^2] (x) [H_B' (x) C^2]
# ---------------------------------------------------------------------------


def omega_matrices(kmap: KrausMap):
    """The sixteen operators tr_{A''B''}[(I (x) Pi_i) Omega(Pi_j)].

    Output is a dict keyed by (i, j) with 1-based Bell indices; each entry is
    an operator on H_A' (x) H_B' and is positive semi-definite for any
    separable map.
    """
    if kmap.in_dims != Dims.simple(2, 2):
        raise ValueError("map input must be a two-qubit space")
    if kmap.out_dims.a_factors[-1:] != (2,) or kmap.out_dims.b_factors[-1:] != (2,):
        raise ValueError("map output parties must end in a C^2 factor")
    if len(kmap.out_dims.a_factors) != 2 or len(kmap.out_dims.b_factors) != 2:
        raise ValueError("map output parties must be (primed factor, C^2)")
    da = kmap.out_dims.a_factors[0]
    db = kmap.out_dims.b_factors[0]
    prime_dims = Dims.simple(da, db)
    projs = bell_projectors()
    eye_prime = np.eye(da * db, dtype=complex)
    out = {}
    for j, pj in enumerate(projs, start=1):
        omega_j = apply_kraus(kmap, pj.matrix)
        for i, pi in enumerate(projs, start=1):
            emb, _ = party_tensor(eye_prime, prime_dims, pi.matrix, Dims.simple(2, 2))
            prod = emb @ omega_j
            out[(i, j)] = partial_trace(prod, kmap.out_dims.factors, trace_out=(1, 3))
    return out


def m_matrix(omegas: dict) -> MMatrix:
    m = np.empty((4, 4))
    for (i, j), op in omegas.items():
        m[i - 1, j - 1] = float(np.trace(op).real)
    return MMatrix(m)


# -- constructed separable-map corpus ---------------------------------------

_PAIR_PRODUCT_BASES = {
    # Bell index pair -> the two product vectors whose equal mixture is
    # (Pi_i + Pi_j) / 2
    (1, 2): (np.array([1, 0]), np.array([1, 0]), np.array([0, 1]), np.array([0, 1])),
    (3, 4): (np.array([1, 0]), np.array([0, 1]), np.array([0, 1]), np.array([1, 0])),
    (1, 3): (
        np.array([1, 1]) / SQRT2,
        np.array([1, 1]) / SQRT2,
        np.array([1, -1]) / SQRT2,
        np.array([1, -1]) / SQRT2,
    ),
    (2, 4): (
        np.array([1, 1]) / SQRT2,
        np.array([1, -1]) / SQRT2,
        np.array([1, -1]) / SQRT2,
        np.array([1, 1]) / SQRT2,
    ),
    (2, 3): (
        np.array([1, 1j]) / SQRT2,
        np.array([1, 1j]) / SQRT2,
        np.array([1, -1j]) / SQRT2,
        np.array([1, -1j]) / SQRT2,
    ),
    (1, 4): (
        np.array([1, 1j]) / SQRT2,
        np.array([1, -1j]) / SQRT2,
        np.array([1, -1j]) / SQRT2,
        np.array([1, 1j]) / SQRT2,
    ),
}


def separable_bell_weight_split(weights) -> list:
    """Express Bell weights with max component <= 1/2 as a mixture of the six
    half-half pair vertices; returns [(pair, coefficient), ...]."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or w.min() < -1e-12 or abs(w.sum() - 1.0) > 1e-10:
        raise ValueError("weights must be a probability vector of length 4")
    if w.max() > 0.5 + 1e-12:
        raise ValueError(
            "Bell weights with a component above 1/2 give an entangled "
            "target, unreachable by a separable preparation"
        )
    pairs = sorted(_PAIR_PRODUCT_BASES)
    cols = np.zeros((4, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        cols[i - 1, k] = 0.5
        cols[j - 1, k] = 0.5
    coef, res = nnls(cols, w)
    if res > 1e-10:
        raise ValueError("weights outside the separable Bell-diagonal polytope")
    return [(pairs[k], float(coef[k])) for k in range(len(pairs)) if coef[k] > 1e-14]


def prepare_map(weights) -> KrausMap:
    """Discard the input, output the separable Bell-diagonal state with the
    given weights (trivial primed factors)."""
    a_ops, b_ops = [], []
    for (pair, coef) in separable_bell_weight_split(weights):
        va1, vb1, va2, vb2 = _PAIR_PRODUCT_BASES[pair]
        for va, vb in ((va1, vb1), (va2, vb2)):
            for k in range(2):
                for l in range(2):
                    a = math.sqrt(coef / 2.0) * np.outer(va, np.eye(2)[k]).astype(complex)
                    b = np.outer(vb, np.eye(2)[l]).astype(complex)
                    a_ops.append(a)
                    b_ops.append(b)
    return KrausMap(tuple(a_ops), tuple(b_ops), Dims.simple(2, 2), Dims((1, 2), (1, 2)))


def local_unitary_map(u: np.ndarray, v: np.ndarray) -> KrausMap:
    """Conjugation by u (x) v with trivial primed factors."""
    return KrausMap(
        (np.asarray(u, dtype=complex),),
        (np.asarray(v, dtype=complex),),
        Dims.simple(2, 2),
        Dims((1, 2), (1, 2)),
    )


def pauli_channel(coeffs) -> KrausMap:
    """sum_{ab} c_ab (sigma_a (x) sigma_b) X (sigma_a (x) sigma_b), c >= 0."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (4, 4) or c.min() < 0:
        raise ValueError("need a nonnegative 4x4 coefficient table")
    paulis = (I2, SX, SY, SZ)
    a_ops, b_ops = [], []
    for i in range(4):
        for j in range(4):
            if c[i, j] > 0:
                a_ops.append(math.sqrt(c[i, j]) * paulis[i])
                b_ops.append(paulis[j].copy())
    return KrausMap(tuple(a_ops), tuple(b_ops), Dims.simple(2, 2), Dims((1, 2), (1, 2)))


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2


def m0_map(eta: float, prime_state=None) -> KrausMap:
    """Separable map realizing the doubly-stochastic fixed-point family:
    prepare a product state on the primed factors and apply the Bell-index
    (2 3) transposition with probability eta on the C^2 factors."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if prime_state is None:
        prime_state = (np.array([1.0, 0.0], dtype=complex), np.array([1.0, 0.0], dtype=complex))
    va, vb = prime_state
    a_ops, b_ops = [], []
    for wgt, gate in ((1.0 - eta, I2), (eta, HADAMARD)):
        if wgt > 0:
            a_ops.append(math.sqrt(wgt) * np.kron(va.reshape(-1, 1), gate))
            b_ops.append(np.kron(vb.reshape(-1, 1), gate))
    return KrausMap(
        tuple(a_ops), tuple(b_ops), Dims.simple(2, 2), Dims((len(va), 2), (len(vb), 2))
    )


def m0_matrix(eta: float) -> np.ndarray:
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0 - eta, eta, 0.0],
            [0.0, eta, 1.0 - eta, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IoChainReport:
    """Both levels of the projected witness inequality for one map family."""

    io_vector: np.ndarray  # N_{pi/4} - sum_x w_x M_x N_{theta_x}
    io_holds: bool
    uk_min_eigenvalues: np.ndarray  # per Bell index, operator-level
    uk_holds: bool
    trace_consistent: bool  # tr of the operator level reproduces io
    weight_sum_bound_holds: bool  # summed consequence of the io inequality

    def as_dict(self) -> dict:
        return {
            "io_vector": [float(v) for v in self.io_vector],
            "io_holds": self.io_holds,
            "uk_min_eigenvalues": [float(v) for v in self.uk_min_eigenvalues],
            "uk_holds": self.uk_holds,
            "trace_consistent": self.trace_consistent,
            "weight_sum_bound_holds": self.weight_sum_bound_holds,
        }


def verify_io_chain(mu, family, tol: float = 1e-9) -> IoChainReport:
    """Check the operator-level and trace-level inequalities independently.

    mu is a unit-trace PSD operator on the primed space; family is a list of
    (KrausMap, theta, weight) triples (a finite quadrature of the continuous
    family).  The trace of each operator-level component must reproduce the
    corresponding trace-level component.
    """
    mu_mat = as_matrix(mu)
    n_pi4 = n_vector(math.pi / 4.0).components
    op_terms = [mu_mat.T * n_pi4[i] for i in range(4)]
    io = n_pi4.copy()
    for kmap, theta, weight in family:
        omegas = omega_matrices(kmap)
        n_th = n_vector(theta).components
        m = m_matrix(omegas)
        io = io - weight * (m.entries @ n_th)
        for i in range(4):
            acc = sum(n_th[j - 1] * omegas[(i + 1, j)] for j in range(1, 5))
            op_terms[i] = op_terms[i] - weight * acc
    uk_eigs = np.array([min_eigenvalue(t) for t in op_terms])
    traces = np.array([float(np.trace(t).real) for t in op_terms])
    return IoChainReport(
        io_vector=io,
        io_holds=bool(io.min() >= -tol),
        uk_min_eigenvalues=uk_eigs,
        uk_holds=bool(uk_eigs.min() >= -tol),
        trace_consistent=bool(np.abs(traces - io).max() < 1e-10),
        weight_sum_bound_holds=bool(io.sum() >= -tol),
    )


@dataclass(frozen=True)
class ExtremalityReport:
    min_first_component: float
    argmin_theta: float
    unique_on_grid: bool
    second_smallest_gap: float
    g_product_min: float  # min over all G vertices and theta of (G N_theta)

    def as_dict(self) -> dict:
        return {
            "min_first_component": self.min_first_component,
            "argmin_theta": self.argmin_theta,
            "unique_on_grid": self.unique_on_grid,
            "second_smallest_gap": self.second_smallest_gap,
            "g_product_min": self.g_product_min,
        }


def conv_n_extremality(resolution: int = 10_000, perturb: float = 0.0) -> ExtremalityReport:
    """Sweep theta in [0, pi/4] and all component permutations of N_theta.

    The first component of any permuted N_theta is one of the four components,
    so the sweep minimum over permutations is the componentwise minimum.  The
    perturb knob exists only for fault-injection testing.
    """
    if resolution < 1000:
        raise ValueError("resolution must be at least 1000")
    thetas = np.linspace(0.0, math.pi / 4.0, resolution + 1)
    comps = n_components(thetas) + perturb
    flat = comps.ravel()
    order = np.argsort(flat)
    lo, second = flat[order[0]], flat[order[1]]
    k = int(np.argmin(comps.min(axis=0)))
    gs = np.stack(g_vertices())
    g_prod = np.einsum("gij,jt->git", gs, comps)
    return ExtremalityReport(
        min_first_component=float(lo),
        argmin_theta=float(thetas[k]),
        unique_on_grid=bool(second > lo),
        second_smallest_gap=float(second - lo),
        g_product_min=float(g_prod.min()),
    )


@dataclass(frozen=True)
class M0Report:
    eta: float
    fixed_point_error: float
    fixing_permutations: tuple  # permutations (as tuples) with P N = N

    def as_dict(self) -> dict:
        return {
            "eta": self.eta,
            "fixed_point_error": self.fixed_point_error,
            "fixing_permutations": [list(p) for p in self.fixing_permutations],
        }


def m0_family(eta: float) -> M0Report:
    """The fixed-point matrix family plus the brute-force vertex check."""
    n_pi4 = n_vector(math.pi / 4.0).components
    m0 = m0_matrix(eta)
    err = float(np.abs(m0 @ n_pi4 - n_pi4).max())
    fixing = []
    for perm in itertools.permutations(range(4)):
        permuted = n_pi4[list(perm)]
        if np.abs(permuted - n_pi4).max() < 1e-12:
            fixing.append(perm)
    return M0Report(eta=eta, fixed_point_error=err, fixing_permutations=tuple(fixing))


@dataclass(frozen=True)
class PsiReport:
    pt_min_eigenvalue: float
    ppt: bool
    decomposition_residual: float
    n_atoms_used: int

    def as_dict(self) -> dict:
        return {
            "pt_min_eigenvalue": self.pt_min_eigenvalue,
            "ppt": self.ppt,
            "decomposition_residual": self.decomposition_residual,
            "n_atoms_used": self.n_atoms_used,
        }


def psi_operator() -> np.ndarray:
    projs = bell_projectors()
    return projs[1].matrix + projs[2].matrix  # Pi_2 + Pi_3, trace 2


def _pauli_eigenbasis_products():
    """Product projectors from the sigma_x/y/z eigenbases (6 x 6 products)."""
    single = [
        np.array([1, 1]) / SQRT2,
        np.array([1, -1]) / SQRT2,
        np.array([1, 1j]) / SQRT2,
        np.array([1, -1j]) / SQRT2,
        np.array([1, 0]),
        np.array([0, 1]),
    ]
    out = []
    for a in single:
        for b in single:
            v = np.kron(a, b).astype(complex)
            out.append(np.outer(v, v.conj()))
    return out


def psi_separability(seed: int = 11, n_samples: int = 500) -> PsiReport:
    """PPT check for Psi = Pi_2 + Pi_3 plus an explicit separable
    decomposition by NNLS over product projectors.

    The atom pool mixes deterministic Pauli-eigenbasis products (a rank-two
    target needs atoms inside its support, which random sampling misses with
    probability one) with random product projectors.
    """
    psi = psi_operator()
    pt_min = min_eigenvalue(partial_transpose(psi, Dims.simple(2, 2)))
    atoms = _pauli_eigenbasis_products()
    rng = np.random.default_rng(seed)
    while len(atoms) < n_samples:
        a, b = random_pure_product(rng, 2, 2)
        v = np.kron(a, b)
        atoms.append(np.outer(v, v.conj()))
    stack = np.stack([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in atoms], axis=1)
    target = np.concatenate([psi.real.ravel(), psi.imag.ravel()])
    wgt, res = nnls(stack, target)
    return PsiReport(
        pt_min_eigenvalue=pt_min,
        ppt=pt_min >= -DEFAULT_POLICY.eps_psd,
        decomposition_residual=float(res),
        n_atoms_used=int((wgt > 1e-12).sum()),
    )


def bell_dephase(x) -> np.ndarray:
    """sum_i Pi_i X Pi_i; keeps exactly the Bell-diagonal part."""
    m = as_matrix(x)
    out = np.zeros_like(m)
    for p in bell_projectors():
        out += p.matrix @ m @ p.matrix
    return out


def bell_weights(x) -> np.ndarray:
    m = as_matrix(x)
    return np.array([float(np.trace(p.matrix @ m).real) for p in bell_projectors()])
