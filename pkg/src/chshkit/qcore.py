"""Dense complex operator algebra on small bipartite Hilbert spaces.

Index convention, fixed once for the whole library: the product basis is
row-major with Alice-major ordering, i.e. the basis vector |a>|b> sits at
row a * dimB + b.  Within one party, declared factors are ordered as listed
(so a party with factors (d, 2) indexes |f0>|f1> at f0 * 2 + f1).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .numerics import DEFAULT_POLICY, NumericPolicy

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


@dataclass(frozen=True)
class Dims:
    """Declared factorization of a bipartite space, one factor list per party."""

    a_factors: tuple
    b_factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "a_factors", tuple(int(d) for d in self.a_factors))
        object.__setattr__(self, "b_factors", tuple(int(d) for d in self.b_factors))
        if any(d < 1 for d in self.a_factors + self.b_factors):
            raise ValueError("factor dimensions must be positive")

    @classmethod
    def simple(cls, da: int, db: int) -> "Dims":
        return cls((da,), (db,))

    @property
    def da(self) -> int:
        return prod(self.a_factors)

    @property
    def db(self) -> int:
        return prod(self.b_factors)

    @property
    def d(self) -> int:
        return self.da * self.db

    @property
    def factors(self) -> tuple:
        return self.a_factors + self.b_factors

    def factor_index(self, party: str, k: int) -> int:
        """Global index (into .factors) of factor k of the given party."""
        if party == "a":
            return k if 0 <= k < len(self.a_factors) else self._bad(party, k)
        if party == "b":
            if 0 <= k < len(self.b_factors):
                return len(self.a_factors) + k
        return self._bad(party, k)

    def _bad(self, party, k):
        raise ValueError(f"no factor {k!r} for party {party!r} in {self}")


TWO_QUBITS = Dims.simple(2, 2)


def as_matrix(x) -> np.ndarray:
    """Accept a bare ndarray or any wrapper exposing .matrix."""
    return np.asarray(getattr(x, "matrix", x), dtype=complex)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


class HermitianOperator:
    """Hermitian matrix on a declared bipartite space.

    Construction symmetrizes the input and rejects matrices whose
    anti-Hermitian part is larger than the policy's rejection threshold.
    Instances are immutable values.
    """

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims: Dims, policy: NumericPolicy = DEFAULT_POLICY):
        m = np.array(as_matrix(matrix), dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("matrix has non-finite entries")
        if dims.d != m.shape[0]:
            raise ValueError(f"declared dims {dims} do not match matrix size {m.shape[0]}")
        skew = np.abs(m - m.conj().T).max()
        if skew > policy.herm_reject:
            raise ValueError(f"anti-Hermitian part {skew:.3e} exceeds {policy.herm_reject:.0e}")
        m = hermitize(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):  # immutability guard
        raise AttributeError("HermitianOperator is immutable")

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims}, trace={self.trace:.6g})"


class DensityOperator(HermitianOperator):
    """Positive semi-definite operator; unit trace unless flagged unnormalized."""

    __slots__ = ("normalized",)

    def __init__(self, matrix, dims: Dims, normalized: bool = True,
                 policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(matrix, dims, policy)
        lo = min_eigenvalue(self.matrix)
        if lo < -policy.eps_psd:
            raise ValueError(f"negative eigenvalue {lo:.3e}")
        if normalized and abs(self.trace - 1.0) > 1e-10:
            raise ValueError(f"trace {self.trace!r} is not 1")
        object.__setattr__(self, "normalized", bool(normalized))


@dataclass(frozen=True)
class KrausMap:
    """Separable map given by product Kraus pairs (A_i, B_i), per-party action.

    All A_i share one shape (out_da x in_da) and likewise the B_i; the map is
    X -> sum_i (A_i (x) B_i) X (A_i (x) B_i)^dag.  Trace may decrease or grow
    (stochastic operations, no normalization is enforced).
    """

    a_ops: tuple
    b_ops: tuple
    in_dims: Dims
    out_dims: Dims

    def __post_init__(self):
        a_ops = tuple(np.asarray(a, dtype=complex) for a in self.a_ops)
        b_ops = tuple(np.asarray(b, dtype=complex) for b in self.b_ops)
        if len(a_ops) != len(b_ops) or not a_ops:
            raise ValueError("need equally many (nonzero) A and B Kraus operators")
        sa = (self.out_dims.da, self.in_dims.da)
        sb = (self.out_dims.db, self.in_dims.db)
        if any(a.shape != sa for a in a_ops):
            raise ValueError(f"every A_i must have shape {sa}")
        if any(b.shape != sb for b in b_ops):
            raise ValueError(f"every B_i must have shape {sb}")
        object.__setattr__(self, "a_ops", a_ops)
        object.__setattr__(self, "b_ops", b_ops)

    def __len__(self):
        return len(self.a_ops)


def tensor(x, y) -> np.ndarray:
    """Kronecker product in the library's Alice-major convention."""
    return np.kron(as_matrix(x), as_matrix(y))


def party_tensor(x, dims_x: Dims, y, dims_y: Dims):
    """Tensor two bipartite operators party-wise.

    The result lives on a_factors = x.a + y.a and b_factors = x.b + y.b, with
    the row index permuted from the plain Kronecker ordering accordingly.
    Returns (matrix, dims).
    """
    xm, ym = as_matrix(x), as_matrix(y)
    k = np.kron(xm, ym)
    shape = (dims_x.da, dims_x.db, dims_y.da, dims_y.db)
    t = k.reshape(shape + shape)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    dims = Dims(dims_x.a_factors + dims_y.a_factors, dims_x.b_factors + dims_y.b_factors)
    return np.ascontiguousarray(t.reshape(dims.d, dims.d)), dims


def partial_trace(x, factors, trace_out) -> np.ndarray:
    """Trace out the listed factor positions of a declared factorization.

    factors is the full factor tuple (Alice factors then Bob factors);
    trace_out is a collection of indices into it.  The trace of the result
    equals the trace of the input.
    """
    m = as_matrix(x)
    factors = tuple(int(f) for f in factors)
    n = len(factors)
    if prod(factors) != m.shape[0]:
        raise ValueError(f"factors {factors} inconsistent with matrix size {m.shape[0]}")
    out = set(int(i) for i in trace_out)
    if not out <= set(range(n)):
        raise ValueError(f"trace_out {sorted(out)} out of range for {n} factors")
    t = m.reshape(factors + factors)
    row_sub = list(range(n))
    col_sub = [i if i in out else n + i for i in range(n)]
    keep = [i for i in range(n) if i not in out]
    out_sub = keep + [n + i for i in keep]
    res = np.einsum(t, row_sub + col_sub, out_sub)
    d = prod(factors[i] for i in keep) if keep else 1
    return res.reshape(d, d)


def partial_transpose(x, dims: Dims, party: str = "b") -> np.ndarray:
    """Transpose on one party's whole factor block (default: Bob)."""
    m = as_matrix(x)
    da, db = dims.da, dims.db
    if m.shape[0] != da * db:
        raise ValueError("dims do not match matrix")
    t = m.reshape(da, db, da, db)
    if party == "b":
        t = t.transpose(0, 3, 2, 1)
    elif party == "a":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError("party must be 'a' or 'b'")
    return np.ascontiguousarray(t.reshape(da * db, da * db))


def apply_kraus(kmap: KrausMap, x) -> np.ndarray:
    """sum_i (A_i (x) B_i) X (A_i (x) B_i)^dag; PSD in, PSD out."""
    m = as_matrix(x)
    if m.shape[0] != kmap.in_dims.d:
        raise ValueError(f"input size {m.shape[0]} does not match map input dims {kmap.in_dims}")
    out = np.zeros((kmap.out_dims.d, kmap.out_dims.d), dtype=complex)
    for a, b in zip(kmap.a_ops, kmap.b_ops):
        k = np.kron(a, b)
        out += k @ m @ k.conj().T
    return out


def sandwich(x, f: np.ndarray) -> np.ndarray:
    """f^dag X f (the filtered, generally unnormalized, operator)."""
    return f.conj().T @ as_matrix(x) @ f


def min_eigenvalue(x) -> float:
    m = as_matrix(x)
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix has non-finite entries")
    return float(np.linalg.eigvalsh(hermitize(m))[0])


def is_psd(x, tol: float = DEFAULT_POLICY.eps_psd) -> bool:
    return min_eigenvalue(x) >= -tol
