"""Named states, random-state generation, and the on-disk state format."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .qcore import DensityOperator, Dims, HermitianOperator

STATE_FILE_SUFFIX = ".qstate.json"


def bell_vectors():
    """The four Bell vectors, in the fixed index order Phi_1..Phi_4.

    Phi_1/Phi_2 = (|00> +/- |11>)/sqrt(2), Phi_3/Phi_4 = (|01> +/- |10>)/sqrt(2).
    """
    s = 1.0 / math.sqrt(2.0)
    return (
        np.array([s, 0, 0, s], dtype=complex),
        np.array([s, 0, 0, -s], dtype=complex),
        np.array([0, s, s, 0], dtype=complex),
        np.array([0, s, -s, 0], dtype=complex),
    )


@dataclass(frozen=True)
class BellProjector:
    index: int  # 1-based, matching the fixed Bell ordering
    operator: HermitianOperator

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix


def bell_projectors():
    return tuple(
        BellProjector(i + 1, HermitianOperator(np.outer(v, v.conj()), Dims.simple(2, 2)))
        for i, v in enumerate(bell_vectors())
    )


def bell_basis():
    """(vectors, projectors) for the fixed Bell ordering."""
    return bell_vectors(), bell_projectors()


def werner(p: float) -> DensityOperator:
    """p * Phi_1 projector + (1-p) * I/4; entangled for p > 1/3."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    v = bell_vectors()[0]
    m = p * np.outer(v, v.conj()) + (1.0 - p) * np.eye(4) / 4.0
    return DensityOperator(m, Dims.simple(2, 2))


def maximally_entangled(d: int) -> np.ndarray:
    """(1/sqrt(d)) sum_k |kk> as a length d*d vector."""
    if d < 2:
        raise ValueError("need local dimension >= 2")
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / math.sqrt(d)
    return v


def ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    """Independent standard complex Gaussian entries."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_density(dims: Dims, seed) -> DensityOperator:
    """Normalized G G^dag for a Ginibre G; deterministic for fixed seed.

    seed may be an int or an already-constructed Generator (caller-owned RNG).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = ginibre(rng, (dims.d, dims.d))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityOperator(m, dims)


def random_pure_product(rng: np.random.Generator, da: int, db: int):
    """Haar-ish random product vector pair (|a>, |b>), each normalized."""
    a = ginibre(rng, da)
    b = ginibre(rng, db)
    return a / np.linalg.norm(a), b / np.linalg.norm(b)


def random_separable(dims: Dims, seed, n_terms: int = 8) -> DensityOperator:
    """Uniform-weight mixture of random product states (separable by construction)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = np.zeros((dims.d, dims.d), dtype=complex)
    w = rng.dirichlet(np.ones(n_terms))
    for k in range(n_terms):
        a, b = random_pure_product(rng, dims.da, dims.db)
        v = np.kron(a, b)
        m += w[k] * np.outer(v, v.conj())
    return DensityOperator(m, dims)


def save_state(path: str, rho: DensityOperator, label: str = "") -> None:
    """Write the .qstate.json format; round-trips entries bit-exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_dict(rho, label), fh)
        fh.write("\n")


def state_from_dict(doc: dict) -> DensityOperator:
    dims = Dims(tuple(doc["party_dims"][0]), tuple(doc["party_dims"][1]))
    m = np.array([[complex(re, im) for re, im in row] for row in doc["matrix"]])
    return DensityOperator(m, dims, normalized=bool(doc.get("normalized", True)))


def state_to_dict(rho: DensityOperator, label: str = "") -> dict:
    return {
        "party_dims": [list(rho.dims.a_factors), list(rho.dims.b_factors)],
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho.matrix],
        "normalized": bool(rho.normalized),
        "label": label,
    }


def load_state(path: str) -> DensityOperator:
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return state_from_dict(doc)
