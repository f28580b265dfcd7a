"""Shared numeric tolerance policy.

Every module takes its tolerances from a single policy record so that the
floating-point conventions of the whole library can be tightened or relaxed
in one place (and echoed verbatim into report files).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerance bundle.

    eps_herm    max-abs anti-Hermitian part allowed to survive symmetrization
    eps_psd     eigenvalue slack accepted in positivity checks
    eps_eq      general equality comparisons
    eps_cert    margin below zero required before a violation is certified
    herm_reject constructor rejection threshold for non-Hermitian input
    """

    eps_herm: float = 1e-10
    eps_psd: float = 1e-10
    eps_eq: float = 1e-8
    eps_cert: float = 1e-9
    herm_reject: float = 1e-8

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_POLICY = NumericPolicy()
