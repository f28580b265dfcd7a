import math

import numpy as np
import pytest

from chshkit.chsh import horodecki
from chshkit.filtering import (
    NO_VIOLATION_FOUND,
    VIOLATION_FOUND,
    WitnessInstance,
    filtered_chsh,
    h_theta,
    optimal_theta,
    refine_witness,
    search_c_membership,
    witness_instance_from_dict,
    witness_value,
)
from chshkit.qcore import Dims, DensityOperator
from chshkit.states import bell_projectors, random_density, werner

PHI1 = DensityOperator(bell_projectors()[0].matrix, Dims.simple(2, 2))


def hidden_nonlocal_state():
    """Entangled mixed state with no direct violation that filters can expose."""
    alpha, beta = 0.8, 0.25
    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = math.cos(beta), math.sin(beta)
    m = alpha * np.outer(psi, psi.conj())
    m[1, 1] += 1.0 - alpha
    return DensityOperator(m, Dims.simple(2, 2))


def test_h_theta_spectrum_and_bell_diagonality():
    h = h_theta(math.pi / 4.0)
    spec = np.sort(np.linalg.eigvalsh(h))
    want = np.sort([1.0 - math.sqrt(2.0), 1.0, 1.0, 1.0 + math.sqrt(2.0)])
    assert np.abs(spec - want).max() < 1e-12
    for theta in (0.0, 0.3, math.pi / 4.0):
        h = h_theta(theta)
        for p in bell_projectors():
            assert np.abs(h @ p.matrix - p.matrix @ h).max() < 1e-12
        assert abs(np.trace(h).real - 4.0) < 1e-12


def test_witness_value_manual_trace_oracle():
    rng = np.random.default_rng(6)
    rho = random_density(Dims.simple(3, 2), rng)
    a = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    w = WitnessInstance(a, b, 0.4)
    f = np.kron(a, b)
    want = np.trace(f.conj().T @ rho.matrix @ f @ h_theta(0.4)).real
    assert abs(witness_value(rho, w) - want) < 1e-12


def test_witness_instance_round_trip_and_validation():
    w = WitnessInstance(np.eye(2, dtype=complex), np.eye(2, dtype=complex), 0.2)
    back = witness_instance_from_dict(w.as_dict())
    assert np.array_equal(back.a, w.a) and back.theta == w.theta
    assert w.full_rank()
    assert not WitnessInstance(np.array([[1, 0], [0, 0]]), np.eye(2), 0.1).full_rank()
    with pytest.raises(ValueError):
        WitnessInstance(np.eye(3), np.eye(2), 0.1)
    n = w.normalized()
    assert abs(np.linalg.svd(n.a, compute_uv=False)[0] - 1.0) < 1e-12


def test_filtered_chsh_success_probability():
    rng = np.random.default_rng(12)
    a = np.diag([1.0, 0.3]).astype(complex)
    b = np.diag([0.7, 1.0]).astype(complex)
    filt = filtered_chsh(PHI1, a, b)
    f = np.kron(a, b)
    tau = f.conj().T @ PHI1.matrix @ f
    assert abs(filt.probability - np.trace(tau).real) < 1e-12
    assert abs(np.trace(filt.state).real - 1.0) < 1e-12
    with pytest.raises(ValueError):
        filtered_chsh(PHI1, np.zeros((2, 2)), b)


def test_optimal_theta_clamped():
    assert optimal_theta(1.0, 0.0) == 0.0
    assert abs(optimal_theta(1.0, 1.0) - math.pi / 4.0) < 1e-15
    assert abs(optimal_theta(0.0, 1.0) - math.pi / 4.0) < 1e-15  # clamp at pi/4


def test_refine_witness_sign_matches_filtered_criterion():
    # negative witness value iff the filtered state violates CHSH
    rng = np.random.default_rng(31)
    mismatches = 0
    for _ in range(50):
        rho = random_density(Dims.simple(2, 2), rng)
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        w, value, filt = refine_witness(rho, a, b)
        margin = 2.0 - filt.chsh_max
        if abs(value) > 1e-8 and abs(margin) > 1e-8:
            mismatches += int(np.sign(value) != np.sign(margin))
    assert mismatches == 0


def test_search_finds_bell_state_violation_with_identity_filters():
    rep = search_c_membership(PHI1, restarts=4, seed=0, maxiter=300)
    assert rep.status == VIOLATION_FOUND
    assert abs(rep.best_value - (1.0 - math.sqrt(2.0))) < 1e-6


def test_search_reports_no_violation_for_product_state():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1.0
    rho = DensityOperator(m, Dims.simple(2, 2))
    rep = search_c_membership(rho, restarts=4, seed=0, maxiter=300)
    assert rep.status == NO_VIOLATION_FOUND
    assert rep.best_value >= -1e-9


def test_search_exposes_hidden_nonlocality():
    rho = hidden_nonlocal_state()
    assert not horodecki(rho).violating  # premise: no direct violation
    rep = search_c_membership(rho, restarts=6, seed=0, maxiter=400)
    assert rep.status == VIOLATION_FOUND
    assert rep.witness.full_rank()
    # the certificate is checkable without the search: filtered state violates
    filt = filtered_chsh(rho, rep.witness.a, rep.witness.b)
    assert filt.chsh_max > 2.0 + 1e-6


def test_werner_half_never_violates_after_filtering():
    # sweep oracle: random filters never push werner(0.5) past the bound
    rho = werner(0.5)
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(2000):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        try:
            filt = filtered_chsh(rho, a, b)
        except ValueError:
            continue
        worst = max(worst, filt.chsh_max)
    assert worst <= 2.0 + 1e-9
    rep = search_c_membership(rho, restarts=4, seed=3, maxiter=300)
    assert rep.status == NO_VIOLATION_FOUND


def test_search_is_deterministic():
    rho = hidden_nonlocal_state()
    r1 = search_c_membership(rho, restarts=3, seed=5, maxiter=200)
    r2 = search_c_membership(rho, restarts=3, seed=5, maxiter=200)
    assert r1.as_dict() == r2.as_dict()
