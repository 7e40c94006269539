import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chicap import tolerances
from chicap.numerics import (
    gibbs_state,
    mutual_information,
    partial_trace,
    purify,
    random_density_matrix,
    relative_entropy,
    shannon_entropy,
    von_neumann_entropy,
)
from chicap.validation import InfeasibleConstraintError, ValidationError
from oracles import binary_entropy, mp_entropy, partial_trace_loops, random_state


def test_entropy_known_values():
    assert abs(von_neumann_entropy(np.diag([0.75, 0.25])) - 0.562335) < 1e-6
    assert abs(von_neumann_entropy(np.eye(3) / 3) - np.log(3)) < 1e-12
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0


def test_entropy_matches_mpmath(rng):
    for _ in range(30):
        d = int(rng.integers(2, 6))
        rho = random_state(d, rng, rank=int(rng.integers(1, d + 1)))
        assert abs(von_neumann_entropy(rho) - mp_entropy(rho)) < 1e-9


def test_entropy_range_1000_states(rng):
    for _ in range(1000):
        d = int(rng.integers(2, 6))
        h = von_neumann_entropy(random_density_matrix(d, rng))
        assert -1e-12 <= h <= np.log(d) + 1e-12


def test_entropy_is_unitarily_invariant(rng):
    rho = random_state(4, rng)
    u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    assert abs(von_neumann_entropy(u @ rho @ u.conj().T) - von_neumann_entropy(rho)) < 1e-12


def test_entropy_rejects_non_states():
    with pytest.raises(ValidationError):
        von_neumann_entropy(np.diag([0.7, 0.7]))
    with pytest.raises(ValidationError):
        von_neumann_entropy(np.diag([1.2, -0.2]))
    with pytest.raises(ValidationError):
        von_neumann_entropy(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_shannon_entropy():
    assert abs(shannon_entropy([0.2, 0.8]) - binary_entropy(0.2)) < 1e-15
    assert shannon_entropy([1.0, 0.0]) == 0.0


def test_klein_inequality(rng):
    for _ in range(300):
        d = int(rng.integers(2, 5))
        rho, sigma = random_state(d, rng), random_state(d, rng)
        assert relative_entropy(rho, sigma) >= 0.0
    assert relative_entropy(rho, rho) < 1e-12


def test_relative_entropy_support_leak():
    assert relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == np.inf
    assert abs(relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) - np.log(2)) < 1e-12


def test_partial_trace_against_loops(rng):
    for d_b, d_e in [(2, 3), (3, 2), (2, 2), (4, 3)]:
        omega = random_state(d_b * d_e, rng)
        assert np.allclose(partial_trace(omega, (d_b, d_e), "B"), partial_trace_loops(omega, d_b, d_e, "B"))
        assert np.allclose(partial_trace(omega, (d_b, d_e), "E"), partial_trace_loops(omega, d_b, d_e, "E"))


def test_partial_trace_of_product(rng):
    a, b = random_state(2, rng), random_state(3, rng)
    assert np.allclose(partial_trace(np.kron(a, b), (2, 3), "B"), a)
    assert np.allclose(partial_trace(np.kron(a, b), (2, 3), "E"), b)
    assert abs(mutual_information(np.kron(a, b), (2, 3))) < 1e-12


def test_mutual_information_bound(rng):
    for _ in range(300):
        dims = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        omega = random_state(dims[0] * dims[1], rng)
        mi = mutual_information(omega, dims)
        h_b = von_neumann_entropy(partial_trace(omega, dims, "B"))
        h_e = von_neumann_entropy(partial_trace(omega, dims, "E"))
        assert -1e-12 <= mi <= 2 * min(h_b, h_e) + 1e-9


def test_bell_state_mutual_information():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert abs(mutual_information(np.outer(psi, psi), (2, 2)) - 2 * np.log(2)) < 1e-12


def test_purify_round_trip(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        rho = random_state(d, rng, rank=int(rng.integers(1, d + 1)))
        psi = purify(rho)
        omega = np.outer(psi, psi.conj())
        assert abs(np.linalg.norm(psi) - 1) < 1e-12
        assert np.allclose(partial_trace(omega, (d, d), "B"), rho, atol=1e-10)
        # both marginals of a pure state share a spectrum
        assert abs(von_neumann_entropy(partial_trace(omega, (d, d), "E")) - von_neumann_entropy(rho)) < 1e-9


def test_purify_is_deterministic(rng):
    rho = random_state(3, rng)
    assert np.array_equal(purify(rho), purify(rho.copy()))


def test_gibbs_closed_form():
    h = np.diag([0.0, 1.0])
    rho, lam = gibbs_state(h, 0.2)
    assert abs(lam - np.log(4)) < 1e-10
    assert np.allclose(rho, np.diag([0.8, 0.2]))
    assert gibbs_state(h, 0.5)[1] == 0.0
    assert gibbs_state(h, 3.0)[1] == 0.0


def test_gibbs_rejects_infeasible():
    with pytest.raises(InfeasibleConstraintError):
        gibbs_state(np.diag([0.0, 1.0]), -0.1)


def test_gibbs_hits_energy_and_maximizes_entropy(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        h = np.diag(np.sort(rng.uniform(0, 3, size=d)))
        energy = float(rng.uniform(h[0, 0] + 0.05, np.trace(h) / d))
        rho, lam = gibbs_state(h, energy)
        assert abs(np.trace(h @ rho).real - energy) < 1e-9
        for _ in range(20):
            sigma = random_state(d, rng)
            if np.trace(h @ sigma).real <= energy:
                assert von_neumann_entropy(sigma) <= von_neumann_entropy(rho) + 1e-9


def test_tolerance_override_is_scoped():
    almost = np.diag([0.5 + 5e-8, 0.5 - 5e-8 + 1e-7])
    with pytest.raises(ValidationError):
        von_neumann_entropy(almost)
    with tolerances(tol_trace=1e-6):
        von_neumann_entropy(almost)
    with pytest.raises(ValidationError):
        von_neumann_entropy(almost)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=5).filter(lambda p: sum(p) > 1e-3))
def test_diagonal_entropy_is_shannon(p):
    p = np.array(p) / sum(p)
    assert abs(von_neumann_entropy(np.diag(p)) - shannon_entropy(p)) < 1e-10
