import numpy as np
import pytest

from chicap.channels import dephasing_channel, random_channel
from chicap.ensembles import Ensemble, chi_quantity, random_ensemble
from chicap.fixtures import KET0, PLUS, orthogonal_cq_channel
from chicap.semicontinuity_lab import (
    REPORT_NOTE,
    appendix_identity_sweep,
    ci_lsc_experiment,
    dominant_projectors,
    ensemble_distance,
    lsc_witness,
    truncation_sweep,
)
from chicap.validation import NotApplicableError, ValidationError
from oracles import random_state

DIMS = [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (4, 3), (3, 4), (2, 5), (6, 2)]


def test_truncation_sweeps_are_dominated_and_converge(rng):
    for k in range(50):
        d_b, d_e = DIMS[k % len(DIMS)]
        mu = random_ensemble(d_b * d_e, int(rng.integers(1, 5)), rng)
        rep = truncation_sweep(mu, (d_b, d_e), range(1, d_e + 1))
        chi = chi_quantity(mu)
        assert all(row["chi_n"] <= chi + 1e-9 for row in rep.rows)
        assert abs(rep.rows[-1]["chi_n"] - chi) <= 1e-9
        assert rep.dominated and rep.converged
        assert rep.note == REPORT_NOTE


def test_partial_sweep_is_not_converged(rng):
    mu = random_ensemble(6, 3, rng)
    assert not truncation_sweep(mu, (2, 3), [1, 2]).converged


def test_sweep_rejects_bad_ranks(rng):
    mu = random_ensemble(6, 2, rng)
    with pytest.raises(ValidationError):
        truncation_sweep(mu, (2, 3), [2, 1])
    with pytest.raises(ValidationError):
        truncation_sweep(mu, (2, 3), [1, 4])
    with pytest.raises(ValidationError):
        truncation_sweep(mu, (2, 2), [1, 2])


def test_sweep_csv_columns(rng):
    rep = truncation_sweep(random_ensemble(4, 2, rng), (2, 2), [1, 2])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,dim,chi_n,chi_limit,residual"
    assert len(lines) == 3


def test_dominant_projectors(rng):
    rho = random_state(4, rng)
    projs, vecs = dominant_projectors(rho, [1, 2, 4])
    assert np.allclose(projs[-1], np.eye(4))
    assert abs(np.trace(projs[1]).real - 2) < 1e-12
    w = np.linalg.eigvalsh(rho)
    assert abs(np.trace(projs[0] @ rho).real - w[-1]) < 1e-12


def test_appendix_identity_sweep(rng):
    for _ in range(50):
        d_a = int(rng.integers(2, 4))
        d_b = int(rng.integers(2, 4))
        n_kraus = int(rng.integers(-(-d_a // d_b), 13 // d_b + 1))
        ch = random_channel(d_a, d_b, min(n_kraus, 12 // d_b), rng)
        mu = random_ensemble(d_a, int(rng.integers(1, 5)), rng)
        rep = appendix_identity_sweep(ch, mu, range(1, ch.dim_out + 1), range(1, ch.dim_env + 1))
        assert rep["max_residual"] <= 1e-8
        assert rep["limits_match"]


def test_ensemble_distance():
    a = Ensemble.from_pure([0.5, 0.5], [KET0, PLUS])
    b = Ensemble.from_pure([0.5, 0.5], [PLUS, KET0])
    assert ensemble_distance(a, b) < 1e-12
    c = Ensemble.from_pure([1.0], [KET0])
    assert abs(ensemble_distance(a, c) - 1.0) < 1e-12


def test_lsc_witness_on_converging_sequence():
    limit = Ensemble.from_pure([0.5, 0.5], [KET0, PLUS])
    seq = []
    for k in range(1, 12):
        eps = 2.0 ** -k
        psi = np.cos(np.pi / 4 + eps) * KET0 + np.sin(np.pi / 4 + eps) * np.array([0, 1])
        seq.append(Ensemble.from_pure([0.5, 0.5], [KET0, psi]))
    rep = lsc_witness(dephasing_channel(), seq, limit)
    assert not rep["violation"]
    assert rep["distances"][-1] < rep["distances"][0]
    assert abs(rep["differences"][-1]) < 1e-3


def test_ci_lsc_experiment(rng):
    ch, theta = orthogonal_cq_channel()
    limit = np.diag([0.6, 0.4]).astype(complex)
    seq = [(1 - 2.0 ** -k) * limit + 2.0 ** -k * random_state(2, rng) for k in range(1, 30)]
    rep = ci_lsc_experiment(ch, theta, seq, limit)
    assert rep["nonnegative"]
    assert rep["liminf_holds"]
    assert rep["implication_consistent"]
    assert rep["split_identity_residual"] < 1e-12


def test_ci_lsc_requires_degrading_map(rng):
    ch = random_channel(2, 2, 2, rng)
    with pytest.raises(NotApplicableError):
        ci_lsc_experiment(ch, ch, [np.eye(2) / 2], np.eye(2) / 2)
