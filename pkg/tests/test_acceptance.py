"""Acceptance criteria, one test each.

Every test records a single ``[PASS]`` / ``[FAIL]`` line with the measured
quantities, then asserts. The lines are printed together at the end of the
pytest run; ``python3 tests/test_acceptance.py`` runs just this module.
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chicap.capacity import (
    ConstraintSpec,
    capacity_gap,
    channel_mutual_information,
    chi_capacity,
    ci_via_chi,
    coherent_information,
    ea_capacity,
    mutual_information_gradient,
)
from chicap.channels import (
    dephasing_channel,
    identity_channel,
    random_channel,
    trace_channel,
    unitary_channel,
    verify_degrading,
)
from chicap.ensembles import (
    Ensemble,
    check_disturbance_identity,
    chi_quantity,
    disturbance_bound,
    entropic_disturbance,
    image,
    random_ensemble,
)
from chicap.fixtures import HADAMARD, KET0, PLUS, orthogonal_cq_channel
from chicap.gaussian import ZERO_K, GaussianChannelSpec, classify_gap, validate
from chicap.numerics import gibbs_state
from chicap.semicontinuity_lab import appendix_identity_sweep, truncation_sweep
from oracles import random_state

H01 = np.diag([0.0, 1.0])
H_ROT = HADAMARD @ H01 @ HADAMARD


RESULTS = {}


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


def corpus(seed=1, n=200):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        d_a, d_b = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        n_kraus = int(rng.integers(1, 5))
        if d_b * n_kraus < d_a:
            continue
        ch = random_channel(d_a, d_b, n_kraus, rng)
        out.append((ch, random_ensemble(d_a, int(rng.integers(1, 6)), rng, pure=bool(rng.integers(2)))))
    return out


def test_criterion_01_identity_residual():
    pairs = corpus()
    worst = max(check_disturbance_identity(ch, mu).residual for ch, mu in pairs)
    dims_ok = all(ch.dim_env <= 4 and len(mu) <= 5 for ch, mu in pairs)
    assert report(1, worst <= 1e-8 and dims_ok, f"max residual {worst:.2e} over {len(pairs)} pairs (tol 1e-8)")


def test_criterion_02_disturbance_bound():
    pairs = corpus()
    lo, excess = np.inf, -np.inf
    for ch, mu in pairs:
        delta = entropic_disturbance(ch, mu)
        lo = min(lo, delta)
        excess = max(excess, delta - disturbance_bound(ch))
    rng = np.random.default_rng(2)
    unitary_worst = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 5))
        u, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        unitary_worst = max(unitary_worst, abs(entropic_disturbance(unitary_channel(u), random_ensemble(d, 5, rng))))
    ok = lo >= -1e-9 and excess <= 1e-9 and unitary_worst <= 1e-9
    assert report(2, ok, f"min disturbance {lo:.2e}, max excess over bound {excess:.2e}, unitary max {unitary_worst:.2e}")


def test_criterion_03_worked_qubit_example():
    mu = Ensemble.from_pure([0.5, 0.5], [KET0, PLUS])
    pi = dephasing_channel()
    chi_in = chi_quantity(mu)
    chi_out = chi_quantity(image(pi, mu))
    delta = entropic_disturbance(pi, mu)
    ok = abs(delta - 0.200685) <= 1e-6 and abs(chi_in - 0.416447) <= 1e-6 and abs(chi_out - 0.215762) <= 1e-6
    detail = f"disturbance {delta:.6f} (target 0.200685), chi {chi_in:.6f} (target 0.416447), chi out {chi_out:.6f} (target 0.215762), tol 1e-6"
    assert report(3, ok, detail)


def test_criterion_04_constrained_chi_capacity():
    t0 = time.perf_counter()
    res = chi_capacity(dephasing_channel(), ConstraintSpec(H01, 0.2))
    elapsed = time.perf_counter() - t0
    ok = abs(res.value - 0.500402) <= 1e-4 and res.certificate.passed and res.certificate.lagrangian_gap <= 1e-4 and elapsed < 30
    detail = f"value {res.value:.6f} (target 0.500402 +- 1e-4), gap {res.certificate.lagrangian_gap:.1e}, certificate {res.certificate.passed}, {elapsed:.1f}s"
    assert report(4, ok, detail)


def test_criterion_05_ea_capacity_and_gap():
    c = ConstraintSpec(H01, 0.2)
    ea = ea_capacity(identity_channel(2), c)
    rep = capacity_gap(identity_channel(2), c)
    ok = abs(ea.value - 1.000804) <= 1e-4 and abs(rep["gap"] - 0.500402) <= 2e-4 and "transitive" in rep["triggered_conditions"]
    detail = f"C_ea {ea.value:.6f} (target 1.000804), gap {rep['gap']:.6f} (target 0.500402), triggers {rep['triggered_conditions']}"
    assert report(5, ok, detail)


def test_criterion_06_cq_characterization():
    diag = ConstraintSpec(H01, 0.2)
    rot = ConstraintSpec(H_ROT, 0.2)
    pi = dephasing_channel()
    gap_diag = ea_capacity(pi, diag).value - chi_capacity(pi, diag).value
    gap_rot = ea_capacity(pi, rot).value - chi_capacity(pi, rot).value
    ok = abs(gap_diag) <= 1e-4 and gap_rot >= 0.01
    assert report(6, ok, f"diagonal H gap {gap_diag:.2e} (<= 1e-4), rotated H gap {gap_rot:.4f} (>= 0.01)")


def test_criterion_07_truncation_sweeps():
    rng = np.random.default_rng(7)
    dims = [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2), (3, 3), (3, 4), (4, 3), (2, 6), (6, 2)]
    dominated_excess = -np.inf
    full_err = 0.0
    appendix_worst = 0.0
    for k in range(50):
        d_b, d_e = dims[k % len(dims)]
        mu = random_ensemble(d_b * d_e, int(rng.integers(1, 6)), rng)
        rep = truncation_sweep(mu, (d_b, d_e), range(1, d_e + 1))
        chi = chi_quantity(mu)
        dominated_excess = max(dominated_excess, max(r["chi_n"] - chi for r in rep.rows))
        full_err = max(full_err, abs(rep.rows[-1]["chi_n"] - chi))
        d_a = int(rng.integers(2, 4))
        ch = random_channel(d_a, d_b, d_e, rng) if d_b * d_e >= d_a else random_channel(d_a, d_b, -(-d_a // d_b), rng)
        sweep = appendix_identity_sweep(ch, random_ensemble(d_a, 3, rng), range(1, ch.dim_out + 1), range(1, ch.dim_env + 1))
        appendix_worst = max(appendix_worst, sweep["max_residual"])
    ok = dominated_excess <= 1e-9 and full_err <= 1e-9 and appendix_worst <= 1e-8
    detail = f"max chi_n - chi {dominated_excess:.2e}, full-rank error {full_err:.2e}, appendix residual {appendix_worst:.2e}"
    assert report(7, ok, detail)


def test_criterion_08_coherent_information():
    rng = np.random.default_rng(8)
    route = 0.0
    for _ in range(100):
        d_a, d_b = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        ch = random_channel(d_a, d_b, int(rng.integers(-(-d_a // d_b), 4)), rng)
        rho = random_state(d_a, rng)
        route = max(route, abs(coherent_information(ch, rho) - ci_via_chi(ch, rho)))
    cq, theta = orthogonal_cq_channel()
    fixtures = [(cq, theta), (dephasing_channel(), identity_channel(2)), (identity_channel(2), trace_channel(2))]
    certified = all(verify_degrading(ch, th)[0] for ch, th in fixtures)
    ic_min = min(coherent_information(ch, random_state(ch.dim_in, rng)) for ch, _ in fixtures for _ in range(200))
    pi_max = max(abs(coherent_information(dephasing_channel(), random_state(2, rng))) for _ in range(200))
    ok = route <= 1e-8 and certified and ic_min >= -1e-9 and pi_max <= 1e-9
    assert report(8, ok, f"route difference {route:.2e}, degradable min I_c {ic_min:.2e}, dephasing max |I_c| {pi_max:.2e}")


def test_criterion_09_gradient_check():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 4))
        ch = random_channel(d, int(rng.integers(2, 4)), 3, rng)
        rho = random_state(d, rng)
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        x = x + x.conj().T
        x -= np.trace(x) / d * np.eye(d)
        t = 1e-5
        fd = (channel_mutual_information(ch, rho + t * x) - channel_mutual_information(ch, rho - t * x)) / (2 * t)
        an = float(np.trace(mutual_information_gradient(ch, rho) @ x).real)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-12))
    assert report(9, worst <= 1e-4, f"max relative error {worst:.2e} over 20 points (tol 1e-4)")


def test_criterion_10_gaussian_classifier():
    att = GaussianChannelSpec(1, 1, np.sqrt(0.5) * np.eye(2), 0.25 * np.eye(2))
    ok_valid, mins = validate(att)
    verdict = classify_gap(att)["verdict"]
    zero = classify_gap(GaussianChannelSpec(1, 1, np.zeros((2, 2)), 0.5 * np.eye(2)))
    ok = ok_valid and min(mins) >= -1e-10 and verdict == "gap>0 guaranteed" and ZERO_K in zero["triggers"]
    assert report(10, ok, f"attenuator min eigenvalue {min(mins):.1e}, verdict '{verdict}', K=0 triggers {zero['triggers']}")


def test_criterion_11_gibbs_solver():
    _, lam = gibbs_state(H01, 0.2)
    zeros = [gibbs_state(H01, e)[1] for e in (0.5, 0.7, 5.0)]
    ok = abs(lam - 1.386294) <= 1e-6 and abs(lam - np.log(4)) <= 1e-8 and all(z == 0.0 for z in zeros)
    assert report(11, ok, f"lambda {lam:.10f} (ln 4 = {np.log(4):.10f}), lambda at E >= 0.5: {zeros}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
