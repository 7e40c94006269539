"""Compact seeded invariant suite behind ``chicap selftest``."""
from __future__ import annotations

import numpy as np

from .capacity import ci_via_chi, coherent_information, channel_mutual_information
from .channels import choi_rank, random_channel
from .ensembles import _chi, check_disturbance_identity, chi_quantity, disturbance_bound, entropic_disturbance, image, random_ensemble
from .fixtures import orthogonal_cq_channel
from .numerics import (
    _entropy,
    _mutual_information,
    _partial_trace,
    purify,
    random_density_matrix,
    relative_entropy,
)


def run_selftest(seed: int = 0, n: int = 40) -> list[dict]:
    rng = np.random.default_rng(seed)
    checks = {}

    def record(name, ok, worst):
        prev = checks.get(name, (True, 0.0))
        checks[name] = (prev[0] and bool(ok), max(prev[1], float(worst)))

    for _ in range(n):
        d = int(rng.integers(2, 5))
        rho = random_density_matrix(d, rng, rank=int(rng.integers(1, d + 1)))
        sigma = random_density_matrix(d, rng)
        h = _entropy(rho)
        record("entropy_range", -1e-12 <= h <= np.log(d) + 1e-12, 0.0)
        record("klein", relative_entropy(rho, sigma) >= 0.0, 0.0)
        psi = purify(rho)
        err = np.linalg.norm(_partial_trace(np.outer(psi, psi.conj()), (d, d), "B") - rho)
        record("purification_round_trip", err <= 1e-10, err)
        dims = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        omega = random_density_matrix(dims[0] * dims[1], rng)
        mi = _mutual_information(omega, dims)
        bound = 2 * min(_entropy(_partial_trace(omega, dims, "B")), _entropy(_partial_trace(omega, dims, "E")))
        record("mutual_information_bound", mi <= bound + 1e-9, max(0.0, mi - bound))

        d_a, d_b = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        ch = random_channel(d_a, d_b, int(rng.integers(-(-d_a // d_b), 5)), rng)
        record("trace_preserving", ch.tp_defect() <= 1e-10, ch.tp_defect())
        record("choi_rank", choi_rank(ch) == ch.dim_env, 0.0)
        iso = ch.stinespring()
        x = random_density_matrix(d_a, rng)
        err = max(
            np.linalg.norm(iso.output(x) - ch._apply(x)),
            np.linalg.norm(iso.environment(x) - ch.complementary()._apply(x)),
        )
        record("dilation_consistency", err <= 1e-10, err)
        mu = random_ensemble(d_a, int(rng.integers(1, 6)), rng)
        res = check_disturbance_identity(ch, mu).residual
        record("disturbance_identity", res <= 1e-8, res)
        dist = entropic_disturbance(ch, mu)
        record("disturbance_bound", -1e-9 <= dist <= disturbance_bound(ch) + 1e-9, 0.0)
        gap = abs(chi_quantity(mu, cross_check=False) - _chi(mu))
        record("chi_formulas_agree", gap <= 1e-9, gap)
        gap = abs(coherent_information(ch, x) - ci_via_chi(ch, x))
        record("coherent_information_routes", gap <= 1e-8, gap)
        channel_mutual_information(ch, x)
        record("mutual_information_forms", True, 0.0)

    cq, theta = orthogonal_cq_channel()
    for _ in range(n):
        ic = coherent_information(cq, random_density_matrix(2, rng))
        record("degradable_ic_nonnegative", ic >= -1e-9, max(0.0, -ic))
    return [{"check": k, "passed": v[0], "worst": v[1]} for k, v in checks.items()]
