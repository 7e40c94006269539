"""Finite experiments for the approximation and semicontinuity arguments.

Every report here is a finite witness: it can corroborate a
lower-semicontinuity statement along the sampled sequences, never refute
or prove it for all weakly converging sequences.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._config import get_tolerances
from .channels import KrausChannel, identity_channel, tensor_channel, truncation_channel, verify_degrading
from .ensembles import Ensemble, _chi, check_disturbance_identity, entropic_disturbance, image
from .numerics import _entropy, _mutual_information, _partial_trace, eigh_desc, projector, trace_distance
from .validation import NotApplicableError, ValidationError, check_dims

REPORT_NOTE = "finite witness only: corroborates, cannot prove or refute semicontinuity"


@dataclass
class SweepReport:
    rows: list = field(default_factory=list)
    monotone: bool = True
    converged: bool = True
    dominated: bool = True
    note: str = REPORT_NOTE

    columns = ("n", "dim", "chi_n", "chi_limit", "residual")

    def to_dict(self) -> dict:
        return {
            "note": self.note,
            "monotone": self.monotone,
            "converged": self.converged,
            "dominated": self.dominated,
            "rows": self.rows,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: row.get(k) for k in self.columns})
        return buf.getvalue()


def dominant_projectors(marginal: np.ndarray, ranks) -> tuple[list[np.ndarray], np.ndarray]:
    """Projectors onto the ``n`` dominant eigenvectors of ``marginal`` for each rank ``n``."""
    _, vecs = eigh_desc(marginal)
    projs = [vecs[:, :n] @ vecs[:, :n].conj().T for n in ranks]
    return projs, vecs


def _check_ranks(ranks, dmax):
    ranks = [int(r) for r in ranks]
    if not ranks or any(r < 1 or r > dmax for r in ranks) or ranks != sorted(set(ranks)):
        raise ValidationError(f"ranks must be strictly increasing integers in [1, {dmax}], got {ranks}")
    return ranks


def _local_truncations(marginal, ranks, anchor=None):
    projs, vecs = dominant_projectors(marginal, ranks)
    if anchor is None:
        anchor = projector(vecs[:, 0])
    return [truncation_channel(p, anchor) for p in projs]


def truncation_sweep(ensemble: Ensemble, dims, ranks, anchor=None) -> SweepReport:
    """Truncate the ``E`` factor of an ensemble on ``B (x) E`` at increasing ranks.

    For each rank ``n`` the ensemble is sent through ``Id_B (x) Lambda_n``,
    where ``Lambda_n`` compresses onto the ``n`` dominant eigenvectors of
    the ``E``-marginal of the average state and dumps the rest into
    ``anchor`` (by default the top eigenvector). Rows record ``chi(mu_n)``
    against ``chi(mu)``.
    """
    tol = 1e-9
    d_b, d_e = check_dims(dims, ensemble.dim)
    ranks = _check_ranks(ranks, d_e)
    marg = _partial_trace(ensemble.average_state(), (d_b, d_e), "E")
    try:
        lambdas = _local_truncations(marg, ranks, anchor)
    except ValidationError as exc:
        raise ValidationError(f"anchor must lie in the smallest truncation subspace: {exc}") from exc
    chi_full = _chi(ensemble)
    id_b = identity_channel(d_b)
    report = SweepReport()
    prev = -np.inf
    for n, lam in zip(ranks, lambdas):
        chi_n = _chi(image(tensor_channel(id_b, lam), ensemble))
        report.rows.append(
            {"n": n, "dim": d_b * n, "chi_n": chi_n, "chi_limit": chi_full, "residual": chi_full - chi_n}
        )
        report.dominated &= chi_n <= chi_full + tol
        report.monotone &= chi_n >= prev - tol
        prev = chi_n
    if ranks[-1] == d_e:
        report.converged = abs(report.rows[-1]["chi_n"] - chi_full) <= tol
    else:
        report.converged = False
    return report


def ensemble_distance(first: Ensemble, second: Ensemble) -> float:
    """Weight-matched member distance between two finite ensembles.

    Members are paired by an optimal assignment on the cost
    ``min(p, q) * T(rho, sigma) + |p - q|`` with ``T`` the trace distance;
    unmatched members cost their full weight.
    """
    n, m = len(first), len(second)
    size = max(n, m)
    cost = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            if i < n and j < m:
                p, q = first.weights[i], second.weights[j]
                cost[i, j] = min(p, q) * trace_distance(first.states[i], second.states[j]) + abs(p - q)
            elif i < n:
                cost[i, j] = first.weights[i]
            elif j < m:
                cost[i, j] = second.weights[j]
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def lsc_witness(channel: KrausChannel, sequence, limit: Ensemble, tail: int | None = None) -> dict:
    """Compare entropic disturbance along a sequence of ensembles with its limit.

    ``tail`` counts the final elements treated as the approximation of the
    limit (default: the second half). A violation is a tail value of
    ``D(mu_k) - D(mu_0)`` below ``-1e-9``.
    """
    tol = 1e-9
    sequence = list(sequence)
    if not sequence:
        raise ValidationError("sequence must be non-empty")
    if any(mu.dim != limit.dim for mu in sequence):
        raise ValidationError("all ensembles must share one dimension")
    tail = max(1, len(sequence) // 2) if tail is None else tail
    base = entropic_disturbance(channel, limit)
    diffs = [entropic_disturbance(channel, mu) - base for mu in sequence]
    dists = [ensemble_distance(mu, limit) for mu in sequence]
    tail_min = min(diffs[-tail:])
    return {
        "note": REPORT_NOTE,
        "limit_disturbance": base,
        "differences": diffs,
        "distances": dists,
        "tail_min_difference": tail_min,
        "violation": tail_min < -tol,
    }


def appendix_identity_sweep(channel: KrausChannel, ensemble: Ensemble, ranks_b, ranks_e) -> dict:
    """Evaluate the truncated chi-balance on a grid of local truncation ranks.

    With ``Pi_n = Lambda^B_n (x) Lambda^E_n`` applied after the Stinespring
    isometry, both sides of
    ``chi(Pi_n(V mu V^dag)) + I(B:E)[Pi_n(V avg V^dag)]
    = chi(Lambda^B_n Phi(mu)) + chi(Lambda^E_n Phi^c(mu)) + sum_i p_i I(B:E)[Pi_n(V rho_i V^dag)]``
    are computed term by term. At full ranks the terms are compared with the
    untruncated balance, and every step checks that ``I(B:E)`` did not grow.
    """
    tol = 1e-9
    iso = channel.stinespring()
    comp = channel.complementary()
    d_b, d_e = iso.dims
    ranks_b = _check_ranks(ranks_b, d_b)
    ranks_e = _check_ranks(ranks_e, d_e)
    avg = ensemble.average_state()
    lam_b = _local_truncations(channel._apply(avg), ranks_b)
    lam_e = _local_truncations(comp._apply(avg), ranks_e)
    dilated = [iso.dilate(s) for s in ensemble.states]
    dilated_avg = iso.dilate(avg)
    mi_avg_full = _mutual_information(dilated_avg, iso.dims)
    mi_members_full = [_mutual_information(w, iso.dims) for w in dilated]
    out_ens = image(channel, ensemble)
    env_ens = image(comp, ensemble)

    rows = []
    monotone = True
    for nb, lb in zip(ranks_b, lam_b):
        for ne, le in zip(ranks_e, lam_e):
            pi = tensor_channel(lb, le)
            trunc = [pi._apply(w) for w in dilated]
            chi_joint = _chi(Ensemble(ensemble.weights, trunc, validate=False))
            mi_avg = _mutual_information(pi._apply(dilated_avg), iso.dims)
            chi_b = _chi(image(lb, out_ens))
            chi_e = _chi(image(le, env_ens))
            mi_each = [_mutual_information(w, iso.dims) for w in trunc]
            mi_members = float(np.dot(ensemble.weights, mi_each))
            residual = abs(chi_joint + mi_avg - chi_b - chi_e - mi_members)
            step_monotone = mi_avg <= mi_avg_full + tol and all(
                a <= b + tol for a, b in zip(mi_each, mi_members_full)
            )
            monotone &= step_monotone
            rows.append(
                {
                    "n_b": nb,
                    "n_e": ne,
                    "dim": nb * ne,
                    "chi_joint": chi_joint,
                    "mi_average": mi_avg,
                    "chi_output": chi_b,
                    "chi_environment": chi_e,
                    "mi_members": mi_members,
                    "residual": residual,
                    "mi_monotone": step_monotone,
                }
            )
    reference = check_disturbance_identity(channel, ensemble)
    limits_ok = None
    if ranks_b[-1] == d_b and ranks_e[-1] == d_e:
        last = rows[-1]
        pairs = [
            (last["chi_joint"], reference.chi_input),
            (last["mi_average"], reference.mi_average),
            (last["chi_output"], reference.chi_output),
            (last["chi_environment"], reference.chi_environment),
            (last["mi_members"], reference.mi_members),
        ]
        limits_ok = all(abs(a - b) <= 1e-8 for a, b in pairs)
    return {
        "note": REPORT_NOTE,
        "rows": rows,
        "max_residual": max(r["residual"] for r in rows),
        "mi_monotone": monotone,
        "limits_match": limits_ok,
        "reference": reference._asdict(),
    }


def ci_lsc_experiment(channel: KrausChannel, degrading_map: KrausChannel, sequence, limit, tail=None, conv_tol=1e-6) -> dict:
    """Coherent information of a certified-degradable channel along a converging sequence.

    Checks nonnegativity of ``I_c`` at every point, the liminf inequality on
    the tail, and that whenever the output entropy has converged at the last
    point the input entropy and the entropy exchange have as well.
    """
    ok, residual = verify_degrading(channel, degrading_map)
    if not ok:
        raise NotApplicableError(f"degrading map failed verification (residual {residual:.3e})")
    tol = 1e-9
    comp = channel.complementary()
    states = [np.asarray(r, dtype=complex) for r in sequence]
    limit = np.asarray(limit, dtype=complex)

    def profile(rho):
        h_out = _entropy(channel._apply(rho))
        h_env = _entropy(comp._apply(rho))
        return {"h_in": _entropy(rho), "h_out": h_out, "h_exchange": h_env, "ic": h_out - h_env}

    points = [profile(r) for r in states]
    base = profile(limit)
    tail = max(1, len(states) // 2) if tail is None else tail
    tail_min = min(p["ic"] for p in points[-tail:])
    last = points[-1]
    out_conv = abs(last["h_out"] - base["h_out"]) <= conv_tol
    in_conv = abs(last["h_in"] - base["h_in"]) <= conv_tol
    ex_conv = abs(last["h_exchange"] - base["h_exchange"]) <= conv_tol
    return {
        "note": REPORT_NOTE,
        "degrading_residual": residual,
        "points": points,
        "limit": base,
        "min_ic": min([p["ic"] for p in points] + [base["ic"]]),
        "nonnegative": all(p["ic"] >= -tol for p in points) and base["ic"] >= -tol,
        "tail_min_ic": tail_min,
        "liminf_holds": tail_min >= base["ic"] - tol,
        "split_identity_residual": max(abs(p["h_out"] - p["ic"] - p["h_exchange"]) for p in points),
        "implication_consistent": (not out_conv) or (in_conv and ex_conv),
    }
