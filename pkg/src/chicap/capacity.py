"""Constrained chi-capacity, entanglement-assisted capacity and coherent information.

Every optimizer returns a :class:`CapacityResult`. Values are in nats.
Logarithms of possibly singular states use an eigenvalue floor of 1e-12.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._config import get_tolerances
from .channels import KrausChannel, cq_channel, degrading_for_orthogonal_cq, is_discrete_cq, verify_degrading
from .ensembles import Ensemble, _chi, image
from .numerics import (
    _entropy,
    _partial_trace,
    _relative_entropy,
    eigh_desc,
    gibbs_state,
    logm_floor,
    purify,
)
from .validation import (
    InfeasibleConstraintError,
    NotApplicableError,
    ValidationError,
    check_density_matrix,
    check_hamiltonian,
)

LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class ConstraintSpec:
    """Linear energy constraint ``Tr H rho <= energy``."""

    hamiltonian: np.ndarray
    energy: float

    def __post_init__(self):
        h = check_hamiltonian(self.hamiltonian)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "energy", float(self.energy))
        if self.energy <= self.min_energy:
            raise InfeasibleConstraintError(
                f"energy bound {self.energy!r} must exceed the minimal energy level {self.min_energy!r}"
            )

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def min_energy(self) -> float:
        return float(np.linalg.eigvalsh(self.hamiltonian)[0])

    def energy_of(self, rho) -> float:
        return float(np.trace(self.hamiltonian @ rho).real)

    @classmethod
    def unconstrained(cls, dim: int) -> "ConstraintSpec":
        return cls(np.zeros((dim, dim)), 1.0)


@dataclass
class OptimalityCertificate:
    lagrangian_gap: float
    slackness_residual: float
    n_probe_restarts: int
    passed: bool
    member_spread: float = 0.0
    probe_state: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "lagrangian_gap": float(self.lagrangian_gap),
            "slackness_residual": float(self.slackness_residual),
            "member_spread": float(self.member_spread),
            "n_probe_restarts": int(self.n_probe_restarts),
            "passed": bool(self.passed),
        }


@dataclass
class CapacityResult:
    value: float
    optimizer: object
    multiplier: float = 0.0
    iterations: int = 0
    certificate: OptimalityCertificate | None = None
    converged: bool = True
    energy: float | None = None
    trace: list = field(default_factory=list)

    @property
    def average_state(self) -> np.ndarray:
        if isinstance(self.optimizer, Ensemble):
            return self.optimizer.average_state()
        return self.optimizer


# -- shared batched helpers ----------------------------------------------


def _outputs(kraus: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Channel outputs ``Phi(|v_j><v_j|)`` for the rows of ``vecs``."""
    a = np.einsum("kbi,mi->mkb", kraus, vecs)
    return np.einsum("mkb,mkc->mbc", a, a.conj())


def _adjoint_batch(kraus: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return np.einsum("kbi,mbc,kcj->mij", kraus.conj(), ys, kraus)


def _entropies_and_logs(mats: np.ndarray):
    w, v = np.linalg.eigh(mats)
    tol = get_tolerances().tol_eig
    wc = np.where(w < tol, 0.0, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.sum(np.where(wc > 0, wc * np.log(np.where(wc > 0, wc, 1.0)), 0.0), axis=-1)
    logs = np.einsum("mij,mj,mkj->mik", v, np.log(np.maximum(w, LOG_FLOOR)), v.conj())
    return ent, logs


def _resolve_constraint(constraint, dim) -> ConstraintSpec:
    if constraint is None:
        return ConstraintSpec.unconstrained(dim)
    if constraint.dim != dim:
        raise ValidationError(f"constraint dimension {constraint.dim} != channel input {dim}")
    return constraint


def _random_unit_rows(n, d, rng):
    z = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def reduce_ensemble(channel: KrausChannel, ensemble: Ensemble) -> Ensemble:
    """Shrink an ensemble to at most ``d^2`` members without lowering output chi.

    Caratheodory walk: move the weights along a null vector of the map
    ``p -> sum_j p_j rho_j`` (so the average state is untouched), in the
    direction that does not increase ``sum_j p_j H(Phi(rho_j))``, until a
    weight reaches zero; repeat.
    """
    d = ensemble.dim
    if len(ensemble) <= d * d:
        return ensemble
    states = ensemble.states
    iu = np.triu_indices(d)
    iu_strict = np.triu_indices(d, 1)
    a = np.array([np.concatenate([s[iu].real, s[iu_strict].imag]) for s in states]).T
    cost = np.array([_entropy(channel._apply(s)) for s in states])
    p = ensemble.weights.copy()
    idx = np.arange(len(p))
    while idx.size > d * d:
        z = np.linalg.svd(a[:, idx])[2][-1]
        if np.dot(cost[idx], z) > 0:
            z = -z
        neg = z < 0
        ratios = -p[idx][neg] / z[neg]
        k = int(np.argmin(ratios))
        p[idx] += ratios[k] * z
        p[idx[np.flatnonzero(neg)[k]]] = 0.0
        idx = idx[p[idx] > 0]
    p = np.clip(p[idx], 0.0, None)
    return Ensemble(p / p.sum(), states[idx], validate=False)


# -- chi-capacity --------------------------------------------------------


class _Lagrangian:
    """``chi(Phi(mu)) - lam (Tr H avg - energy)`` over pure-state ensembles."""

    def __init__(self, channel: KrausChannel, constraint: ConstraintSpec, lam: float):
        self.kraus = channel.kraus
        self.h = constraint.hamiltonian
        self.energy = constraint.energy
        self.lam = lam

    def evaluate(self, p, vecs):
        outs = _outputs(self.kraus, vecs)
        ent, logs = _entropies_and_logs(outs)
        avg = np.einsum("m,mij->ij", p, outs)
        avg = (avg + avg.conj().T) / 2
        h_avg = _entropy(avg)
        chi = h_avg - float(np.dot(p, ent))
        e = np.real(np.einsum("mi,ij,mj->m", vecs.conj(), self.h, vecs))
        energy = float(np.dot(p, e))
        value = chi - self.lam * (energy - self.energy)
        return value, dict(outs=outs, ent=ent, logs=logs, avg=avg, e=e, chi=chi, energy=energy)

    def weight_gradient(self, aux):
        log_avg = logm_floor(aux["avg"], LOG_FLOOR)
        cross = np.real(np.einsum("mij,ji->m", aux["outs"], log_avg))
        return -aux["ent"] - cross - self.lam * aux["e"]

    def state_direction(self, vecs, aux):
        log_avg = logm_floor(aux["avg"], LOG_FLOOR)
        m = _adjoint_batch(self.kraus, aux["logs"] - log_avg[None]) - self.lam * self.h[None]
        mv = np.einsum("mij,mj->mi", m, vecs)
        c = np.real(np.einsum("mi,mi->m", vecs.conj(), mv))
        return mv - c[:, None] * vecs


def _normalize_rows(v):
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _alternating_ascent(problem: _Lagrangian, p, vecs, max_iter, ftol=1e-12):
    """Exponentiated-gradient weight steps alternating with sphere-gradient state steps."""
    value, aux = problem.evaluate(p, vecs)
    history = [value]
    t_state = 1.0
    eta = 1.0
    quiet = 0
    it = 0
    for it in range(1, max_iter + 1):
        start = value
        # (a) weights
        g = problem.weight_gradient(aux)
        while True:
            z = np.log(np.maximum(p, 1e-300)) + eta * (g - g.max())
            q = np.exp(z)
            q /= q.sum()
            v_new, aux_new = problem.evaluate(q, vecs)
            if v_new >= value - 1e-15 or eta < 1e-6:
                break
            eta *= 0.5
        if v_new >= value - 1e-15:
            p, value, aux = q, v_new, aux_new
            eta = min(1.0, eta * 2)
        # (b) states
        xi = problem.state_direction(vecs, aux)
        slope = 2 * float(np.sum(p * np.sum(np.abs(xi) ** 2, axis=1)))
        if slope > 0:
            t = min(t_state * 2, 10.0)
            while t > 1e-12:
                cand = _normalize_rows(vecs + t * xi)
                v_new, aux_new = problem.evaluate(p, cand)
                if v_new >= value + 1e-4 * t * slope:
                    vecs, value, aux = cand, v_new, aux_new
                    t_state = t
                    break
                t *= 0.5
            else:
                t_state = 1.0
        history.append(value)
        if value - start <= ftol * (1 + abs(value)):
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
    return p, vecs, history, it


def _solve_lagrangian(problem: _Lagrangian, p, vecs, max_iter=2000, n_alternating=200, gtol=1e-6):
    """Maximize the Lagrangian over pure-state ensembles.

    Alternating ascent first; the result is then polished by L-BFGS over
    softmax weights and unnormalized states, which converges far faster
    near degenerate optima. Converged means the final gradient, taken with
    respect to the softmax logits and the normalized states, has max-norm
    at most ``gtol``.
    """
    p, vecs, history, n_alt = _alternating_ascent(problem, p, vecs, min(n_alternating, max_iter))
    m, d = vecs.shape

    def unpack(x):
        z = x[:m]
        q = np.exp(z - z.max())
        a = (x[m : m + m * d] + 1j * x[m + m * d :]).reshape(m, d)
        norms = np.linalg.norm(a, axis=1)
        return q / q.sum(), a / norms[:, None], norms

    def fun(x):
        w, v, norms = unpack(x)
        value, aux = problem.evaluate(w, v)
        g = problem.weight_gradient(aux)
        xi = problem.state_direction(v, aux)
        grad_z = w * (g - np.dot(w, g))
        grad_a = 2 * w[:, None] * xi / norms[:, None]
        grad = np.concatenate([grad_z, grad_a.real.ravel(), grad_a.imag.ravel()])
        return -value, -grad

    z0 = np.log(np.maximum(p, 1e-300))
    x0 = np.concatenate([z0 - z0.max(), vecs.real.ravel(), vecs.imag.ravel()])
    res = minimize(
        fun, x0, jac=True, method="L-BFGS-B",
        callback=lambda xk: history.append(-fun(xk)[0]),
        options={"maxiter": max(max_iter - n_alt, 1), "ftol": 1e-16, "gtol": 1e-13, "maxcor": 30},
    )
    w, v, _ = unpack(res.x)
    value, aux = problem.evaluate(w, v)
    if value < history[n_alt]:
        # the polish never ends below its starting point; guard anyway
        w, v, x = p, vecs, x0
        value, aux = problem.evaluate(w, v)
    else:
        x = np.concatenate([res.x[:m], v.real.ravel(), v.imag.ravel()])
    converged = bool(np.abs(fun(x)[1]).max() <= gtol)
    return w, v, value, aux, history, n_alt + int(res.nit), converged


def _ensemble_of(p, vecs) -> Ensemble:
    return Ensemble.from_pure(p, vecs, validate=False)


def _initial_point(d, m, rng):
    return rng.dirichlet(np.ones(m)), _random_unit_rows(m, d, rng)


def _ensemble_to_point(ensemble: Ensemble):
    vecs = []
    for s in ensemble.states:
        w, v = eigh_desc(s)
        vecs.append(v[:, 0])
    return ensemble.weights.copy(), np.array(vecs)


def chi_capacity(
    channel: KrausChannel,
    constraint: ConstraintSpec | None = None,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 2000,
    n_probe: int = 16,
    max_rounds: int = 3,
    record_trace: bool = False,
) -> CapacityResult:
    """Energy-constrained chi-capacity ``sup chi(Phi(mu))`` over pure-state ensembles.

    The Lagrangian ``chi(Phi(mu)) - lam (Tr H avg - E)`` is maximized for
    fixed ``lam`` by alternating weight and state updates; ``lam`` is then
    bisected until the energy constraint is met or slack. The returned
    certificate comes from :func:`certify_optimality`. If it fails, the
    violating probe state is added to the ensemble and the search repeats,
    at most ``max_rounds`` times.
    """
    tols = get_tolerances()
    c = _resolve_constraint(constraint, channel.dim_in)
    d = channel.dim_in
    m = d * d
    rng = np.random.default_rng(seed)
    trace = []
    total_iters = 0
    all_converged = True

    def solve(lam, starts):
        nonlocal total_iters, all_converged
        prob = _Lagrangian(channel, c, lam)
        best = None
        for p0, v0 in starts:
            p, v, val, aux, hist, its, conv = _solve_lagrangian(prob, p0, v0, max_iter=max_iter)
            total_iters += its
            if best is None or val > best[2] + 1e-12:
                best = (p, v, val, aux, conv)
        all_converged &= best[4]
        if record_trace:
            trace.append({"lambda": lam, "lagrangian": best[2], "chi": best[3]["chi"], "energy": best[3]["energy"]})
        return best

    starts = [_initial_point(d, m, rng) for _ in range(max(1, restarts))]
    seed_points = starts
    result = None
    for _round in range(max_rounds):
        lam, sol, lo = _bisect_multiplier(solve, seed_points, c, tols)
        p, v, _, aux, _ = sol
        ens = _ensemble_of(p, v)
        if lo is not None and lam > 0 and aux["energy"] < c.energy - tols.tol_energy:
            mixed = _mix_to_energy(lo, sol, c)
            if mixed is not None and _chi(image(channel, mixed)) >= aux["chi"] - 1e-12:
                ens = mixed
        ens = reduce_ensemble(channel, ens)
        value = max(_chi(image(channel, ens)), 0.0)
        cert = certify_optimality(channel, ens, c, lam, n_probe=n_probe, seed=seed)
        candidate = CapacityResult(
            value=value,
            optimizer=ens,
            multiplier=lam,
            iterations=total_iters,
            certificate=cert,
            converged=all_converged and cert.passed,
            energy=c.energy_of(ens.average_state()),
            trace=trace,
        )
        if result is None or candidate.value > result.value - 1e-12 or cert.passed:
            result = candidate
        if cert.passed or cert.probe_state is None:
            break
        p0, v0 = _ensemble_to_point(ens)
        v0 = np.vstack([v0, cert.probe_state[None]])
        p0 = np.append(0.9 * p0, 0.1)
        seed_points = [(p0 / p0.sum(), v0)]
    result.iterations = total_iters
    return result


def _bisect_multiplier(solve, starts, c: ConstraintSpec, tols):
    sol0 = solve(0.0, starts)
    if sol0[3]["energy"] <= c.energy + tols.tol_energy:
        return 0.0, sol0, None
    lo_lam, lo = 0.0, sol0
    hi_lam = 1.0
    hi = solve(hi_lam, [sol0[:2]])
    while hi[3]["energy"] > c.energy + tols.tol_energy:
        lo_lam, lo = hi_lam, hi
        hi_lam *= 2.0
        hi = solve(hi_lam, [hi[:2]])
        if hi_lam > 1e8:
            break
    for _ in range(200):
        if abs(hi[3]["energy"] - c.energy) <= tols.tol_energy or hi_lam - lo_lam <= 1e-12 * max(1.0, hi_lam):
            break
        mid = 0.5 * (lo_lam + hi_lam)
        sol = solve(mid, [lo[:2], hi[:2]])
        if sol[3]["energy"] > c.energy + tols.tol_energy:
            lo_lam, lo = mid, sol
        else:
            hi_lam, hi = mid, sol
    return hi_lam, hi, lo


def _mix_to_energy(lo, hi, c: ConstraintSpec):
    e_lo, e_hi = lo[3]["energy"], hi[3]["energy"]
    if e_lo <= e_hi:
        return None
    t = (c.energy - e_hi) / (e_lo - e_hi)
    t = min(max(t, 0.0), 1.0)
    p = np.concatenate([t * lo[0], (1 - t) * hi[0]])
    v = np.vstack([lo[1], hi[1]])
    return _ensemble_of(p, v)


def certify_optimality(
    channel: KrausChannel,
    ensemble: Ensemble,
    constraint: ConstraintSpec | None = None,
    multiplier: float = 0.0,
    n_probe: int = 16,
    seed: int = 0,
    max_iter: int = 500,
) -> OptimalityCertificate:
    """Lagrangian form of the maximal-distance test for a candidate optimal ensemble.

    Maximizes ``H(Phi(phi) || Phi(avg)) - lam (<phi|H|phi> - E)`` over pure
    ``phi`` from many starts. An optimal ensemble has probe maximum equal to
    ``chi(Phi(mu))``, attained by its own members, and satisfies
    complementary slackness. ``lagrangian_gap`` is the probe maximum minus
    ``chi(Phi(mu))``.
    """
    tols = get_tolerances()
    c = _resolve_constraint(constraint, channel.dim_in)
    d = channel.dim_in
    kraus = channel.kraus
    avg = ensemble.average_state()
    out_avg = channel._apply(avg)
    log_avg = logm_floor(out_avg, LOG_FLOOR)
    chi_out = _chi(image(channel, ensemble))
    lam = float(multiplier)
    h = c.hamiltonian

    def score(vecs):
        outs = _outputs(kraus, vecs)
        ent, logs = _entropies_and_logs(outs)
        cross = np.real(np.einsum("mij,ji->m", outs, log_avg))
        e = np.real(np.einsum("mi,ij,mj->m", vecs.conj(), h, vecs))
        return -ent - cross - lam * (e - c.energy), logs

    def ascend(vec):
        vecs = vec[None] / np.linalg.norm(vec)
        val, logs = score(vecs)
        t = 1.0
        for _ in range(max_iter):
            m = _adjoint_batch(kraus, logs - log_avg[None])[0] - lam * h
            mv = m @ vecs[0]
            xi = mv - np.vdot(vecs[0], mv).real * vecs[0]
            slope = 2 * float(np.vdot(xi, xi).real)
            if slope < 1e-24:
                break
            t = min(2 * t, 10.0)
            moved = False
            while t > 1e-14:
                cand = _normalize_rows(vecs + t * xi[None])
                cv, cl = score(cand)
                if cv[0] >= val[0] + 1e-4 * t * slope:
                    vecs, val, logs, moved = cand, cv, cl, True
                    break
                t *= 0.5
            if not moved:
                break
        return float(val[0]), vecs[0]

    rng = np.random.default_rng(seed)
    starts = [v for v in _ensemble_to_point(ensemble)[1]]
    starts += list(eigh_desc(h)[1].T) + list(np.eye(d, dtype=complex))
    starts += list(_random_unit_rows(n_probe, d, rng))
    best_val, best_vec = -np.inf, None
    for s in starts:
        val, vec = ascend(np.asarray(s, dtype=complex))
        if val > best_val:
            best_val, best_vec = val, vec

    member_vals, _ = score(_ensemble_to_point(ensemble)[1])
    significant = ensemble.weights > 1e-6
    spread = float(np.max(best_val - member_vals[significant])) if np.any(significant) else 0.0
    energy_gap = c.energy_of(avg) - c.energy
    slackness = abs(lam * energy_gap)
    gap = best_val - chi_out
    passed = bool(
        gap <= tols.cert_tol
        and spread <= tols.cert_tol
        and slackness <= tols.slackness_tol
        and energy_gap <= tols.tol_energy
    )
    return OptimalityCertificate(
        lagrangian_gap=float(gap),
        slackness_residual=float(slackness),
        n_probe_restarts=len(starts),
        passed=passed,
        member_spread=spread,
        probe_state=None if passed else best_vec,
    )


# -- chi-function at a fixed average state --------------------------------


def chi_function(
    channel: KrausChannel,
    rho,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 3000,
    gtol: float = 1e-10,
) -> CapacityResult:
    """``sup chi(Phi(mu))`` over pure-state ensembles with average state ``rho``.

    Decompositions of ``rho`` into ``m = d^2`` pure members are the vectors
    ``psi_j = R a_j`` where ``R R^dag = rho`` and the rows ``a_j`` of an
    ``m x d`` isometry ``A``. Since ``H(Phi(rho))`` is fixed, the search
    minimizes the average output entropy by Riemannian gradient descent on
    the Stiefel manifold, from the spectral decomposition and from
    ``restarts`` random isometries.
    """
    rho = check_density_matrix(rho, dim=channel.dim_in)
    d = channel.dim_in
    m = d * d
    kraus = channel.kraus
    w, v = eigh_desc(rho)
    r = v * np.sqrt(np.clip(w, 0.0, None))
    h_out = _entropy(channel._apply(rho))

    def objective(a):
        psi = a @ r.T  # row j is R a_j
        p = np.sum(np.abs(psi) ** 2, axis=1)
        outs = _outputs(kraus, psi)
        live = p > 1e-300
        normed = np.where(live[:, None, None], outs / np.where(live, p, 1.0)[:, None, None], 0.0)
        ent, logs = _entropies_and_logs(normed)
        return float(np.dot(p, ent)), psi, p, logs, live

    def gradient(psi, logs, live):
        gpsi = -np.einsum("mij,mj->mi", _adjoint_batch(kraus, logs), psi)
        gpsi[~live] = 0.0
        return gpsi @ r.conj()

    def descend(a):
        f, psi, p, logs, live = objective(a)
        t = 1.0
        its = 0
        ok = False
        for its in range(1, max_iter + 1):
            g = gradient(psi, logs, live)
            ah_g = a.conj().T @ g
            xi = g - a @ ((ah_g + ah_g.conj().T) / 2)
            gn = float(np.sum(np.abs(xi) ** 2))
            if gn < gtol**2:
                ok = True
                break
            t = min(2 * t, 10.0)
            moved = False
            while t > 1e-14:
                u, _, vh = np.linalg.svd(a - t * xi, full_matrices=False)
                cand = u @ vh
                cf, cpsi, cp, clogs, clive = objective(cand)
                if cf <= f - 1e-4 * t * gn:
                    a, f, psi, p, logs, live, moved = cand, cf, cpsi, cp, clogs, clive, True
                    break
                t *= 0.5
            if not moved:
                ok = True
                break
        return f, a, psi, p, its, ok

    rng = np.random.default_rng(seed)
    starts = [np.eye(m, d, dtype=complex)]
    for _ in range(restarts):
        g = rng.normal(size=(m, d)) + 1j * rng.normal(size=(m, d))
        q, _ = np.linalg.qr(g)
        starts.append(q)
    best = None
    total = 0
    for a0 in starts:
        f, a, psi, p, its, ok = descend(a0)
        total += its
        if best is None or f < best[0] - 1e-12:
            best = (f, a, psi, p, ok)
    f, a, psi, p, ok = best
    keep = p > get_tolerances().tol_weight
    ens = Ensemble.from_pure(p[keep] / p[keep].sum(), psi[keep] / np.sqrt(p[keep])[:, None], validate=False)
    value = max(h_out - f, 0.0)
    return CapacityResult(value=value, optimizer=ens, iterations=total, converged=ok)


# -- entanglement-assisted capacity ---------------------------------------


def channel_mutual_information(channel: KrausChannel, rho, cross_check=True) -> float:
    """``I(Phi, rho) = H(rho) + H(Phi(rho)) - H(Phi^c(rho))``.

    With ``cross_check`` the relative-entropy form on a purification
    ``H((Phi (x) Id)(|phi><phi|) || Phi(rho) (x) rho_R)`` is also computed;
    disagreement beyond 1e-8 raises ``ArithmeticError``.
    """
    rho = check_density_matrix(rho, dim=channel.dim_in)
    value = _channel_mi(channel, rho)
    if cross_check:
        other = _channel_mi_relative(channel, rho)
        if abs(value - other) > 1e-8:
            raise ArithmeticError(f"mutual information forms disagree: {value!r} vs {other!r}")
    return value


def _channel_mi(channel, rho) -> float:
    return _entropy(rho) + _entropy(channel._apply(rho)) - _entropy(channel.complementary()._apply(rho))


def _channel_mi_relative(channel, rho) -> float:
    d = channel.dim_in
    psi = purify(rho).reshape(d, d)  # psi[a, r]
    bk = np.einsum("kba,ar->kbr", channel.kraus, psi).reshape(channel.dim_env, -1)
    joint = bk.T @ bk.conj()
    joint = (joint + joint.conj().T) / 2
    ref = psi.T @ psi.conj()
    prod = np.kron(channel._apply(rho), ref)
    return _relative_entropy(joint, (prod + prod.conj().T) / 2)


def mutual_information_gradient(channel: KrausChannel, rho) -> np.ndarray:
    """Gradient of ``I(Phi, rho)`` restricted to traceless Hermitian directions.

    ``-ln rho - Phi^*(ln Phi(rho)) + Phi^c*(ln Phi^c(rho))``; the identity
    component is irrelevant on the state space and is removed.
    """
    comp = channel.complementary()
    g = (
        -logm_floor(rho, LOG_FLOOR)
        - channel.adjoint(logm_floor(channel._apply(rho), LOG_FLOOR))
        + comp.adjoint(logm_floor(comp._apply(rho), LOG_FLOOR))
    )
    g = (g + g.conj().T) / 2
    return g - np.trace(g).real / g.shape[0] * np.eye(g.shape[0])


def _linear_oracle(g: np.ndarray, c: ConstraintSpec, tol=1e-12):
    """``argmax Tr(G X)`` over states with ``Tr H X <= E``."""
    h = c.hamiltonian

    def top(lam):
        w, v = np.linalg.eigh(g - lam * h)
        vec = v[:, -1]
        return vec, float(np.vdot(vec, h @ vec).real)

    v0, e0 = top(0.0)
    if e0 <= c.energy:
        return np.outer(v0, v0.conj())
    lo, hi = 0.0, 1.0
    v_hi, e_hi = top(hi)
    v_lo, e_lo = v0, e0
    while e_hi > c.energy:
        lo, v_lo, e_lo = hi, v_hi, e_hi
        hi *= 2.0
        v_hi, e_hi = top(hi)
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        v, e = top(mid)
        if e > c.energy:
            lo, v_lo, e_lo = mid, v, e
        else:
            hi, v_hi, e_hi = mid, v, e
    t = 0.0 if e_lo <= e_hi else (c.energy - e_hi) / (e_lo - e_hi)
    t = min(max(t, 0.0), 1.0)
    return t * np.outer(v_lo, v_lo.conj()) + (1 - t) * np.outer(v_hi, v_hi.conj())


def ea_capacity(
    channel: KrausChannel,
    constraint: ConstraintSpec | None = None,
    max_iter: int = 5000,
    gap_tol: float = 1e-9,
    record_trace: bool = False,
) -> CapacityResult:
    """Entanglement-assisted capacity ``sup I(Phi, rho)`` under ``Tr H rho <= E``.

    Conditional-gradient (Frank-Wolfe) ascent from the Gibbs state of the
    constraint with Armijo backtracking on the step. Stops when the
    Frank-Wolfe duality gap, an upper bound on the remaining suboptimality,
    falls below ``gap_tol``.
    """
    tols = get_tolerances()
    c = _resolve_constraint(constraint, channel.dim_in)
    d = channel.dim_in
    rho, _ = gibbs_state(c.hamiltonian, c.energy) if np.any(c.hamiltonian) else (np.eye(d) / d, 0.0)
    if np.linalg.eigvalsh(rho)[0] < tols.interior_eps:
        rho = (1 - tols.interior_eps) * rho + tols.interior_eps * np.eye(d) / d
    value = _channel_mi(channel, rho)
    trace = []
    gamma = 1.0
    converged = False
    fw_gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = mutual_information_gradient(channel, rho)
        x = _linear_oracle(g, c)
        direction = x - rho
        fw_gap = float(np.trace(g @ direction).real)
        if record_trace:
            trace.append({"iteration": it, "value": value, "fw_gap": fw_gap})
        if fw_gap <= gap_tol:
            converged = True
            break
        gamma = min(1.0, 2 * gamma)
        accepted = False
        while gamma > 1e-14:
            cand = rho + gamma * direction
            cv = _channel_mi(channel, cand)
            if cv >= value + 1e-4 * gamma * fw_gap:
                rho, value, accepted = cand, cv, True
                break
            gamma *= 0.5
        if not accepted:
            converged = fw_gap <= 1e-6
            break
    rho = (rho + rho.conj().T) / 2
    lam = _multiplier_estimate(channel, rho, c)
    return CapacityResult(
        value=max(float(value), 0.0),
        optimizer=rho,
        multiplier=lam,
        iterations=it,
        converged=converged,
        energy=c.energy_of(rho),
        trace=trace,
    )


def _multiplier_estimate(channel, rho, c: ConstraintSpec) -> float:
    """Least-squares ``lam`` with ``grad I = lam H + const`` on the support of ``rho``."""
    if not np.any(c.hamiltonian) or c.energy_of(rho) < c.energy - 1e-7:
        return 0.0
    g = mutual_information_gradient(channel, rho)
    h = c.hamiltonian - np.trace(c.hamiltonian).real / c.dim * np.eye(c.dim)
    denom = float(np.sum(np.abs(h) ** 2))
    if denom == 0:
        return 0.0
    return max(float(np.real(np.vdot(h, g))) / denom, 0.0)


# -- coherent information --------------------------------------------------


def coherent_information(channel: KrausChannel, rho) -> float:
    """``I_c(Phi, rho) = H(Phi(rho)) - H(Phi^c(rho))``."""
    rho = check_density_matrix(rho, dim=channel.dim_in)
    return _entropy(channel._apply(rho)) - _entropy(channel.complementary()._apply(rho))


def ci_via_chi(channel: KrausChannel, rho, degrading_map: KrausChannel | None = None):
    """Coherent information through the spectral pure-state ensemble ``mu`` of ``rho``.

    Returns ``chi(Phi(mu)) - chi(Phi^c(mu))``. With a verified degrading map
    ``theta`` the pair ``(value, disturbance)`` is returned instead, where
    ``disturbance`` is the entropic disturbance of ``theta`` on ``Phi(mu)``.
    """
    from .ensembles import eigen_ensemble, entropic_disturbance

    mu = eigen_ensemble(rho)
    value = _chi(image(channel, mu)) - _chi(image(channel.complementary(), mu))
    if degrading_map is None:
        return value
    ok, residual = verify_degrading(channel, degrading_map)
    if not ok:
        raise NotApplicableError(f"degrading map failed verification (residual {residual:.3e})")
    return value, entropic_disturbance(degrading_map, image(channel, mu))


# -- gap classification ----------------------------------------------------


def _pair_residual(channel, phi, psi) -> float:
    return float(np.linalg.norm(channel._apply(np.outer(phi, psi.conj()))))


def min_coherence_residual(channel: KrausChannel, n_samples: int = 32, seed: int = 0, pairs=None) -> float:
    """Smallest ``||Phi(|phi><psi|)||_F`` found over orthonormal pairs.

    Starts from ``pairs`` (if given), computational-basis pairs and random
    pairs, each refined by local minimization. A value clearly above zero
    is evidence that no orthogonal pair is annihilated; it is a search,
    not a proof.
    """
    d = channel.dim_in
    if d < 2:
        return float("inf")
    rng = np.random.default_rng(seed)
    cand = list(pairs or [])
    eye = np.eye(d, dtype=complex)
    cand += [(eye[i], eye[j]) for i in range(d) for j in range(d) if i != j]
    for _ in range(n_samples):
        z = rng.normal(size=(d, 2)) + 1j * rng.normal(size=(d, 2))
        q, _ = np.linalg.qr(z)
        cand.append((q[:, 0], q[:, 1]))

    def unpack(x):
        z = (x[: 2 * d] + 1j * x[2 * d :]).reshape(d, 2)
        q, r = np.linalg.qr(z)
        return q[:, 0], q[:, 1]

    def obj(x):
        phi, psi = unpack(x)
        return _pair_residual(channel, phi, psi) ** 2

    best = min(_pair_residual(channel, a, b) for a, b in cand)
    scored = sorted(cand, key=lambda ab: _pair_residual(channel, *ab))[:4]
    for a, b in scored:
        z = np.stack([a, b], axis=1).reshape(-1)
        x0 = np.concatenate([z.real, z.imag])
        res = minimize(obj, x0, method="BFGS", options={"gtol": 1e-12, "maxiter": 500})
        best = min(best, float(np.sqrt(max(res.fun, 0.0))))
    return best


def find_cq_degrading_map(channel: KrausChannel, basis=None, tol=None):
    """Degrading certificate for a channel that is c-q in ``basis`` with orthogonal outputs.

    Returns ``(representation, theta)`` where ``representation`` equals
    ``channel`` as a map (Choi distance within tolerance) and ``theta``
    degrades it, or ``None`` when the construction does not apply.
    """
    tol = get_tolerances().tol_channel if tol is None else tol
    d = channel.dim_in
    b = np.eye(d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    cq, _ = is_discrete_cq(channel, basis=b, tol=tol)
    if not cq:
        return None
    sigmas = [channel._apply(np.outer(b[:, k], b[:, k].conj())) for k in range(d)]
    try:
        theta = degrading_for_orthogonal_cq(sigmas)
    except NotApplicableError:
        return None
    rep = cq_channel(sigmas)
    if basis is not None:
        rep = KrausChannel(np.einsum("kbi,ji->kbj", rep.kraus, b.conj()), validate=False)
    if not channel.equals(rep, tol=max(tol, 1e-8)):
        return None
    if verify_degrading(channel, theta, tol=tol)[0]:
        return channel, theta
    return rep, theta


def capacity_gap(
    channel: KrausChannel,
    constraint: ConstraintSpec,
    degrading_map: KrausChannel | None = None,
    restarts: int = 16,
    seed: int = 0,
) -> dict:
    """Compare chi-capacity with entanglement-assisted capacity and test gap criteria.

    Conditions reported (any one that fires guarantees a strictly positive gap):

    ``transitive``
        no orthogonal pair ``phi, psi`` has ``Phi(|phi><psi|) = 0`` (sampled search).
    ``degradable_not_cq``
        certified degradable and not c-q in the eigenbasis of ``H``.
    ``degradable_eigen_coherence``
        certified degradable and some pair of ``H`` eigenvectors with
        different eigenvalues keeps a nonzero coherence.
    ``not_cq_full_rank_optimizer``
        not c-q in any tested basis and the chi-optimal average state is full rank.

    Only the computational basis, the eigenbasis of ``H`` and the eigenbasis
    of the chi-optimal average state are tested for the c-q property.
    """
    tols = get_tolerances()
    chi_res = chi_capacity(channel, constraint, restarts=restarts, seed=seed)
    ea_res = ea_capacity(channel, constraint)
    h = constraint.hamiltonian
    levels, evecs = eigh_desc(h)
    d = channel.dim_in

    eigen_pairs = [
        (evecs[:, i], evecs[:, j])
        for i in range(d)
        for j in range(d)
        if i != j and abs(levels[i] - levels[j]) > 1e-9
    ]
    coherence_min = min_coherence_residual(channel, seed=seed, pairs=eigen_pairs)
    eigen_coherence = max((_pair_residual(channel, a, b) for a, b in eigen_pairs), default=0.0)

    cq_h, cq_h_res = is_discrete_cq(channel, basis=evecs)
    cq_std, _ = is_discrete_cq(channel)
    rho_star = chi_res.average_state
    cq_opt, _ = is_discrete_cq(channel, basis=eigh_desc(rho_star)[1])
    cq_any = cq_h or cq_std or cq_opt

    degradable = False
    degrading_residual = None
    if degrading_map is not None:
        degradable, degrading_residual = verify_degrading(channel, degrading_map)
    else:
        for basis in (None, evecs):
            found = find_cq_degrading_map(channel, basis)
            if found is not None:
                degradable, degrading_residual = True, verify_degrading(*found)[1]
                break
    full_rank = bool(np.linalg.eigvalsh(rho_star)[0] > 1e-6)

    triggers = []
    if coherence_min > tols.tol_channel:
        triggers.append("transitive")
    if degradable and not cq_h:
        triggers.append("degradable_not_cq")
    if degradable and eigen_coherence > tols.tol_channel:
        triggers.append("degradable_eigen_coherence")
    if not cq_any and full_rank:
        triggers.append("not_cq_full_rank_optimizer")
    return {
        "chi_capacity": chi_res.value,
        "ea_capacity": ea_res.value,
        "gap": ea_res.value - chi_res.value,
        "triggered_conditions": triggers,
        "verdict": "gap>0 guaranteed" if triggers else "no conclusion",
        "discrete_cq_in_hamiltonian_basis": bool(cq_h),
        "cq_residual_hamiltonian_basis": float(cq_h_res),
        "min_coherence_residual": float(coherence_min),
        "max_eigen_coherence": float(eigen_coherence),
        "degradable": bool(degradable),
        "degrading_residual": degrading_residual,
        "optimizer_full_rank": full_rank,
        "chi_result": chi_res,
        "ea_result": ea_res,
    }
