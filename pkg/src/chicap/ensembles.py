"""Finite ensembles of states and the chi-quantity family of functionals."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._config import get_tolerances
from .channels import KrausChannel
from .numerics import _entropy, _mutual_information, _relative_entropy, projector
from .validation import ValidationError, check_density_matrix, check_pure_state


class Ensemble:
    """Finite list of ``(weight, state)`` pairs.

    Weights below ``tol_weight`` are dropped and the rest renormalized;
    member order is the insertion order.
    """

    def __init__(self, weights, states, validate=True):
        tols = get_tolerances()
        w = np.asarray(weights, dtype=float).reshape(-1)
        st = np.asarray(states, dtype=complex)
        if st.ndim == 2:
            st = st[None]
        if w.size == 0 or st.ndim != 3 or st.shape[0] != w.size:
            raise ValidationError(f"need one state per weight, got {w.size} weights and states of shape {st.shape}")
        if validate:
            if np.any(w < -tols.tol_prob) or abs(w.sum() - 1.0) > tols.tol_prob:
                raise ValidationError(f"weights must be a probability vector (sum {w.sum()!r})")
            st = np.array([check_density_matrix(s, f"state[{i}]") for i, s in enumerate(st)])
        keep = w >= tols.tol_weight
        if not np.any(keep):
            raise ValidationError("all ensemble weights are negligible")
        w, st = w[keep], st[keep]
        w = w / w.sum()
        w.setflags(write=False)
        st.setflags(write=False)
        self._weights = w
        self._states = st

    @classmethod
    def from_pure(cls, weights, vectors, validate=True) -> "Ensemble":
        vecs = [check_pure_state(v) if validate else np.asarray(v, dtype=complex) for v in vectors]
        return cls(weights, [projector(v) for v in vecs], validate=validate)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def states(self) -> np.ndarray:
        return self._states

    @property
    def dim(self) -> int:
        return self._states.shape[1]

    def __len__(self):
        return self._weights.size

    def __iter__(self):
        return iter(zip(self._weights, self._states))

    def __repr__(self):
        return f"Ensemble(n_members={len(self)}, dim={self.dim})"

    def average_state(self) -> np.ndarray:
        rho = np.einsum("i,ijk->jk", self._weights, self._states)
        return (rho + rho.conj().T) / 2

    def is_pure(self, tol=1e-9) -> bool:
        return all(abs(np.trace(s @ s).real - 1.0) <= tol for s in self._states)

    def map(self, fn) -> "Ensemble":
        return Ensemble(self._weights, np.array([fn(s) for s in self._states]), validate=False)

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        return {"members": [{"weight": float(w), "state": matrix_to_json(s)} for w, s in self]}


def average_state(ensemble: Ensemble) -> np.ndarray:
    return check_density_matrix(ensemble.average_state(), "average state")


def _chi(ensemble: Ensemble) -> float:
    # entropy form H(avg) - sum p_i H(rho_i); exact in finite dimensions
    mix = sum(p * _entropy(s) for p, s in ensemble)
    return _entropy(ensemble.average_state()) - mix


def chi_quantity(ensemble: Ensemble, cross_check=True) -> float:
    """Holevo quantity ``sum_i p_i H(rho_i || avg)`` in nats.

    With ``cross_check`` the entropy form ``H(avg) - sum_i p_i H(rho_i)`` is
    evaluated too and a disagreement beyond 1e-8 raises ``ArithmeticError``.
    """
    avg = ensemble.average_state()
    value = float(sum(p * _relative_entropy(s, avg) for p, s in ensemble))
    if cross_check:
        other = _chi(ensemble)
        if abs(value - other) > 1e-8:
            raise ArithmeticError(f"chi formulas disagree: {value!r} vs {other!r}")
    return value


def image(channel: KrausChannel, ensemble: Ensemble) -> Ensemble:
    """Member-wise image; weights are unchanged."""
    if ensemble.dim != channel.dim_in:
        raise ValidationError(f"ensemble dimension {ensemble.dim} != channel input {channel.dim_in}")
    return ensemble.map(channel._apply)


def entropic_disturbance(channel: KrausChannel, ensemble: Ensemble) -> float:
    """Loss of chi-quantity ``chi(mu) - chi(Phi(mu))`` caused by the channel."""
    return _chi(ensemble) - _chi(image(channel, ensemble))


def disturbance_bound(channel: KrausChannel) -> float:
    """``min(ln d_A, 2 ln d_E)``, the largest possible entropic disturbance."""
    return float(min(np.log(channel.dim_in), 2 * np.log(channel.dim_env)))


class IdentityCheck(NamedTuple):
    chi_input: float
    mi_average: float
    chi_output: float
    chi_environment: float
    mi_members: float
    residual: float

    @property
    def lhs(self) -> float:
        return self.chi_input + self.mi_average

    @property
    def rhs(self) -> float:
        return self.chi_output + self.chi_environment + self.mi_members


def check_disturbance_identity(channel: KrausChannel, ensemble: Ensemble) -> IdentityCheck:
    """Evaluate both sides of the chi-balance across a Stinespring dilation.

    ``chi(mu) + I(B:E)[V avg V^dag] = chi(Phi(mu)) + chi(Phi^c(mu))
    + sum_i p_i I(B:E)[V rho_i V^dag]``. Every term is computed on its own;
    the residual is ``|lhs - rhs|``.
    """
    if ensemble.dim != channel.dim_in:
        raise ValidationError(f"ensemble dimension {ensemble.dim} != channel input {channel.dim_in}")
    iso = channel.stinespring()
    comp = channel.complementary()
    chi_in = _chi(ensemble)
    mi_avg = _mutual_information(iso.dilate(ensemble.average_state()), iso.dims)
    chi_out = _chi(image(channel, ensemble))
    chi_env = _chi(image(comp, ensemble))
    mi_members = float(sum(p * _mutual_information(iso.dilate(s), iso.dims) for p, s in ensemble))
    residual = abs(chi_in + mi_avg - chi_out - chi_env - mi_members)
    return IdentityCheck(chi_in, mi_avg, chi_out, chi_env, mi_members, residual)


class PrivateInformation(NamedTuple):
    value: float
    chi_output: float
    chi_environment: float


def private_information(channel: KrausChannel, ensemble: Ensemble) -> PrivateInformation:
    """``chi(Phi(mu)) - chi(Phi^c(mu))`` with both terms reported."""
    chi_out = _chi(image(channel, ensemble))
    chi_env = _chi(image(channel.complementary(), ensemble))
    return PrivateInformation(chi_out - chi_env, chi_out, chi_env)


def eigen_ensemble(rho) -> Ensemble:
    """Pure-state ensemble given by the spectral decomposition of ``rho``."""
    from .numerics import eigh_desc

    rho = check_density_matrix(rho)
    w, v = eigh_desc(rho)
    w = np.clip(w, 0.0, None)
    return Ensemble.from_pure(w / w.sum(), v.T, validate=False)


def random_ensemble(dim: int, n_members: int, rng=None, pure=False) -> Ensemble:
    from .numerics import random_density_matrix, random_pure_state

    rng = np.random.default_rng(rng)
    w = rng.dirichlet(np.ones(n_members))
    if pure:
        return Ensemble.from_pure(w, [random_pure_state(dim, rng) for _ in range(n_members)], validate=False)
    ranks = rng.integers(1, dim + 1, size=n_members)
    return Ensemble(w, [random_density_matrix(dim, rng, rank=int(r)) for r in ranks], validate=False)
