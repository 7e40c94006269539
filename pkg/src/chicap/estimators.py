"""scikit-learn style wrappers around the capacity optimizers.

The "data" passed to ``fit`` is the channel itself, either a
:class:`~chicap.channels.KrausChannel` or a Kraus array. Hyperparameters
such as the energy constraint and restart count are constructor arguments,
so the estimators work with ``get_params``/``set_params``/``clone``::

    est = ChiCapacity(hamiltonian=np.diag([0, 1]), energy=0.2).fit(dephasing_channel())
    est.capacity_
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .capacity import ConstraintSpec, capacity_gap, chi_capacity, chi_function, ea_capacity
from .validation import ValidationError, check_channel, check_state_batch


def _constraint(est, dim):
    if est.hamiltonian is None and est.energy is None:
        return None
    if est.hamiltonian is None or est.energy is None:
        raise ValidationError("hamiltonian and energy must be given together")
    c = ConstraintSpec(np.asarray(est.hamiltonian), est.energy)
    if c.dim != dim:
        raise ValidationError(f"hamiltonian dimension {c.dim} != channel input {dim}")
    return c


class ChiCapacity(BaseEstimator):
    """Energy-constrained chi-capacity of a channel.

    Attributes
    ----------
    capacity_ : float
    ensemble_ : Ensemble
    multiplier_ : float
    certificate_ : OptimalityCertificate
    converged_ : bool
    """

    def __init__(self, hamiltonian=None, energy=None, restarts=16, random_state=0, max_iter=2000, n_probe=16):
        self.hamiltonian = hamiltonian
        self.energy = energy
        self.restarts = restarts
        self.random_state = random_state
        self.max_iter = max_iter
        self.n_probe = n_probe

    def fit(self, X, y=None):
        channel = check_channel(X)
        self.result_ = chi_capacity(
            channel,
            _constraint(self, channel.dim_in),
            restarts=self.restarts,
            seed=self.random_state,
            max_iter=self.max_iter,
            n_probe=self.n_probe,
        )
        self.capacity_ = self.result_.value
        self.ensemble_ = self.result_.optimizer
        self.multiplier_ = self.result_.multiplier
        self.certificate_ = self.result_.certificate
        self.converged_ = self.result_.converged
        self.n_iter_ = self.result_.iterations
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "capacity_")
        return self.capacity_


class EACapacity(BaseEstimator):
    """Entanglement-assisted capacity of a channel under an energy constraint."""

    def __init__(self, hamiltonian=None, energy=None, max_iter=5000, gap_tol=1e-9):
        self.hamiltonian = hamiltonian
        self.energy = energy
        self.max_iter = max_iter
        self.gap_tol = gap_tol

    def fit(self, X, y=None):
        channel = check_channel(X)
        self.result_ = ea_capacity(
            channel, _constraint(self, channel.dim_in), max_iter=self.max_iter, gap_tol=self.gap_tol
        )
        self.capacity_ = self.result_.value
        self.state_ = self.result_.optimizer
        self.multiplier_ = self.result_.multiplier
        self.converged_ = self.result_.converged
        self.n_iter_ = self.result_.iterations
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "capacity_")
        return self.capacity_


class CapacityGap(BaseEstimator):
    """Both capacities plus the sufficient conditions for a strict gap."""

    def __init__(self, hamiltonian=None, energy=None, degrading_map=None, restarts=16, random_state=0):
        self.hamiltonian = hamiltonian
        self.energy = energy
        self.degrading_map = degrading_map
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y=None):
        channel = check_channel(X)
        c = _constraint(self, channel.dim_in)
        if c is None:
            raise ValidationError("CapacityGap needs an energy constraint")
        self.report_ = capacity_gap(
            channel, c, degrading_map=self.degrading_map, restarts=self.restarts, seed=self.random_state
        )
        self.gap_ = self.report_["gap"]
        self.triggered_conditions_ = self.report_["triggered_conditions"]
        self.verdict_ = self.report_["verdict"]
        return self


class ChiFunction(BaseEstimator):
    """Chi-function ``rho -> sup chi(Phi(mu))`` over ensembles averaging to ``rho``.

    ``fit`` stores the channel; ``predict`` evaluates a batch of states.
    """

    def __init__(self, restarts=16, random_state=0):
        self.restarts = restarts
        self.random_state = random_state

    def fit(self, X, y=None):
        self.channel_ = check_channel(X)
        return self

    def predict(self, states):
        check_is_fitted(self, "channel_")
        states = check_state_batch(states, dim=self.channel_.dim_in)
        return np.array(
            [chi_function(self.channel_, s, restarts=self.restarts, seed=self.random_state).value for s in states]
        )


class ChannelTransformer(TransformerMixin, BaseEstimator):
    """Apply a channel (or its complementary channel) to a batch of states."""

    def __init__(self, channel=None, complementary=False):
        self.channel = channel
        self.complementary = complementary

    def fit(self, X=None, y=None):
        if self.channel is None:
            raise ValidationError("ChannelTransformer needs a channel")
        ch = check_channel(self.channel)
        self.channel_ = ch.complementary() if self.complementary else ch
        return self

    def transform(self, X):
        check_is_fitted(self, "channel_")
        states = check_state_batch(X, dim=self.channel_.dim_in)
        return np.array([self.channel_._apply(s) for s in states])
