import numpy as np
import pytest
from sklearn.base import clone

from chicap.channels import dephasing_channel, identity_channel
from chicap.estimators import CapacityGap, ChannelTransformer, ChiCapacity, ChiFunction, EACapacity
from chicap.validation import ValidationError
from oracles import binary_entropy, random_state

H01 = np.diag([0.0, 1.0])


def test_get_params_and_clone():
    est = ChiCapacity(hamiltonian=H01, energy=0.2, restarts=3)
    params = est.get_params()
    assert params["energy"] == 0.2 and params["restarts"] == 3
    twin = clone(est)
    assert twin.get_params()["restarts"] == 3
    assert not hasattr(twin, "capacity_")
    est.set_params(restarts=5)
    assert est.restarts == 5


def test_chi_capacity_estimator():
    est = ChiCapacity(hamiltonian=H01, energy=0.2, restarts=3).fit(dephasing_channel())
    assert abs(est.capacity_ - binary_entropy(0.2)) < 1e-6
    assert est.converged_ and est.certificate_.passed
    assert est.score() == est.capacity_


def test_fit_accepts_kraus_arrays():
    est = EACapacity(hamiltonian=H01, energy=0.2).fit(np.eye(2)[None])
    assert abs(est.capacity_ - 2 * binary_entropy(0.2)) < 1e-6


def test_gap_estimator():
    est = CapacityGap(hamiltonian=H01, energy=0.2, restarts=3).fit(identity_channel(2))
    assert abs(est.gap_ - binary_entropy(0.2)) < 2e-4
    assert "transitive" in est.triggered_conditions_
    with pytest.raises(ValidationError):
        CapacityGap().fit(identity_channel(2))


def test_chi_function_predict(rng):
    est = ChiFunction(restarts=3).fit(dephasing_channel())
    vals = est.predict(np.array([np.diag([0.8, 0.2]), np.eye(2) / 2]))
    assert np.allclose(vals, [binary_entropy(0.2), np.log(2)], atol=1e-6)


def test_transformer(rng):
    states = np.array([random_state(2, rng) for _ in range(4)])
    out = ChannelTransformer(channel=dephasing_channel()).fit_transform(states)
    assert np.allclose(out[:, 0, 1], 0)
    env = ChannelTransformer(channel=identity_channel(2), complementary=True).fit_transform(states)
    assert env.shape == (4, 1, 1)


def test_input_validation():
    with pytest.raises(ValidationError):
        ChiCapacity(hamiltonian=np.eye(3), energy=2.0).fit(dephasing_channel())
    with pytest.raises(ValidationError):
        ChiCapacity(energy=0.2).fit(dephasing_channel())
    with pytest.raises(ValidationError):
        ChannelTransformer(channel=dephasing_channel()).fit().transform(np.eye(3)[None] / 3)
    with pytest.raises(ValidationError):
        ChiCapacity().fit(np.ones((2, 2, 2)))
