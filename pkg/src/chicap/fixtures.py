"""Named channels and ensembles used by the CLI and the test-suite."""
from __future__ import annotations

import numpy as np

from .channels import (
    KrausChannel,
    cq_channel,
    degrading_for_orthogonal_cq,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    random_channel,
)
from .ensembles import Ensemble

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)


def orthogonal_cq_sigmas() -> list[np.ndarray]:
    """Two qutrit outputs with orthogonal supports: a mixed block on {0,1} and |2>."""
    s0 = np.zeros((3, 3), dtype=complex)
    s0[:2, :2] = [[0.7, 0.2], [0.2, 0.3]]
    s1 = np.zeros((3, 3), dtype=complex)
    s1[2, 2] = 1.0
    return [s0, s1]


def orthogonal_cq_channel() -> tuple[KrausChannel, KrausChannel]:
    """The c-q channel of :func:`orthogonal_cq_sigmas` with its degrading map."""
    sigmas = orthogonal_cq_sigmas()
    return cq_channel(sigmas), degrading_for_orthogonal_cq(sigmas)


def channel_preset(name: str, dim: int = 2, seed: int = 0) -> KrausChannel:
    if name == "identity":
        return identity_channel(dim)
    if name == "dephasing":
        return dephasing_channel(dim)
    if name == "depolarizing":
        return depolarizing_channel(dim)
    if name == "cq":
        return orthogonal_cq_channel()[0]
    if name == "random":
        return random_channel(dim, dim, 2, seed)
    raise KeyError(f"unknown channel preset {name!r}")


CHANNEL_PRESETS = ("identity", "dephasing", "depolarizing", "cq", "random")


def ensemble_preset(name: str) -> Ensemble:
    if name == "zero-plus":
        return Ensemble.from_pure([0.5, 0.5], [KET0, PLUS])
    if name == "basis":
        return Ensemble.from_pure([0.5, 0.5], [KET0, KET1])
    if name == "single":
        return Ensemble.from_pure([1.0], [KET0])
    raise KeyError(f"unknown ensemble preset {name!r}")


ENSEMBLE_PRESETS = ("zero-plus", "basis", "single")
