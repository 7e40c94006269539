"""Matrix-level checks for centered Bosonic Gaussian channel parameters ``(K, alpha)``.

Phase-space coordinates are ordered ``(q_1, p_1, q_2, p_2, ...)``; ``K`` is
the ``2 s_A x 2 s_B`` matrix of the map ``Z_B -> Z_A``. The displacement
``l`` is stored but never used, since displacements do not change ``K`` or
``alpha``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from .validation import ValidationError

FULL_RANGE = "full-range-K"
ZERO_K = "zero-K/discrete-c-q"
DEGRADABLE = "degradable"
FULL_RANK_OPTIMIZER = "full-rank-optimizer"


def symplectic_form(modes: int) -> np.ndarray:
    """Canonical ``2s x 2s`` form, a direct sum of ``[[0, 1], [-1, 0]]`` blocks."""
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianChannelSpec:
    s_a: int
    s_b: int
    k: np.ndarray
    alpha: np.ndarray
    l: np.ndarray = field(default=None)
    degradable: bool = False

    def __post_init__(self):
        s_a, s_b = int(self.s_a), int(self.s_b)
        if s_a < 1 or s_b < 1:
            raise ValidationError("mode counts must be positive")
        k = np.asarray(self.k, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        if k.shape != (2 * s_a, 2 * s_b):
            raise ValidationError(f"K must have shape {(2 * s_a, 2 * s_b)}, got {k.shape}")
        if alpha.shape != (2 * s_b, 2 * s_b):
            raise ValidationError(f"alpha must have shape {(2 * s_b, 2 * s_b)}, got {alpha.shape}")
        if np.max(np.abs(alpha - alpha.T)) > get_tolerances().tol_herm:
            raise ValidationError("alpha must be symmetric")
        l = np.zeros(2 * s_b) if self.l is None else np.asarray(self.l, dtype=float).reshape(-1)
        if l.shape != (2 * s_b,):
            raise ValidationError(f"l must have length {2 * s_b}")
        object.__setattr__(self, "s_a", s_a)
        object.__setattr__(self, "s_b", s_b)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "alpha", (alpha + alpha.T) / 2)
        object.__setattr__(self, "l", l)

    @property
    def delta_a(self) -> np.ndarray:
        return symplectic_form(self.s_a)

    @property
    def delta_b(self) -> np.ndarray:
        return symplectic_form(self.s_b)

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianChannelSpec":
        return cls(
            data["s_A"],
            data["s_B"],
            np.asarray(data["K"], dtype=float),
            np.asarray(data["alpha"], dtype=float),
            data.get("l"),
            bool(data.get("degradable", False)),
        )

    def to_dict(self) -> dict:
        return {
            "s_A": self.s_a,
            "s_B": self.s_b,
            "K": self.k.tolist(),
            "alpha": self.alpha.tolist(),
            "l": self.l.tolist(),
            "degradable": self.degradable,
        }


def validate(spec: GaussianChannelSpec, tol=None) -> tuple[bool, tuple[float, float]]:
    """Check ``alpha >= +-(i/2)(Delta_B - K^T Delta_A K)``.

    Returns ``(valid, (min_eig_plus, min_eig_minus))`` for the two Hermitian
    matrices ``alpha -+ (i/2)(Delta_B - K^T Delta_A K)``.
    """
    tol = get_tolerances().tol_gauss_psd if tol is None else tol
    comm = spec.delta_b - spec.k.T @ spec.delta_a @ spec.k
    mins = []
    for sign in (1.0, -1.0):
        m = spec.alpha - sign * 0.5j * comm
        mins.append(float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0]))
    return all(v >= -tol for v in mins), (mins[0], mins[1])


def numerical_rank(k, tol=None) -> int:
    tol = get_tolerances().tol_rank if tol is None else tol
    k = np.asarray(k, dtype=float)
    if k.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(k, compute_uv=False) > tol))


def classify_gap(spec: GaussianChannelSpec, tol=None) -> dict:
    """Which sufficient conditions for a strictly positive capacity gap fire.

    ``full-range-K`` (rank K = 2 s_A) and the user-asserted ``degradable``
    flag each guarantee the gap. ``zero-K/discrete-c-q`` is reported but
    gives no guarantee. The full-rank-optimizer condition needs capacity
    data and is always listed as not evaluated.
    """
    tol = get_tolerances().tol_rank if tol is None else tol
    ok, mins = validate(spec)
    if not ok:
        raise ValidationError(f"invalid Gaussian channel parameters (min eigenvalues {mins})")
    rank = numerical_rank(spec.k, tol)
    triggers = []
    if rank == 2 * spec.s_a:
        triggers.append(FULL_RANGE)
    if np.linalg.norm(spec.k) <= tol:
        triggers.append(ZERO_K)
    if spec.degradable:
        triggers.append(DEGRADABLE)
    guaranteed = FULL_RANGE in triggers or DEGRADABLE in triggers
    return {
        "triggers": triggers,
        "verdict": "gap>0 guaranteed" if guaranteed else "no conclusion",
        "rank_k": rank,
        "dim_z_a": 2 * spec.s_a,
        "not_evaluated": [FULL_RANK_OPTIMIZER],
        "min_eigenvalues": list(mins),
    }
