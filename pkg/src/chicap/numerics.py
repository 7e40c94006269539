"""State arithmetic and entropic functionals in nats.

States are plain ``numpy`` arrays: density matrices are ``(d, d)`` complex
arrays, pure states are ``(d,)`` unit vectors. Bipartite states carry their
factor dimensions ``(d_B, d_E)`` explicitly, ``B`` first.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from ._config import get_tolerances
from .validation import (
    InfeasibleConstraintError,
    ValidationError,
    check_density_matrix,
    check_dims,
    check_hamiltonian,
)

SUBSYSTEMS = ("B", "E")


def _spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues clipped below ``tol_eig`` and renormalized to unit sum."""
    w = np.linalg.eigvalsh(rho)
    w = np.where(w < get_tolerances().tol_eig, 0.0, w)
    s = w.sum()
    return w / s if s > 0 else w


def _entropy_of_spectrum(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(-np.sum(w * np.log(w))) + 0.0  # no negative zero


def _entropy(rho: np.ndarray) -> float:
    # Unvalidated; callers guarantee rho is a (possibly unnormalized) state.
    return _entropy_of_spectrum(_spectrum(rho))


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy ``-Tr rho ln rho`` in nats.

    Eigenvalues below ``tol_eig`` count as exact zeros and the remaining
    spectrum is renormalized.

    >>> round(von_neumann_entropy(np.diag([0.5, 0.5])), 6)
    0.693147
    """
    return _entropy(check_density_matrix(rho))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def logm_floor(a: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Natural log of a PSD Hermitian matrix with eigenvalues floored at ``floor``."""
    w, v = np.linalg.eigh(a)
    return (v * np.log(np.maximum(w, floor))) @ v.conj().T


def _relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    tols = get_tolerances()
    w_s, v_s = np.linalg.eigh(sigma)
    kernel = w_s <= tols.tol_eig
    # mass of rho leaking into the numerical kernel of sigma
    overlaps = np.real(np.einsum("ij,jk,ki->i", v_s.conj().T, rho, v_s))
    if np.sum(overlaps[kernel]) > tols.tol_supp:
        return float("inf")
    cross = float(np.sum(overlaps[~kernel] * np.log(w_s[~kernel])))
    value = -_entropy(rho) - cross
    return max(value, 0.0)


def relative_entropy(rho, sigma) -> float:
    """Quantum relative entropy ``H(rho||sigma)``; ``inf`` when supp rho is not inside supp sigma."""
    rho = check_density_matrix(rho, "rho")
    sigma = check_density_matrix(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValidationError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return _relative_entropy(rho, sigma)


def _partial_trace(state: np.ndarray, dims: tuple[int, int], keep) -> np.ndarray:
    d_b, d_e = dims
    t = state.reshape(d_b, d_e, d_b, d_e)
    if keep in ("B", 0):
        return np.einsum("ijkj->ik", t)
    if keep in ("E", 1):
        return np.einsum("ijil->jl", t)
    raise ValidationError(f"unknown subsystem label {keep!r}; expected one of {SUBSYSTEMS}")


def partial_trace(state, dims, keep="B") -> np.ndarray:
    """Reduced state of a bipartite density matrix on the factor ``keep``.

    ``dims`` is ``(d_B, d_E)`` and the state lives on ``B (x) E`` in that order.
    ``keep`` is ``"B"``/``0`` or ``"E"``/``1``.
    """
    state = np.asarray(state, dtype=complex)
    dims = check_dims(dims, state.shape[0] if state.ndim == 2 else None)
    if keep not in ("B", "E", 0, 1):
        raise ValidationError(f"unknown subsystem label {keep!r}; expected one of {SUBSYSTEMS}")
    state = check_density_matrix(state, "bipartite state")
    return _partial_trace(state, dims, keep)


def _mutual_information(state: np.ndarray, dims) -> float:
    h_b = _entropy(_partial_trace(state, dims, "B"))
    h_e = _entropy(_partial_trace(state, dims, "E"))
    return max(h_b + h_e - _entropy(state), 0.0)


def mutual_information(state, dims) -> float:
    """``I(B:E) = H(B) + H(E) - H(BE)`` in nats."""
    state = check_density_matrix(state, "bipartite state")
    dims = check_dims(dims, state.shape[0])
    return _mutual_information(state, dims)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-10)
        if idx.size:
            c = col[idx[0]]
            out[:, j] = col * (abs(c) / c)
    return out


def eigh_desc(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs sorted by descending eigenvalue with the deterministic phase convention."""
    w, v = np.linalg.eigh(rho)
    order = np.argsort(-w, kind="stable")
    return w[order], _fix_phases(v[:, order])


def purify(rho) -> np.ndarray:
    """Canonical purification ``sum_i sqrt(l_i) |e_i>|i>`` on ``A (x) R``.

    Eigenvalues are sorted in descending order so a pure input puts all of
    the reference weight on ``|0>``.
    """
    rho = check_density_matrix(rho)
    d = rho.shape[0]
    w, v = eigh_desc(rho)
    amps = np.sqrt(np.clip(w, 0.0, None))
    psi = np.zeros((d, d), dtype=complex)
    for i in range(d):
        psi[:, i] = amps[i] * v[:, i]
    psi = psi.reshape(-1)
    return psi / np.linalg.norm(psi)


def gibbs_state(hamiltonian, energy: float) -> tuple[np.ndarray, float]:
    """Maximum-entropy state under ``Tr H rho <= energy``.

    Returns ``(rho, lam)`` with ``rho = exp(-lam H) / Tr exp(-lam H)``. When
    the maximally mixed state already satisfies the bound, ``lam`` is exactly 0.

    Raises
    ------
    InfeasibleConstraintError
        If ``energy`` does not exceed the minimal eigenvalue of ``H``.
    """
    h = check_hamiltonian(hamiltonian)
    d = h.shape[0]
    levels, vecs = np.linalg.eigh(h)
    e_min = levels[0]
    if energy <= e_min:
        raise InfeasibleConstraintError(
            f"energy bound {energy!r} must exceed the minimal energy level {e_min!r}"
        )
    if energy >= levels.mean():
        return np.eye(d, dtype=complex) / d, 0.0
    shifted = levels - e_min

    def mean_energy(lam):
        b = np.exp(-lam * shifted)
        return float(np.dot(levels, b) / b.sum())

    hi = 1.0
    while mean_energy(hi) > energy:
        hi *= 2.0
        if hi > 1e12:
            break
    lam = brentq(lambda x: mean_energy(x) - energy, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    b = np.exp(-lam * shifted)
    rho = (vecs * (b / b.sum())) @ vecs.conj().T
    return (rho + rho.conj().T) / 2, float(lam)


def random_density_matrix(dim: int, rng=None, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed random state of the given rank (full rank by default)."""
    rng = np.random.default_rng(rng)
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return (rho + rho.conj().T) / 2


def random_pure_state(dim: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def trace_distance(rho, sigma) -> float:
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma)))))
