"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

import numpy as np

from ._config import get_tolerances


class ValidationError(ValueError):
    """Raised when an input fails a structural or physical check."""


class InfeasibleConstraintError(ValueError):
    """Energy bound at or below the minimal energy level."""


class NotApplicableError(ValueError):
    """A constructor's precondition does not hold for the given input."""


def check_square_matrix(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def check_hermitian(a, name="matrix", tol=None) -> np.ndarray:
    a = check_square_matrix(a, name)
    tol = get_tolerances().tol_herm if tol is None else tol
    err = np.max(np.abs(a - a.conj().T))
    if err > tol:
        raise ValidationError(f"{name} is not Hermitian (max deviation {err:.3e})")
    return (a + a.conj().T) / 2


def check_density_matrix(rho, name="state", dim=None) -> np.ndarray:
    """Return a Hermitian-symmetrized copy of ``rho`` or raise ``ValidationError``."""
    tols = get_tolerances()
    rho = check_hermitian(rho, name)
    if dim is not None and rho.shape[0] != dim:
        raise ValidationError(f"{name} has dimension {rho.shape[0]}, expected {dim}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tols.tol_trace:
        raise ValidationError(f"{name} has trace {tr!r}, expected 1")
    lmin = np.linalg.eigvalsh(rho)[0]
    if lmin < -tols.tol_psd:
        raise ValidationError(f"{name} is not positive semidefinite (min eigenvalue {lmin:.3e})")
    return rho


def check_pure_state(psi, name="vector", dim=None) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size == 0 or not np.all(np.isfinite(psi)):
        raise ValidationError(f"{name} must be a finite non-empty vector")
    if dim is not None and psi.size != dim:
        raise ValidationError(f"{name} has dimension {psi.size}, expected {dim}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > get_tolerances().tol_trace:
        raise ValidationError(f"{name} is not normalized (norm {norm!r})")
    return psi


def check_hamiltonian(h, name="hamiltonian") -> np.ndarray:
    h = check_hermitian(h, name)
    lmin = np.linalg.eigvalsh(h)[0]
    if lmin < -get_tolerances().tol_psd:
        raise ValidationError(f"{name} must be positive semidefinite (min eigenvalue {lmin:.3e})")
    return h


def check_dims(dims, total=None) -> tuple[int, int]:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2 or min(dims) < 1:
        raise ValidationError(f"bipartite dims must be two positive integers, got {dims}")
    if total is not None and dims[0] * dims[1] != total:
        raise ValidationError(f"dims {dims} do not multiply to state dimension {total}")
    return dims


def check_orthonormal_basis(basis, dim, name="basis") -> np.ndarray:
    """Columns of the returned ``dim x dim`` matrix are the basis vectors."""
    b = np.asarray(basis, dtype=complex)
    if b.shape != (dim, dim):
        raise ValidationError(f"{name} must be a {dim}x{dim} matrix of column vectors, got {b.shape}")
    err = np.max(np.abs(b.conj().T @ b - np.eye(dim)))
    if err > get_tolerances().tol_trace:
        raise ValidationError(f"{name} is not orthonormal (deviation {err:.3e})")
    return b


def check_channel(channel):
    """Accept a ``KrausChannel`` or an ``(n, d_out, d_in)`` Kraus array."""
    from .channels import KrausChannel

    if isinstance(channel, KrausChannel):
        return channel
    return KrausChannel(channel)


def check_state_batch(states, dim=None) -> np.ndarray:
    """Stack of density matrices with shape ``(n, d, d)``; a single matrix is promoted."""
    arr = np.asarray(states, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValidationError(f"expected an array of shape (n, d, d), got {arr.shape}")
    return np.array([check_density_matrix(s, f"states[{i}]", dim=dim) for i, s in enumerate(arr)])
