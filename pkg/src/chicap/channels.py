"""Quantum channels in Kraus form.

A :class:`KrausChannel` stores an array of Kraus operators with shape
``(n, d_out, d_in)``. Linearly dependent Kraus families are reduced on
construction so that ``n`` always equals the Choi rank, which makes the
environment dimension of the Stinespring dilation canonical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._config import get_tolerances
from .numerics import _partial_trace, eigh_desc
from .validation import (
    NotApplicableError,
    ValidationError,
    check_density_matrix,
    check_hamiltonian,
    check_orthonormal_basis,
    check_square_matrix,
)


def _reduce_kraus(ops: np.ndarray, threshold: float) -> np.ndarray:
    n, d_out, d_in = ops.shape
    flat = ops.reshape(n, -1)
    gram = flat.conj() @ flat.T  # gram[i, j] = <K_i, K_j>
    w, u = np.linalg.eigh(gram)
    if np.all(w > threshold):
        return ops
    # Choi-matrix eigendecomposition written in the Kraus coordinates
    keep = w > threshold
    new = (u[:, keep].T @ flat) / 1.0
    order = np.argsort(-w[keep], kind="stable")
    return new[order].reshape(-1, d_out, d_in)


class KrausChannel:
    """Completely positive trace-preserving map ``rho -> sum_i K_i rho K_i^dag``.

    Parameters
    ----------
    kraus_ops : array_like, shape (n, d_out, d_in)
    validate : bool
        Check trace preservation against ``tol_tp``.
    """

    def __init__(self, kraus_ops, validate=True):
        try:
            ops = np.asarray(kraus_ops, dtype=complex)
        except ValueError as exc:
            raise ValidationError("Kraus operators must all share one shape") from exc
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] == 0 or 0 in ops.shape:
            raise ValidationError(f"Kraus operators must have shape (n, d_out, d_in), got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise ValidationError("Kraus operators have non-finite entries")
        if validate:
            err = np.linalg.norm(self._tp_defect(ops))
            if err > get_tolerances().tol_tp:
                raise ValidationError(f"Kraus family is not trace preserving (defect {err:.3e})")
        ops = _reduce_kraus(ops, get_tolerances().tol_kraus_rank)
        ops.setflags(write=False)
        self._ops = ops

    @staticmethod
    def _tp_defect(ops):
        return np.einsum("kji,kjl->il", ops.conj(), ops) - np.eye(ops.shape[2])

    @property
    def kraus(self) -> np.ndarray:
        return self._ops

    @property
    def dim_in(self) -> int:
        return self._ops.shape[2]

    @property
    def dim_out(self) -> int:
        return self._ops.shape[1]

    @property
    def dim_env(self) -> int:
        return self._ops.shape[0]

    def __repr__(self):
        return f"KrausChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, dim_env={self.dim_env})"

    def tp_defect(self) -> float:
        return float(np.linalg.norm(self._tp_defect(self._ops)))

    def _apply(self, x: np.ndarray) -> np.ndarray:
        k = self._ops
        return np.einsum("kij,jl,kml->im", k, x, k.conj())

    def apply_operator(self, x) -> np.ndarray:
        """Action on an arbitrary ``d_in x d_in`` operator (no state validation)."""
        x = check_square_matrix(x, "operator")
        if x.shape[0] != self.dim_in:
            raise ValidationError(f"operator dimension {x.shape[0]} != channel input {self.dim_in}")
        return self._apply(x)

    def apply(self, rho) -> np.ndarray:
        rho = check_density_matrix(rho, dim=self.dim_in)
        out = self._apply(rho)
        return check_density_matrix(out, "channel output")

    __call__ = apply

    def adjoint(self, y) -> np.ndarray:
        """Heisenberg-picture map ``Y -> sum_i K_i^dag Y K_i``."""
        k = self._ops
        return np.einsum("kji,jl,klm->im", k.conj(), np.asarray(y, dtype=complex), k)

    def choi(self) -> np.ndarray:
        """Choi matrix ``sum_ij |i><j| (x) Phi(|i><j|)`` on ``A (x) B``."""
        d_in, d_out = self.dim_in, self.dim_out
        vecs = np.transpose(self._ops, (0, 2, 1)).reshape(self.dim_env, d_in * d_out)
        return vecs.T @ vecs.conj()

    def stinespring(self) -> "StinespringIsometry":
        return StinespringIsometry.from_channel(self)

    def complementary(self) -> "KrausChannel":
        """Environment-side channel ``rho -> Tr_B V rho V^dag``."""
        return KrausChannel(np.transpose(self._ops, (1, 0, 2)), validate=False)

    def compose(self, first: "KrausChannel") -> "KrausChannel":
        """The channel ``self o first``."""
        if first.dim_out != self.dim_in:
            raise ValidationError(f"cannot compose: {first.dim_out} != {self.dim_in}")
        ops = np.einsum("aij,bjk->abik", self._ops, first.kraus)
        return KrausChannel(ops.reshape(-1, self.dim_out, first.dim_in), validate=False)

    def distance(self, other: "KrausChannel") -> float:
        """Frobenius distance between Choi matrices; the notion of channel equality used here."""
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            return float("inf")
        return float(np.linalg.norm(self.choi() - other.choi()))

    def equals(self, other: "KrausChannel", tol=None) -> bool:
        tol = get_tolerances().tol_channel if tol is None else tol
        return self.distance(other) <= tol

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        return {
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "kraus": [matrix_to_json(k) for k in self._ops],
        }


@dataclass(frozen=True)
class StinespringIsometry:
    """Isometry ``V: A -> B (x) E`` with ``V|psi> = sum_i K_i|psi> (x) |i>``."""

    d_a: int
    d_b: int
    d_e: int
    matrix: np.ndarray

    @classmethod
    def from_channel(cls, channel: KrausChannel) -> "StinespringIsometry":
        k = channel.kraus
        v = np.transpose(k, (1, 0, 2)).reshape(channel.dim_out * channel.dim_env, channel.dim_in)
        return cls(channel.dim_in, channel.dim_out, channel.dim_env, v)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d_b, self.d_e)

    def isometry_defect(self) -> float:
        v = self.matrix
        return float(np.linalg.norm(v.conj().T @ v - np.eye(self.d_a)))

    def dilate(self, rho) -> np.ndarray:
        """``V rho V^dag`` on ``B (x) E``."""
        v = self.matrix
        return v @ np.asarray(rho, dtype=complex) @ v.conj().T

    def output(self, rho) -> np.ndarray:
        return _partial_trace(self.dilate(rho), self.dims, "B")

    def environment(self, rho) -> np.ndarray:
        return _partial_trace(self.dilate(rho), self.dims, "E")


def stinespring(channel: KrausChannel) -> StinespringIsometry:
    return channel.stinespring()


def complementary(channel: KrausChannel) -> KrausChannel:
    return channel.complementary()


def apply(channel: KrausChannel, rho) -> np.ndarray:
    return channel.apply(rho)


# -- constructors ---------------------------------------------------------


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(np.eye(dim)[None])


def unitary_channel(u) -> KrausChannel:
    u = check_square_matrix(u, "unitary")
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) > get_tolerances().tol_tp:
        raise ValidationError("matrix is not unitary")
    return KrausChannel(u[None])


def dephasing_channel(dim: int = 2) -> KrausChannel:
    """Completely dephasing channel in the computational basis."""
    ops = np.zeros((dim, dim, dim))
    for k in range(dim):
        ops[k, k, k] = 1.0
    return KrausChannel(ops)


def depolarizing_channel(dim: int = 2, dim_out: int | None = None, sigma=None) -> KrausChannel:
    """Completely depolarizing channel ``rho -> Tr(rho) sigma`` (``sigma = I/d`` by default)."""
    dim_out = dim if dim_out is None else dim_out
    sigma = np.eye(dim_out) / dim_out if sigma is None else check_density_matrix(sigma)
    return cq_channel([sigma] * dim)


def trace_channel(dim: int) -> KrausChannel:
    """The map ``X -> Tr X`` onto a one-dimensional output."""
    return KrausChannel(np.eye(dim)[:, None, :])


def random_channel(dim_in: int, dim_out: int, n_kraus: int, rng=None) -> KrausChannel:
    """Kraus family cut from a Haar-like random isometry ``A -> B (x) E``."""
    if dim_out * n_kraus < dim_in:
        raise ValidationError(f"an isometry needs dim_out * n_kraus >= dim_in, got {dim_out} * {n_kraus} < {dim_in}")
    rng = np.random.default_rng(rng)
    g = rng.normal(size=(dim_out * n_kraus, dim_in)) + 1j * rng.normal(size=(dim_out * n_kraus, dim_in))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    ops = q.reshape(dim_out, n_kraus, dim_in).transpose(1, 0, 2)
    return KrausChannel(ops)


def _eig_components(sigma, threshold):
    w, v = eigh_desc(sigma)
    keep = w > threshold
    return w[keep], v[:, keep]


def cq_channel(sigmas) -> KrausChannel:
    """Discrete classical-quantum channel ``rho -> sum_k <k|rho|k> sigma_k``.

    Kraus operators are ``sqrt(s_m) |v_m><k|`` for the eigenpairs of each
    ``sigma_k``, ordered by ``k`` then by descending eigenvalue.
    """
    sigmas = [check_density_matrix(s, f"sigma[{i}]") for i, s in enumerate(sigmas)]
    if not sigmas:
        raise ValidationError("need at least one output state")
    d_in, d_out = len(sigmas), sigmas[0].shape[0]
    if any(s.shape[0] != d_out for s in sigmas):
        raise ValidationError("all sigma_k must share one output dimension")
    ops = []
    for k, s in enumerate(sigmas):
        w, v = _eig_components(s, get_tolerances().tol_kraus_rank)
        for m in range(w.size):
            op = np.zeros((d_out, d_in), dtype=complex)
            op[:, k] = np.sqrt(w[m]) * v[:, m]
            ops.append(op)
    return KrausChannel(np.array(ops))


def truncation_channel(proj, sigma) -> KrausChannel:
    """``rho -> P rho P + sigma Tr((I - P) rho)`` with ``sigma`` supported in range(P)."""
    tols = get_tolerances()
    p = check_square_matrix(proj, "projector")
    d = p.shape[0]
    if np.linalg.norm(p - p.conj().T) > tols.tol_herm or np.linalg.norm(p @ p - p) > tols.tol_herm:
        raise ValidationError("projector must be a Hermitian idempotent")
    sigma = check_density_matrix(sigma, "anchor state", dim=d)
    comp = np.eye(d) - p
    leak = float(np.trace(comp @ sigma).real)
    if leak > tols.tol_supp:
        raise ValidationError(f"anchor state leaks {leak:.3e} outside range(P)")
    ops = [p]
    w, v = np.linalg.eigh(comp)
    f = v[:, w > 0.5]
    s_w, s_v = _eig_components(sigma, tols.tol_kraus_rank)
    for j in range(f.shape[1]):
        for m in range(s_w.size):
            ops.append(np.sqrt(s_w[m]) * np.outer(s_v[:, m], f[:, j].conj()))
    return KrausChannel(np.array(ops))


# -- classifiers ----------------------------------------------------------


def is_discrete_cq(channel: KrausChannel, basis=None, hamiltonian=None, tol=None) -> tuple[bool, float]:
    """Test whether ``channel`` kills every coherence ``|k><k'|`` of a basis.

    The basis is ``basis`` (columns) if given, else the eigenbasis of
    ``hamiltonian``, else the computational basis. No other basis is tried.

    Returns ``(is_cq, max_residual)`` with the residual measured in Frobenius norm.
    """
    tol = get_tolerances().tol_channel if tol is None else tol
    d = channel.dim_in
    if basis is not None:
        b = check_orthonormal_basis(basis, d)
    elif hamiltonian is not None:
        h = check_hamiltonian(hamiltonian)
        b = eigh_desc(h)[1]
    else:
        b = np.eye(d, dtype=complex)
    residual = 0.0
    for k in range(d):
        for kp in range(d):
            if k != kp:
                out = channel._apply(np.outer(b[:, k], b[:, kp].conj()))
                residual = max(residual, float(np.linalg.norm(out)))
    return residual <= tol, residual


def verify_degrading(channel: KrausChannel, theta: KrausChannel, tol=None) -> tuple[bool, float]:
    """Check the certificate ``complementary(channel) == theta o channel``.

    The residual is the largest Frobenius mismatch over matrix units
    ``|i><j|`` of the input space; ``theta`` must also be trace preserving.
    """
    tol = get_tolerances().tol_channel if tol is None else tol
    comp = channel.complementary()
    if theta.dim_in != channel.dim_out or theta.dim_out != comp.dim_out:
        raise ValidationError(
            f"degrading map must act {channel.dim_out} -> {comp.dim_out}, "
            f"got {theta.dim_in} -> {theta.dim_out}"
        )
    residual = theta.tp_defect()
    d = channel.dim_in
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            diff = theta._apply(channel._apply(e)) - comp._apply(e)
            residual = max(residual, float(np.linalg.norm(diff)))
    return residual <= tol, residual


def degrading_for_orthogonal_cq(sigmas) -> KrausChannel:
    """Degrading map for ``cq_channel(sigmas)`` when the ``sigma_k`` have orthogonal supports.

    The map measures each output in the eigenbasis of the ``sigma_k`` whose
    support it falls in and writes the matching environment letter; the
    part of the output space outside every support goes to letter 0.
    """
    tols = get_tolerances()
    sigmas = [check_density_matrix(s, f"sigma[{i}]") for i, s in enumerate(sigmas)]
    for j in range(len(sigmas)):
        for k in range(j + 1, len(sigmas)):
            overlap = float(np.trace(sigmas[j] @ sigmas[k]).real)
            if overlap > tols.tol_supp:
                raise NotApplicableError(
                    f"sigma[{j}] and sigma[{k}] overlap (Tr s_j s_k = {overlap:.3e})"
                )
    d_out = sigmas[0].shape[0]
    vecs = []
    for s in sigmas:
        w, v = _eig_components(s, tols.tol_kraus_rank)
        vecs.extend(v.T)
    d_env = len(vecs)
    ops = []
    for letter, vec in enumerate(vecs):
        op = np.zeros((d_env, d_out), dtype=complex)
        op[letter] = vec.conj()
        ops.append(op)
    covered = np.array(vecs).T
    comp = np.eye(d_out) - covered @ covered.conj().T
    w, v = np.linalg.eigh(comp)
    for col in v[:, w > 0.5].T:
        op = np.zeros((d_env, d_out), dtype=complex)
        op[0] = col.conj()
        ops.append(op)
    return KrausChannel(np.array(ops))


def tensor_channel(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """``first (x) second`` acting on the ordered product of their inputs."""
    ops = np.einsum("aij,bkl->abikjl", first.kraus, second.kraus)
    n = first.dim_env * second.dim_env
    return KrausChannel(
        ops.reshape(n, first.dim_out * second.dim_out, first.dim_in * second.dim_in), validate=False
    )


def choi_rank(channel: KrausChannel, threshold: float = 1e-10) -> int:
    return int(np.sum(np.linalg.eigvalsh(channel.choi()) > threshold))


PRESETS = {
    "identity": identity_channel,
    "dephasing": dephasing_channel,
    "depolarizing": depolarizing_channel,
}
