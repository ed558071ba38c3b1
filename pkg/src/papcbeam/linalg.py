"""Small dense complex linear-algebra helpers shared by the solvers.

Everything here is deterministic: the power iteration starts from a fixed
vector and eigenvectors carry a canonical phase, so downstream solvers and
simulations reproduce bit-for-bit.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HermitianEigenResult",
    "dominant_eigenpair",
    "whitened_gram",
    "real_embedding",
]


@dataclass(frozen=True)
class HermitianEigenResult:
    """Largest eigenvalue and a unit-norm eigenvector with canonical phase."""

    value: float
    vector: np.ndarray


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the first non-negligible component is real positive."""
    mags = np.abs(v)
    idx = np.flatnonzero(mags > 1e-8 * mags.max())
    i0 = idx[0] if idx.size else 0
    phase = v[i0] / mags[i0] if mags[i0] > 0 else 1.0
    return v / phase


def dominant_eigenpair(A: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> HermitianEigenResult:
    """Dominant eigenpair of a Hermitian PSD matrix by power iteration.

    Starts from the normalized all-ones vector and stops once the residual
    ||A v - sigma v||_2 drops below ``tol * trace(A)``.  Matrices here are
    small (tens of rows), so simplicity and determinism beat sophistication.

    Raises ``ValueError`` if ``A`` is not Hermitian (relative asymmetry
    above 1e-10).  A zero matrix returns eigenvalue 0 with e_1.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    n = A.shape[0]
    scale = np.abs(A).max()
    if scale == 0.0:
        e1 = np.zeros(n, dtype=complex)
        e1[0] = 1.0
        return HermitianEigenResult(0.0, e1)
    if np.abs(A - A.conj().T).max() > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian within tolerance")

    trace = float(np.real(np.trace(A)))
    resid_tol = tol * max(trace, np.finfo(float).tiny)
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    sigma = 0.0
    for _ in range(max_iter):
        w = A @ v
        sigma = float(np.real(np.vdot(v, w)))
        if np.linalg.norm(w - sigma * v) <= resid_tol:
            break
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector lies in the null space; restart from e_1
            v = np.zeros(n, dtype=complex)
            v[0] = 1.0
            continue
        v = w / norm_w
    v = _canonical_phase(v)
    v /= np.linalg.norm(v)
    return HermitianEigenResult(max(sigma, 0.0), v)


def whitened_gram(H: np.ndarray, R_n: np.ndarray) -> np.ndarray:
    """H^H R_n^{-1} H for a diagonal noise covariance R_n.

    The result is symmetrized so it is Hermitian to the last bit.
    """
    H = np.asarray(H, dtype=complex)
    noise = np.real(np.diagonal(np.asarray(R_n))).astype(float)
    if noise.shape[0] != H.shape[0]:
        raise ValueError("noise covariance size does not match receiver count")
    if np.any(noise <= 0):
        raise ValueError("noise variances must be strictly positive")
    G = H.conj().T @ (H / noise[:, None])
    return 0.5 * (G + G.conj().T)


def real_embedding(x: np.ndarray) -> np.ndarray:
    """Map a complex vector / matrix to its real counterpart.

    Vectors map to [Re(x); Im(x)]; square matrices map to
    [[Re A, -Im A], [Im A, Re A]].  Quadratic forms are preserved:
    x~^T A~ x~ = Re(x^H A x), and the embedding is PSD iff A is.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        return np.concatenate([x.real, x.imag])
    if x.ndim == 2:
        return np.block([[x.real, -x.imag], [x.imag, x.real]])
    raise ValueError("expected a vector or a matrix")
