"""Single-carrier MMSE and max-gain beamforming under per-antenna budgets.

The transmit-side subproblem (fixed combiner) is a convex QCQP whose
solution is available in closed form in three regimes of the effective
MISO channel ``g = H^H w``; outside those regimes a dual-ascent solver is
used.  Alternating the closed-form transmit update with the MMSE combiner
gives the Gauss-Seidel algorithms implemented at the bottom of the module.
"""

from dataclasses import dataclass, field

import numpy as np

from .constraints import PowerConstraints, p_norm, p_projection
from .linalg import dominant_eigenpair, whitened_gram

__all__ = [
    "LinkInstance",
    "BeamformerPair",
    "PrecoderSolution",
    "mse",
    "mmse_combiner",
    "resultant_mse",
    "unconstrained_precoder",
    "papc_mmse_precoder",
    "kkt_residuals",
    "shadow_prices",
    "miso_solution",
    "gauss_seidel_mmse",
    "gain",
    "mrc_combiner",
    "papc_maxgain_precoder",
    "gauss_seidel_maxgain",
]


@dataclass(frozen=True)
class LinkInstance:
    """One narrowband link: channel ``H`` (m x n), receiver noise variances
    (diagonal covariance, watts) and per-antenna transmit budgets."""

    H: np.ndarray
    noise: np.ndarray
    pc: PowerConstraints

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        noise = np.asarray(self.noise)
        if noise.ndim == 2:  # accept a full diagonal covariance matrix
            off = noise - np.diag(np.diagonal(noise))
            if np.abs(off).max() > 1e-12 * max(np.abs(noise).max(), 1.0):
                raise ValueError("noise covariance must be diagonal")
            noise = np.diagonal(noise)
        noise = np.real(noise).astype(float)
        if H.ndim != 2:
            raise ValueError("channel must be a 2-D matrix")
        if noise.shape != (H.shape[0],):
            raise ValueError("noise variance count must match receiver count")
        if np.any(noise <= 0) or not np.all(np.isfinite(noise)):
            raise ValueError("noise variances must be finite and > 0")
        if H.shape[1] != self.pc.n:
            raise ValueError("transmit antenna count must match budget count")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "noise", noise)

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def R_n(self) -> np.ndarray:
        return np.diag(self.noise).astype(complex)


@dataclass(frozen=True)
class BeamformerPair:
    """Transmit/receive weights with the objective trace of the solver that
    produced them.  ``mse`` is set by the MMSE solvers, ``gain`` by the
    max-gain solver."""

    z: np.ndarray
    w: np.ndarray
    mse: float | None
    trace: np.ndarray
    gain: float | None = None


@dataclass(frozen=True)
class PrecoderSolution:
    """Transmit weights with their Lagrange multipliers and the closed-form
    branch that produced them ('projection', 'scaled_inverse',
    'uniform_inverse' or 'dual')."""

    z: np.ndarray
    lam: np.ndarray
    which: str


def mse(z: np.ndarray, w: np.ndarray, link: LinkInstance) -> float:
    """Normalized symbol MSE |w^H H z - 1|^2 + w^H R_n w (unit symbol power)."""
    forward = np.vdot(w, link.H @ z)
    return float(abs(forward - 1.0) ** 2 + np.sum(link.noise * np.abs(w) ** 2))


def mmse_combiner(z: np.ndarray, link: LinkInstance) -> np.ndarray:
    """MSE-optimal receive weights for fixed transmit weights ``z``."""
    Hz = link.H @ z
    whitened = Hz / link.noise
    return whitened / (1.0 + float(np.real(np.vdot(Hz, whitened))))


def resultant_mse(z: np.ndarray, link: LinkInstance) -> float:
    """MSE achieved by ``z`` with its own MMSE combiner: 1/(1 + z^H A z)
    where A = H^H R_n^{-1} H."""
    Hz = link.H @ z
    return 1.0 / (1.0 + float(np.sum(np.abs(Hz) ** 2 / link.noise)))


def unconstrained_precoder(link: LinkInstance) -> np.ndarray:
    """MSE-optimal weights under a total power budget p_T (no per-antenna
    limits): the dominant whitened-channel eigenvector scaled to power p_T."""
    eig = dominant_eigenpair(whitened_gram(link.H, link.R_n))
    return np.sqrt(link.pc.p_total) * eig.vector


def kkt_residuals(z: np.ndarray, lam: np.ndarray, g: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Max-norm residuals of the four optimality condition groups for the
    transmit QCQP: [stationarity, primal feasibility, complementary
    slackness, dual feasibility]."""
    z = np.asarray(z, dtype=complex)
    lam = np.asarray(lam, dtype=float)
    g = np.asarray(g, dtype=complex)
    overlap = np.vdot(g, z)  # sum_k conj(g_k) z_k
    stationarity = np.abs(lam * z - g * (1.0 - overlap)).max()
    slack = np.abs(z) ** 2 - pc.p
    primal = max(0.0, float(slack.max()))
    comp = np.abs(lam * slack).max()
    dual = max(0.0, float((-lam).max()))
    return np.array([stationarity, primal, comp, dual])


def shadow_prices(g: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Marginal MSE reduction per watt of budget relaxation at the projected
    optimum: lambda_i = |g_i| p_i^{-1/2} (1 - ||g||_P).

    Only valid when the weighted-l1 norm of the effective MISO channel is
    at most one (the regime where the projection is optimal).
    """
    g = np.asarray(g, dtype=complex)
    norm_g = p_norm(g, pc)
    if norm_g > 1.0:
        raise ValueError("shadow prices require ||g||_P <= 1")
    return np.abs(g) / pc.sqrt_p * (1.0 - norm_g)


def papc_mmse_precoder(g: np.ndarray, pc: PowerConstraints) -> PrecoderSolution:
    """MSE-optimal transmit weights for a fixed combiner, i.e. minimize
    |g^H z|^2 - 2 Re(z^H g) subject to |z_i|^2 <= p_i.

    Dispatches on the effective MISO channel ``g``:

    * ``||g||_P <= 1``: project ``g`` onto the budget boundary; all
      constraints active, multipliers in closed form.
    * ``min_i |g_i| >= 1/sum_k sqrt(p_k)``: budget-weighted channel
      inversion; all constraints slack.
    * ``|g_i| >= 1/(n sqrt(p_i))`` for all i: uniform channel inversion;
      all constraints slack.
    * otherwise: projected dual ascent on the Lagrange multipliers
      (single-carrier case of the multicarrier solver).

    The returned point satisfies the optimality residuals of
    :func:`kkt_residuals` below 1e-8.
    """
    g = np.asarray(g, dtype=complex)
    if g.shape != (pc.n,):
        raise ValueError("effective channel length must match budget count")
    if not np.any(g):
        raise ValueError("zero effective channel carries no phase information")

    norm_g = p_norm(g, pc)
    if norm_g <= 1.0:
        z = p_projection(g, pc)
        lam = np.abs(g) / pc.sqrt_p * (1.0 - norm_g)
        return PrecoderSolution(z, lam, "projection")

    abs_g = np.abs(g)
    sum_sqrt_p = float(pc.sqrt_p.sum())
    if abs_g.min() >= 1.0 / sum_sqrt_p:
        z = pc.sqrt_p / (sum_sqrt_p * g.conj())
        return PrecoderSolution(z, np.zeros(pc.n), "scaled_inverse")

    n = pc.n
    if np.all(abs_g >= 1.0 / (n * pc.sqrt_p)):
        z = 1.0 / (n * g.conj())
        return PrecoderSolution(z, np.zeros(n), "uniform_inverse")

    from .multicarrier import solve_papc_precoders  # deferred: avoids import cycle

    Z, state = solve_papc_precoders(
        g[None, :], pc, max_dual_iterations=5000, grad_tol=1e-10 * pc.p_total
    )
    z = Z[0]
    lam = np.where(state.lam < 1e-8, 0.0, state.lam)

    # In this branch ||g||_P > 1, so the scaled boundary projection reaches
    # the unconstrained minimum g^H z = 1 strictly inside the budgets; it is
    # optimal with zero multipliers and repairs any truncation error left by
    # the dual ascent.
    def objective(zz: np.ndarray) -> float:
        u = np.vdot(g, zz)
        return float(abs(u) ** 2 - 2.0 * u.real)

    z_scaled = p_projection(g, pc) / norm_g
    if objective(z_scaled) <= objective(z):
        return PrecoderSolution(z_scaled, np.zeros(pc.n), "dual")
    return PrecoderSolution(z, lam, "dual")


def miso_solution(h: np.ndarray, sigma2: float, pc: PowerConstraints) -> BeamformerPair:
    """Jointly optimal weights for a single receive antenna (closed form).

    ``h`` is the length-n channel (row of the 1 x n matrix), ``sigma2`` the
    receiver noise variance.  The receive weight phase is pinned to zero.
    """
    h = np.asarray(h, dtype=complex)
    if not np.any(h):
        raise ValueError("zero channel")
    if sigma2 <= 0:
        raise ValueError("noise variance must be > 0")
    norm_h = p_norm(h, pc)
    w = np.array([norm_h / (sigma2 + norm_h**2)], dtype=complex)
    z = p_projection(h.conj(), pc)
    link = LinkInstance(h[None, :], np.array([sigma2]), pc)
    value = mse(z, w, link)
    return BeamformerPair(z, w, value, np.array([value]))


def gauss_seidel_mmse(link: LinkInstance, max_iter: int = 500, tol: float = 1e-10) -> BeamformerPair:
    """Alternate the boundary projection of the effective MISO channel with
    the MMSE combiner until the MSE stalls.

    Starts from the projected dominant whitened-channel eigenvector.  The
    trace holds the MSE (with a refreshed MMSE combiner) after each full
    cycle, entry 0 being the initialization; it is nonincreasing.
    """
    A = whitened_gram(link.H, link.R_n)
    z = p_projection(dominant_eigenpair(A).vector, link.pc)
    trace = [resultant_mse(z, link)]
    for _ in range(max_iter):
        w = mmse_combiner(z, link)
        z = p_projection(link.H.conj().T @ w, link.pc)
        trace.append(resultant_mse(z, link))
        if abs(trace[-2] - trace[-1]) < tol:
            break
    return BeamformerPair(z, mmse_combiner(z, link), trace[-1], np.array(trace))


# --- max-gain family (no noise model; objective is |w^H H z|^2) ---


def gain(z: np.ndarray, w: np.ndarray, H: np.ndarray) -> float:
    """Beamforming power gain |w^H H z|^2."""
    return float(abs(np.vdot(w, np.asarray(H) @ z)) ** 2)


def mrc_combiner(z: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Unit-norm maximum-ratio receive weights H z / ||H z||."""
    Hz = np.asarray(H, dtype=complex) @ z
    norm = np.linalg.norm(Hz)
    if norm == 0.0:
        raise ValueError("effective receive channel is zero")
    return Hz / norm


def papc_maxgain_precoder(w: np.ndarray, H: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Gain-optimal transmit weights for fixed ``w``: boundary projection of
    the effective MISO channel."""
    return p_projection(np.asarray(H, dtype=complex).conj().T @ w, pc)


def gauss_seidel_maxgain(H: np.ndarray, pc: PowerConstraints, max_iter: int = 500, tol: float = 1e-10) -> BeamformerPair:
    """Alternate the projected transmit update with MRC receive weights.

    Starts from the dominant left eigenvector of the channel; the trace
    holds the gain after each full cycle and is nondecreasing.
    """
    H = np.asarray(H, dtype=complex)
    if not np.any(H):
        raise ValueError("zero channel")
    w = dominant_eigenpair(H @ H.conj().T).vector
    trace = []
    z = None
    for _ in range(max_iter):
        z = papc_maxgain_precoder(w, H, pc)
        w = mrc_combiner(z, H)
        trace.append(gain(z, w, H))
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < tol:
            break
    return BeamformerPair(z, w, None, np.array(trace), gain=trace[-1])
