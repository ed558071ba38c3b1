"""Multicarrier sum-MSE precoder design under per-antenna total-power budgets.

The transmit subproblem couples carriers only through the per-antenna power
sums, so it is solved in the dual: the multipliers live on the nonnegative
orthant (trivial projection), the dual is concave and differentiable on the
interior, and the primal precoders fall out of the Lagrangian minimizers.
The cyclic designer alternates that solver with per-carrier MMSE combiners.
Also implements the comparison precoders (projected eigenvector, per-carrier
cyclic, total-power bound, naive rescaling) used by the experiment harness.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .constraints import PowerConstraints, multicarrier_margins
from .linalg import dominant_eigenpair, whitened_gram
from .single_carrier import LinkInstance, gauss_seidel_mmse

__all__ = [
    "MultiCarrierLink",
    "DualState",
    "MultiCarrierSolution",
    "dual_value",
    "lagrangian_minimizers",
    "dual_gradient",
    "solve_papc_precoders",
    "precoder_objective",
    "stationarity_multipliers",
    "cyclic_multicarrier",
    "mmse_combiners",
    "per_carrier_mse",
    "whitened_eigenpairs",
    "projected_eigenvector_precoders",
    "percarrier_cyclic_precoders",
    "total_power_precoders",
    "naive_scaled_precoders",
    "violation_stats",
]

#: Multipliers are kept at or above this floor so the dual stays inside its
#: differentiable region; values this small are reported as inactive.
LAMBDA_FLOOR = 1e-12

_ARMIJO_C = 1e-4
_MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class MultiCarrierLink:
    """K per-carrier channels (K, m, n) sharing one diagonal noise covariance
    (frequency-flat) and one set of per-antenna transmit budgets."""

    channels: np.ndarray
    noise: np.ndarray
    pc: PowerConstraints

    def __post_init__(self):
        H = np.asarray(self.channels, dtype=complex)
        noise = np.asarray(self.noise)
        if noise.ndim == 2:
            noise = np.diagonal(noise)
        noise = np.real(noise).astype(float)
        if H.ndim != 3 or H.shape[0] < 1:
            raise ValueError("channels must be a (K, m, n) array with K >= 1")
        if noise.shape != (H.shape[1],):
            raise ValueError("noise variance count must match receiver count")
        if np.any(noise <= 0):
            raise ValueError("noise variances must be > 0")
        if H.shape[2] != self.pc.n:
            raise ValueError("transmit antenna count must match budget count")
        object.__setattr__(self, "channels", H)
        object.__setattr__(self, "noise", noise)

    @property
    def K(self) -> int:
        return self.channels.shape[0]

    @property
    def m(self) -> int:
        return self.channels.shape[1]

    @property
    def n(self) -> int:
        return self.channels.shape[2]

    def carrier(self, k: int, pc: PowerConstraints | None = None) -> LinkInstance:
        """Single-carrier view of carrier ``k`` (optionally with rescaled budgets)."""
        return LinkInstance(self.channels[k], self.noise, pc if pc is not None else self.pc)


@dataclass(frozen=True)
class DualState:
    """Final state of the dual ascent: multipliers, dual value/gradient, the
    (pre-repair) Lagrangian-minimizing precoders and the effective MISO
    channels the solve was run against."""

    lam: np.ndarray
    value: float
    gradient: np.ndarray
    Z: np.ndarray
    G: np.ndarray
    iterations: int
    converged: bool
    pre_repair_margins: np.ndarray

    def stationarity_residual(self) -> float:
        """Max-norm residual of (g_k g_k^H + diag(lam)) z_k = g_k."""
        u = np.einsum("ki,ki->k", self.G.conj(), self.Z)
        return float(np.abs(self.lam * self.Z + self.G * u[:, None] - self.G).max())


@dataclass(frozen=True)
class MultiCarrierSolution:
    """Joint precoder/combiner design output: (K, n) transmit weights,
    (K, m) receive weights, MSE metrics and the per-cycle sum-MSE trace."""

    Z: np.ndarray
    W: np.ndarray
    sum_mse: float
    per_carrier_mse: np.ndarray
    dual_gap: float
    trace: np.ndarray
    dual_state: DualState


def _as_channel_array(G: np.ndarray) -> np.ndarray:
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2:
        raise ValueError("expected a (K, n) array of effective MISO channels")
    return G


def dual_value(lam: np.ndarray, G: np.ndarray, pc: PowerConstraints) -> float:
    """Dual function of the multicarrier transmit QCQP.

    Interior multipliers use the closed form
    -sum_k s_k/(1+s_k) - lam^T p with s_k = g_k^H diag(lam)^{-1} g_k; on the
    boundary of the orthant the infimum collapses to -K - lam^T p.
    """
    lam = np.asarray(lam, dtype=float)
    G = _as_channel_array(G)
    if np.any(lam < 0):
        raise ValueError("multipliers must be nonnegative")
    K = G.shape[0]
    if np.any(lam == 0):
        return float(-K - lam @ pc.p)
    s = (np.abs(G) ** 2) @ (1.0 / lam)
    return float(-np.sum(s / (1.0 + s)) - lam @ pc.p)


def lagrangian_minimizers(lam: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Precoders minimizing the Lagrangian at multipliers ``lam``.

    Interior: z_k = diag(lam)^{-1} g_k / (1 + g_k^H diag(lam)^{-1} g_k).
    Boundary (some lam_q = 0): the single-antenna minimizer
    z_k = e_q / conj(g_{k,q}) on the first zero-multiplier antenna with a
    nonzero channel.  Either way (g_k g_k^H + diag(lam)) z_k = g_k.
    """
    lam = np.asarray(lam, dtype=float)
    G = _as_channel_array(G)
    if np.any(lam < 0):
        raise ValueError("multipliers must be nonnegative")
    K, n = G.shape
    zero_idx = np.flatnonzero(lam == 0)
    if zero_idx.size == 0:
        s = (np.abs(G) ** 2) @ (1.0 / lam)
        return (G / lam) / (1.0 + s)[:, None]
    Z = np.zeros((K, n), dtype=complex)
    for k in range(K):
        usable = zero_idx[G[k, zero_idx] != 0]
        if usable.size == 0:
            raise ValueError(
                "no closed-form Lagrangian minimizer: every zero-multiplier "
                "antenna has a zero channel on some carrier"
            )
        q = usable[0]
        Z[k, q] = 1.0 / G[k, q].conj()
    return Z


def dual_gradient(lam: np.ndarray, G: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Gradient of the dual on the interior: per-antenna power of the
    Lagrangian minimizers minus the budgets (unavailable on the boundary,
    where the dual is not differentiable)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("dual gradient requires strictly positive multipliers")
    Z = lagrangian_minimizers(lam, _as_channel_array(G))
    return np.sum(np.abs(Z) ** 2, axis=0) - pc.p


def precoder_objective(Z: np.ndarray, G: np.ndarray) -> float:
    """Transmit-side objective sum_k |g_k^H z_k|^2 - 2 Re(z_k^H g_k)
    (the per-carrier MSE minus the combiner-dependent constant)."""
    Z = np.asarray(Z, dtype=complex)
    G = _as_channel_array(G)
    u = np.einsum("ki,ki->k", G.conj(), Z)
    return float(np.sum(np.abs(u) ** 2 - 2.0 * u.real))


def _scale_overbudget_antennas(Z: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Scale each antenna in violation (equally across carriers) so the
    budget is met with equality; feasible antennas are untouched."""
    totals = np.sum(np.abs(Z) ** 2, axis=0)
    factor = np.ones(pc.n)
    over = totals > pc.p
    factor[over] = np.sqrt(pc.p[over] / totals[over])
    return Z * factor


def solve_papc_precoders(
    G: np.ndarray,
    pc: PowerConstraints,
    lambda0: np.ndarray | None = None,
    max_dual_iterations: int = 200,
    grad_tol: float | None = None,
) -> tuple[np.ndarray, DualState]:
    """Optimal multicarrier transmit weights for fixed combiners.

    Runs projected gradient ascent (Armijo backtracking from unit step) on
    the dual over the floor-clipped orthant, then recovers the primal
    precoders from the Lagrangian minimizers at the final multipliers.
    Antennas left marginally over budget by the truncated ascent are
    rescaled onto it; the pre-repair margins are kept for diagnostics.

    Returns the feasible (K, n) precoders and the final :class:`DualState`.
    """
    G = _as_channel_array(G)
    if not np.any(G):
        raise ValueError("all effective channels are zero")
    if grad_tol is None:
        grad_tol = 1e-9 * pc.p_total
    if lambda0 is None:
        lambda0 = np.full(pc.n, G.shape[0] / pc.p_total)
    lam0 = np.maximum(np.asarray(lambda0, dtype=float), LAMBDA_FLOOR)

    gain_sq = np.ascontiguousarray(np.abs(G) ** 2)
    lam, value, grad, iterations, converged = backend.solve_dual(
        gain_sq, pc.p, lam0, max_dual_iterations, grad_tol, LAMBDA_FLOOR,
        _ARMIJO_C, _MAX_BACKTRACKS,
    )
    Z_min = lagrangian_minimizers(lam, G)
    margins = multicarrier_margins(Z_min, pc)
    Z = _scale_overbudget_antennas(Z_min, pc)
    state = DualState(lam, value, grad, Z_min, G, iterations, converged, margins)
    return Z, state


def stationarity_multipliers(Z: np.ndarray, G: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Multiplier estimate consistent with precoders ``Z`` under the
    active-budget assumption: project the per-antenna stationarity relation
    lam_i z_{k,i} = g_{k,i} (1 - g_k^H z_k) onto each antenna's budget.

    For a single carrier at the boundary projection this reduces to the
    closed-form multipliers of the 'projection' branch.  Used to warm-start
    the dual ascent near the incumbent's scale.
    """
    Z = np.asarray(Z, dtype=complex)
    G = _as_channel_array(G)
    u = np.einsum("ki,ki->k", G.conj(), Z)
    lam = np.einsum("ki,ki->i", Z.conj(), G * (1.0 - u)[:, None]).real / pc.p
    return np.maximum(lam, LAMBDA_FLOOR)


def whitened_eigenpairs(link: MultiCarrierLink) -> tuple[np.ndarray, np.ndarray]:
    """Dominant eigenvalue and unit eigenvector of H_k^H R_n^{-1} H_k for
    every carrier: sigmas (K,), vectors (K, n)."""
    K, n = link.K, link.n
    sigmas = np.empty(K)
    vectors = np.empty((K, n), dtype=complex)
    R_n = np.diag(link.noise)
    for k in range(K):
        eig = dominant_eigenpair(whitened_gram(link.channels[k], R_n))
        sigmas[k] = eig.value
        vectors[k] = eig.vector
    return sigmas, vectors


def projected_eigenvector_precoders(
    link: MultiCarrierLink, eigens: tuple[np.ndarray, np.ndarray] | None = None
) -> np.ndarray:
    """Boundary projection of each carrier's dominant whitened eigenvector,
    scaled by K^{-1/2} so every antenna spends exactly its budget."""
    _, vectors = eigens if eigens is not None else whitened_eigenpairs(link)
    mag = np.abs(vectors)
    phases = np.where(mag > 0, vectors / np.where(mag > 0, mag, 1.0), 1.0)
    return np.sqrt(link.pc.p / link.K) * phases


def mmse_combiners(link: MultiCarrierLink, Z: np.ndarray) -> np.ndarray:
    """Per-carrier MMSE receive weights for the (K, n) precoders ``Z``."""
    HZ = np.einsum("kmn,kn->km", link.channels, Z)
    s = np.sum(np.abs(HZ) ** 2 / link.noise, axis=1)
    return (HZ / link.noise) / (1.0 + s)[:, None]


def per_carrier_mse(link: MultiCarrierLink, Z: np.ndarray) -> np.ndarray:
    """MSE of each carrier when ``Z`` is paired with its MMSE combiners."""
    HZ = np.einsum("kmn,kn->km", link.channels, Z)
    return 1.0 / (1.0 + np.sum(np.abs(HZ) ** 2 / link.noise, axis=1))


def cyclic_multicarrier(
    link: MultiCarrierLink,
    max_cyclic_iterations: int = 20,
    max_dual_iterations: int = 200,
    eigens: tuple[np.ndarray, np.ndarray] | None = None,
    grad_tol: float | None = None,
) -> MultiCarrierSolution:
    """Joint multicarrier precoder/combiner design.

    Starting from the equal-power projected-eigenvector precoders, each
    cycle recomputes the MMSE combiners, forms the effective MISO channels
    g_k = H_k^H w_k and reoptimizes all precoders with
    :func:`solve_papc_precoders`.  The multipliers are restarted every
    cycle from the incumbent's stationarity estimate, which keeps the
    truncated ascent at the right scale.  The trace records the sum-MSE
    (with refreshed combiners) after each cycle, entry 0 being the
    initialization.
    """
    if max_cyclic_iterations < 1:
        raise ValueError("need at least one cyclic iteration")
    Z = projected_eigenvector_precoders(link, eigens)
    trace = [float(np.sum(per_carrier_mse(link, Z)))]
    state = None
    G = None
    for _ in range(max_cyclic_iterations):
        W = mmse_combiners(link, Z)
        G = np.einsum("kmn,km->kn", link.channels.conj(), W)
        lam0 = stationarity_multipliers(Z, G, link.pc)
        Z_new, state = solve_papc_precoders(
            G, link.pc, lambda0=lam0, max_dual_iterations=max_dual_iterations,
            grad_tol=grad_tol,
        )
        # keep the incumbent when a truncated inner solve fails to improve
        # the transmit objective; this makes the sum-MSE trace nonincreasing
        # for any inner iteration budget
        if precoder_objective(Z_new, G) <= precoder_objective(Z, G):
            Z = Z_new
        trace.append(float(np.sum(per_carrier_mse(link, Z))))
    W = mmse_combiners(link, Z)
    per_carrier = per_carrier_mse(link, Z)
    dual_gap = precoder_objective(Z, G) - state.value
    return MultiCarrierSolution(
        Z, W, float(per_carrier.sum()), per_carrier, float(dual_gap), np.array(trace), state
    )


def percarrier_cyclic_precoders(
    link: MultiCarrierLink, max_iter: int = 500, tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray]:
    """Single-carrier Gauss-Seidel run independently per carrier with the
    per-antenna budgets split equally (p_i / K each)."""
    pc_k = link.pc.scaled(1.0 / link.K)
    Z = np.empty((link.K, link.n), dtype=complex)
    W = np.empty((link.K, link.m), dtype=complex)
    for k in range(link.K):
        pair = gauss_seidel_mmse(link.carrier(k, pc_k), max_iter=max_iter, tol=tol)
        Z[k] = pair.z
        W[k] = pair.w
    return Z, W


def total_power_precoders(
    link: MultiCarrierLink,
    p_T: float | None = None,
    eigens: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Sum-MSE-optimal precoders under a total power budget only (ignores
    the per-antenna limits; lower bound for the constrained problem).

    Each carrier transmits along its dominant whitened eigenvector; the
    power split minimizes sum_k 1/(1 + q_k sigma_k) via the water-filling
    allocation q_k = max(0, (mu sigma_k)^{-1/2} - sigma_k^{-1}) with the
    level mu found by bisection on sum_k q_k = p_T.
    """
    if p_T is None:
        p_T = link.pc.p_total
    if p_T <= 0:
        raise ValueError("total power budget must be > 0")
    sigmas, vectors = eigens if eigens is not None else whitened_eigenpairs(link)
    if np.all(sigmas == 0):
        raise ValueError("degenerate link: all carriers have zero gain")

    def allocation(mu: float) -> np.ndarray:
        q = np.zeros_like(sigmas)
        pos = sigmas > 0
        q[pos] = np.maximum(1.0 / np.sqrt(mu * sigmas[pos]) - 1.0 / sigmas[pos], 0.0)
        return q

    hi = float(sigmas.max())  # allocation vanishes at mu >= max sigma
    lo = hi
    while allocation(lo).sum() <= p_T:
        lo *= 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if allocation(mid).sum() > p_T:
            lo = mid
        else:
            hi = mid
    q = allocation(0.5 * (lo + hi))
    q *= p_T / q.sum()
    return np.sqrt(q)[:, None] * vectors


def naive_scaled_precoders(
    link: MultiCarrierLink, eigens: tuple[np.ndarray, np.ndarray] | None = None
) -> np.ndarray:
    """Total-power precoders with every over-budget antenna rescaled
    (equally across carriers) onto its budget."""
    return _scale_overbudget_antennas(total_power_precoders(link, eigens=eigens), link.pc)


def violation_stats(Z: np.ndarray, pc: PowerConstraints) -> tuple[int, float]:
    """Number of antennas over budget and the worst overshoot in percent."""
    totals = np.sum(np.abs(np.atleast_2d(Z)) ** 2, axis=0)
    count = int(np.count_nonzero(totals > pc.p * (1.0 + 1e-9)))
    max_percent = max(100.0 * float((totals / pc.p - 1.0).max()), 0.0)
    return count, max_percent
