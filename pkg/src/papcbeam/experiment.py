"""Seeded Monte-Carlo comparison of the weight-design methods.

Each trial draws an independent scenario/channel from its own random
streams, runs every requested method and records per-carrier SNR, sum-MSE
and budget-violation statistics.  Trials are embarrassingly parallel and
merge order-independently, so results do not depend on the worker count.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .channel import (
    STREAM_CHANNEL,
    STREAM_SCENARIO,
    ScenarioConfig,
    generate_channel,
    generate_scenario,
    trial_stream,
)
from .multicarrier import (
    MultiCarrierLink,
    cyclic_multicarrier,
    mmse_combiners,
    naive_scaled_precoders,
    per_carrier_mse,
    percarrier_cyclic_precoders,
    projected_eigenvector_precoders,
    total_power_precoders,
    violation_stats,
    whitened_eigenpairs,
)

__all__ = [
    "MethodResult",
    "TrialResult",
    "CdfSeries",
    "ResultSet",
    "carrier_snr",
    "empirical_cdf",
    "run_trial",
    "monte_carlo",
]


@dataclass(frozen=True)
class MethodResult:
    """Metrics of one method on one trial.  ``seconds`` is wall-clock and is
    the only nondeterministic field."""

    snr_db: np.ndarray
    sum_mse: float
    violation_count: int
    violation_max_percent: float
    seconds: float


@dataclass(frozen=True)
class TrialResult:
    trial: int
    methods: dict


@dataclass(frozen=True)
class CdfSeries:
    """Empirical CDF: sorted sample values with probabilities i/N."""

    values: np.ndarray
    probs: np.ndarray

    def value_at(self, prob: float) -> float:
        """Smallest sample whose cumulative probability reaches ``prob``."""
        idx = int(np.searchsorted(self.probs, prob, side="left"))
        return float(self.values[min(idx, self.values.size - 1)])


@dataclass(frozen=True)
class ResultSet:
    """Aggregated experiment output: pooled CDFs and per-method medians."""

    config: ScenarioConfig
    trials: list
    snr_cdfs: dict
    violation_count_cdfs: dict
    violation_maxpct_cdfs: dict
    medians: dict
    method_seconds: dict

    def summary(self) -> dict:
        """JSON-ready per-method medians plus the headline median-SNR gaps."""
        med = self.medians
        gaps = {}
        if "cyclic" in med and "projeig" in med:
            gaps["cyclic_minus_projeig_db"] = med["cyclic"]["median_snr_db"] - med["projeig"]["median_snr_db"]
        if "totalpower" in med and "cyclic" in med:
            gaps["totalpower_minus_cyclic_db"] = med["totalpower"]["median_snr_db"] - med["cyclic"]["median_snr_db"]
        if "percarrier" in med and "projeig" in med:
            gaps["percarrier_minus_projeig_db"] = med["percarrier"]["median_snr_db"] - med["projeig"]["median_snr_db"]
        if "naive" in med and "projeig" in med:
            gaps["naive_minus_projeig_db"] = med["naive"]["median_snr_db"] - med["projeig"]["median_snr_db"]
        return {
            "trials": self.config.trials,
            "seed": self.config.seed,
            "methods": med,
            "median_snr_gaps_db": gaps,
        }


def _noise_vector(R_n: np.ndarray) -> np.ndarray:
    R_n = np.asarray(R_n)
    if R_n.ndim == 2:
        R_n = np.diagonal(R_n)
    return np.real(R_n).astype(float)


def carrier_snr(z: np.ndarray, w: np.ndarray, H: np.ndarray, R_n: np.ndarray) -> float:
    """Post-combining SNR in dB: |w^H H z|^2 / (w^H R_n w).

    Scale-invariant in ``w``; with the MMSE combiner it equals
    1/mse - 1 in linear units.
    """
    w = np.asarray(w, dtype=complex)
    if not np.any(w):
        raise ValueError("SNR is undefined for a zero receive weight")
    noise = _noise_vector(R_n)
    signal = abs(np.vdot(w, np.asarray(H) @ z)) ** 2
    return float(10.0 * np.log10(signal / np.sum(noise * np.abs(w) ** 2)))


def _carrier_snrs_db(link: MultiCarrierLink, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Vectorized per-carrier SNR (dB) for (K, n) precoders / (K, m) combiners."""
    HZ = np.einsum("kmn,kn->km", link.channels, Z)
    signal = np.abs(np.einsum("km,km->k", W.conj(), HZ)) ** 2
    noise = np.sum(link.noise * np.abs(W) ** 2, axis=1)
    return 10.0 * np.log10(signal / noise)


def empirical_cdf(samples) -> CdfSeries:
    """Sorted samples with cumulative probabilities 1/N .. 1."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("cannot build a CDF from no samples")
    values = np.sort(samples)
    probs = np.arange(1, values.size + 1) / values.size
    return CdfSeries(values, probs)


def run_trial(cfg: ScenarioConfig, trial_index: int) -> TrialResult:
    """Draw one scenario and run every configured method on it.

    All randomness comes from the (seed, trial_index) streams, so repeated
    calls reproduce every field except the wall-clock timings.
    """
    pc, noise = generate_scenario(cfg, trial_stream(cfg.seed, trial_index, STREAM_SCENARIO))
    H = generate_channel(cfg, trial_stream(cfg.seed, trial_index, STREAM_CHANNEL))
    link = MultiCarrierLink(H, noise, pc)

    eigens = None
    if any(tag != "percarrier" for tag in cfg.methods):
        eigens = whitened_eigenpairs(link)

    methods = {}
    for tag in cfg.methods:
        t0 = time.perf_counter()
        if tag == "cyclic":
            sol = cyclic_multicarrier(link, cfg.cyclic_iters, cfg.dual_iters, eigens=eigens)
            Z, W = sol.Z, sol.W
        elif tag == "projeig":
            Z = projected_eigenvector_precoders(link, eigens)
            W = mmse_combiners(link, Z)
        elif tag == "percarrier":
            Z, W = percarrier_cyclic_precoders(link)
        elif tag == "totalpower":
            Z = total_power_precoders(link, eigens=eigens)
            W = mmse_combiners(link, Z)
        elif tag == "naive":
            Z = naive_scaled_precoders(link, eigens=eigens)
            W = mmse_combiners(link, Z)
        else:  # pragma: no cover - ScenarioConfig validates tags
            raise ValueError(f"unknown method {tag!r}")
        sum_mse = float(np.sum(per_carrier_mse(link, Z)))
        snr_db = _carrier_snrs_db(link, Z, W)
        count, max_percent = violation_stats(Z, pc)
        seconds = time.perf_counter() - t0
        methods[tag] = MethodResult(snr_db, sum_mse, count, max_percent, seconds)
    return TrialResult(trial_index, methods)


def monte_carlo(cfg: ScenarioConfig, threads: int = 1) -> ResultSet:
    """Run all trials (optionally in a process pool) and pool the metrics.

    Pooling is order-free: trials are sorted by index before aggregation,
    so the output is identical for any worker count.
    """
    indices = range(cfg.trials)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            trials = list(pool.map(partial(run_trial, cfg), indices))
    else:
        trials = [run_trial(cfg, t) for t in indices]
    trials.sort(key=lambda tr: tr.trial)

    snr_cdfs, count_cdfs, maxpct_cdfs, medians, seconds = {}, {}, {}, {}, {}
    for tag in cfg.methods:
        snr_pool = np.concatenate([tr.methods[tag].snr_db for tr in trials])
        counts = np.array([tr.methods[tag].violation_count for tr in trials])
        maxpcts = np.array([tr.methods[tag].violation_max_percent for tr in trials])
        sum_mses = np.array([tr.methods[tag].sum_mse for tr in trials])
        snr_cdfs[tag] = empirical_cdf(snr_pool)
        count_cdfs[tag] = empirical_cdf(counts)
        maxpct_cdfs[tag] = empirical_cdf(maxpcts)
        medians[tag] = {
            "median_snr_db": float(np.median(snr_pool)),
            "median_sum_mse": float(np.median(sum_mses)),
            "median_violation_count": float(np.median(counts)),
            "median_violation_max_percent": float(np.median(maxpcts)),
        }
        seconds[tag] = float(sum(tr.methods[tag].seconds for tr in trials))
    return ResultSet(cfg, trials, snr_cdfs, count_cdfs, maxpct_cdfs, medians, seconds)
