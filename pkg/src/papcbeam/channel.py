"""Scenario generation: Rayleigh multipath channels, budgets and noise.

Every random draw comes from a counter-based Philox stream keyed by
(seed, trial, purpose), so trials are reproducible independently of
execution order or process count.
"""

from dataclasses import dataclass, field

import numpy as np

from .constraints import PowerConstraints

__all__ = [
    "ScenarioConfig",
    "ALL_METHODS",
    "trial_stream",
    "generate_channel",
    "generate_scenario",
]

#: Weight-design methods the harness knows how to run.
ALL_METHODS = ("cyclic", "projeig", "percarrier", "totalpower", "naive")

# purpose ids for the per-trial random streams
STREAM_SCENARIO = 0
STREAM_CHANNEL = 1

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Experiment parameters; defaults reproduce the reference comparison
    (20 transmitters, 10 receivers, 128 carriers over 10 MHz, 400 trials).

    ``fc_hz`` is descriptive only: the baseband tapped-delay-line model does
    not depend on the carrier frequency.
    """

    n: int = 20
    m: int = 10
    K: int = 128
    bandwidth_hz: float = 10e6
    fc_hz: float = 2e9
    delay_spread_s: float = 4e-6
    p_min_w: float = 0.1
    p_max_w: float = 1.0
    noise_floor_dbw: float = -10.0
    noise_spread_db: float = 10.0
    trials: int = 400
    cyclic_iters: int = 20
    dual_iters: int = 200
    seed: int = 0
    methods: tuple = field(default_factory=lambda: ALL_METHODS)

    def __post_init__(self):
        for name in ("n", "m", "K", "trials", "cyclic_iters", "dual_iters"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.p_min_w <= 0 or self.p_max_w < self.p_min_w:
            raise ValueError("power range must satisfy 0 < p_min_w <= p_max_w")
        if self.noise_spread_db < 0:
            raise ValueError("noise_spread_db must be >= 0")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")
        if self.delay_spread_s < 0:
            raise ValueError("delay_spread_s must be >= 0")
        if round(self.delay_spread_s * self.bandwidth_hz) > self.K:
            raise ValueError("delay spread exceeds the per-carrier symbol support")
        methods = tuple(self.methods)
        if not methods:
            raise ValueError("methods must not be empty")
        for tag in methods:
            if tag not in ALL_METHODS:
                raise ValueError(f"unknown method {tag!r}; choose from {ALL_METHODS}")
        object.__setattr__(self, "methods", methods)


def trial_stream(seed: int, trial: int, purpose: int) -> np.random.Generator:
    """Philox generator for one (trial, purpose) pair under ``seed``."""
    key = np.array([seed & _MASK64, ((trial << 8) | purpose) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _delay_profile(cfg: ScenarioConfig) -> np.ndarray:
    """Exponential tap intensity profile, unit total power.

    The decay constant is the delay spread in tap units
    (delay_spread_s * bandwidth_hz); the profile is truncated at four decay
    constants (at most K - 1 taps, at least one) and renormalized.
    """
    decay_taps = cfg.delay_spread_s * cfg.bandwidth_hz
    n_taps = int(min(max(round(4.0 * decay_taps), 1), cfg.K - 1)) if cfg.K > 1 else 1
    if n_taps == 1 or decay_taps == 0:
        return np.ones(1)
    profile = np.exp(-np.arange(n_taps) / decay_taps)
    return profile / profile.sum()


def generate_channel(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Per-carrier channel matrices (K, m, n) from a tapped delay line.

    Each transmit/receive pair gets independent circularly-symmetric
    Gaussian taps with the exponential intensity profile; carrier ``k``
    sees the K-point DFT of its taps, so E|H_k[j, i]|^2 = 1.
    """
    profile = _delay_profile(cfg)
    shape = (profile.size, cfg.m, cfg.n)
    taps = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    taps *= np.sqrt(profile / 2.0)[:, None, None]
    return np.fft.fft(taps, n=cfg.K, axis=0)


def generate_scenario(cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[PowerConstraints, np.ndarray]:
    """Draw per-antenna budgets and receiver noise variances.

    Budgets are uniform on [p_min_w, p_max_w]; noise variances are uniform
    in dBW on [floor, floor + spread].  Budgets are drawn before noise, so
    one stream yields a stable scenario.
    """
    p = rng.uniform(cfg.p_min_w, cfg.p_max_w, cfg.n)
    noise_dbw = cfg.noise_floor_dbw + rng.uniform(0.0, cfg.noise_spread_db, cfg.m)
    return PowerConstraints(p), 10.0 ** (noise_dbw / 10.0)
