"""Feasible-set geometry for per-antenna transmit power budgets.

The constraint set is a product of circles: antenna ``i`` may transmit with
any phase but at most ``sqrt(p_i)`` amplitude.  The boundary of this set has
a simple nearest-point projection (keep phases, fix magnitudes) and a
weighted-l1 norm that shows up throughout the precoder optimality
conditions, both implemented here.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PowerConstraints",
    "p_projection",
    "p_norm",
    "feasibility_margins",
    "multicarrier_margins",
]

#: Absolute tolerance on power margins when deciding feasibility; solver
#: outputs sit on the boundary to machine precision.
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class PowerConstraints:
    """Per-antenna power budget vector ``p`` (watts), all entries positive."""

    p: np.ndarray
    p_total: float = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("power budget must be a nonempty 1-D vector")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise ValueError("per-antenna powers must be finite and > 0")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_total", float(p.sum()))

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def sqrt_p(self) -> np.ndarray:
        return np.sqrt(self.p)

    @property
    def diag(self) -> np.ndarray:
        """The budget vector as a diagonal matrix."""
        return np.diag(self.p)

    def scaled(self, factor: float) -> "PowerConstraints":
        """Budgets uniformly scaled by ``factor`` (e.g. per-carrier split)."""
        return PowerConstraints(self.p * factor)


def _unit_phases(x: np.ndarray) -> np.ndarray:
    """e^{j angle(x_i)} with the convention angle(0) = 0."""
    x = np.asarray(x, dtype=complex)
    mag = np.abs(x)
    out = np.ones_like(x)
    nz = mag > 0
    out[nz] = x[nz] / mag[nz]
    return out


def p_projection(x: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Project ``x`` onto the set of vectors with |z_i| = sqrt(p_i).

    Phases are preserved; magnitudes are replaced by the per-antenna
    amplitude budgets.  Zero components map to the real-positive boundary
    point (angle(0) = 0), which keeps the operator deterministic.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (pc.n,):
        raise ValueError(f"dimension mismatch: len(x)={x.shape} vs {pc.n} budgets")
    return pc.sqrt_p * _unit_phases(x)


def p_norm(x: np.ndarray, pc: PowerConstraints) -> float:
    """Weighted l1 norm sum_i sqrt(p_i) |x_i|."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (pc.n,):
        raise ValueError(f"dimension mismatch: len(x)={x.shape} vs {pc.n} budgets")
    return float(np.sum(pc.sqrt_p * np.abs(x)))


def feasibility_margins(z: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Per-antenna power slack p_i - |z_i|^2; all >= -tol means feasible."""
    z = np.asarray(z, dtype=complex)
    if z.shape != (pc.n,):
        raise ValueError(f"dimension mismatch: len(z)={z.shape} vs {pc.n} budgets")
    return pc.p - np.abs(z) ** 2


def multicarrier_margins(Z: np.ndarray, pc: PowerConstraints) -> np.ndarray:
    """Per-antenna slack p_i - sum_k |z_{k,i}|^2 for a (K, n) weight array."""
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    if Z.shape[1] != pc.n:
        raise ValueError(f"dimension mismatch: {Z.shape[1]} antennas vs {pc.n} budgets")
    return pc.p - np.sum(np.abs(Z) ** 2, axis=0)
