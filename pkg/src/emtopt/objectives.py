"""The three performance objectives, their normalizations, and the
weighted composite used as the stage cost.

Raw objectives: an equivalent fuel economy (fuel rate plus a battery
throughput equivalence plus a state-of-charge deviation penalty), a
driving power reserve, and a generation power reserve. Each is mapped to
a dimensionless value so the weighted sum is unit-consistent: the fuel
objective divides by its fixed maximum, the two reserves divide by the
momentary capacity and flip sign, so more reserve means lower cost.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class ObjectiveParams:
    """Coefficients and fixed normalization bounds.

    ``gamma1`` converts a state-of-charge change into a fuel-rate
    equivalent (negative: charging earns credit, discharging pays).
    ``gamma2`` scales the squared deviation from the reference
    ``soc0``. ``fuel_max``, ``dsoc_max`` and ``soc_dev_max`` fix the
    fuel-objective normalization; they are constants of the
    normalization, never re-evaluated per step.
    """

    gamma1: float = -12500.0
    gamma2: float = 2000.0
    soc0: float = 0.5
    fuel_max: float = 72.0
    dsoc_max: float = 0.001
    soc_dev_max: float = 0.3

    def __post_init__(self):
        if self.fuel_max <= 0 or self.dsoc_max <= 0 or self.soc_dev_max <= 0:
            raise ConfigError("fuel_max, dsoc_max and soc_dev_max must be positive")
        if self.j1_max() <= 0:
            raise ConfigError(
                f"fuel-objective normalization denominator must be positive, "
                f"got {self.j1_max():g}"
            )

    def j1_max(self) -> float:
        return self.fuel_max + self.gamma1 * self.dsoc_max + self.gamma2 * self.soc_dev_max**2


@dataclass(frozen=True)
class PatternWeights:
    """Weights (alpha1, alpha2, alpha3) over the three normalized objectives."""

    alpha1: float
    alpha2: float
    alpha3: float

    def __post_init__(self):
        if min(self.alpha1, self.alpha2, self.alpha3) < 0:
            raise ValueError("weights must be nonnegative")
        s = self.alpha1 + self.alpha2 + self.alpha3
        if abs(s - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {s!r}")

    def as_tuple(self):
        return (self.alpha1, self.alpha2, self.alpha3)


@dataclass(frozen=True)
class ObjectiveValues:
    """Raw and normalized objective values for one evaluated stage."""

    j1_raw: float
    j2_raw: float
    j3_raw: float
    j1_bar: float
    j2_bar: float
    j3_bar: float


def j1_raw(fuel_gps: float, dsoc: float, soc: float, p: ObjectiveParams) -> float:
    """Equivalent fuel economy objective in g/s-equivalent units."""
    return fuel_gps + p.gamma1 * dsoc + p.gamma2 * (soc - p.soc0) ** 2


def j2_raw(pe_max_kw: float, ps_max_kw: float, pd_kw: float) -> float:
    """Driving power reserve in kW: engine plus battery capacity minus demand."""
    return pe_max_kw + ps_max_kw - pd_kw


def j3_raw(pa_max_kw: float, pb_max_kw: float, ps_max_kw: float, pc_kw: float) -> float:
    """Generation power reserve in kW: machines plus battery minus electric demand."""
    return pa_max_kw + pb_max_kw + ps_max_kw - pc_kw


def j1_norm(j1: float, p: ObjectiveParams) -> float:
    """Fuel objective normalized by its fixed maximum."""
    return j1 / p.j1_max()


def j2_norm(pe_max_kw: float, ps_max_kw: float, pd_kw: float) -> float:
    """Normalized driving reserve in [-1, 0] over the documented domain."""
    cap = pe_max_kw + ps_max_kw
    if cap <= 0:
        raise ConfigError("driving capacity must be positive to normalize")
    return -(pe_max_kw + ps_max_kw - pd_kw) / cap


def j3_norm(pa_max_kw: float, pb_max_kw: float, ps_max_kw: float, pc_kw: float) -> float:
    """Normalized generation reserve in [-1, 0] over the documented domain."""
    cap = pa_max_kw + pb_max_kw + ps_max_kw
    if cap <= 0:
        raise ConfigError("generation capacity must be positive to normalize")
    return -(pa_max_kw + pb_max_kw + ps_max_kw - pc_kw) / cap


def composite(w: PatternWeights, v: ObjectiveValues) -> float:
    """Weighted sum of the normalized objectives."""
    return w.alpha1 * v.j1_bar + w.alpha2 * v.j2_bar + w.alpha3 * v.j3_bar
