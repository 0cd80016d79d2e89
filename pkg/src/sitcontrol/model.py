"""Core SIT population model: parameters, state, derivatives, observables
and equilibria.

The system tracks four compartments: aquatic phase E, wild adult males M,
fertilized females F and sterilized males Ms. The control u is the release
rate of sterilized males. All operations here are pure functions on
immutable values.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

# Documented plausible ranges for the rate parameters (not enforced).
PARAM_RANGES = {
    "beta_E": (7.46, 14.85),
    "nu_E": (0.005, 0.25),
    "delta_E": (0.023, 0.046),
    "delta_F": (0.033, 0.046),
    "delta_M": (0.077, 0.139),
}

# Keys accepted in parameter configuration files, mapped to field names.
PARAM_CONFIG_KEYS = {
    "beta_e": "beta_E",
    "nu_e": "nu_E",
    "delta_e": "delta_E",
    "delta_f": "delta_F",
    "delta_m": "delta_M",
    "delta_s": "delta_s",
    "nu": "nu",
    "k": "K",
}


@dataclass(frozen=True)
class ModelParams:
    """Biological rate/capacity constants. Defaults are the reference
    values used throughout (per-day rates, K in egg counts)."""

    beta_E: float = 8.0    # oviposition rate
    nu_E: float = 0.25     # hatching rate
    delta_E: float = 0.03  # aquatic-phase death rate
    delta_F: float = 0.04  # female death rate
    delta_M: float = 0.1   # wild male death rate
    delta_s: float = 0.12  # sterilized male death rate
    nu: float = 0.49       # female emergence probability
    K: float = 50000.0     # environmental capacity for eggs

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
        for name in ("beta_E", "nu_E", "delta_E", "delta_F", "delta_M",
                     "delta_s", "K"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must be in (0,1), got {self.nu}")
        if self.delta_s < self.delta_M:
            raise ValueError(
                f"delta_s ({self.delta_s}) must be >= delta_M ({self.delta_M})")

    @property
    def persistent(self) -> bool:
        """True when the positive (persistence) equilibrium exists."""
        return self.beta_E * self.nu * self.nu_E > \
            self.delta_F * (self.nu_E + self.delta_E)


@dataclass(frozen=True)
class SitState:
    """Population densities of the four compartments (all counts >= 0)."""

    E: float
    M: float
    F: float
    Ms: float

    def __post_init__(self):
        for name in ("E", "M", "F", "Ms"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")

    def as_array(self):
        return np.array([self.E, self.M, self.F, self.Ms], dtype=float)


@dataclass(frozen=True)
class Observation:
    """The two measurable totals: all males and all females."""

    m_total: float  # M + Ms
    f_total: float  # F + Fs

    def __post_init__(self):
        for name in ("m_total", "f_total"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class StateDerivative:
    dE: float
    dM: float
    dF: float
    dMs: float

    def as_array(self):
        return np.array([self.dE, self.dM, self.dF, self.dMs], dtype=float)


def derivative(state: SitState, params: ModelParams, u: float) -> StateDerivative:
    """Right-hand side of the four compartment equations at `state` under
    release rate `u`. The male fraction M/(M+Ms) is taken as 0 when both
    male counts vanish."""
    if not math.isfinite(u) or u < 0:
        raise ValueError(f"release rate must be finite and >= 0, got {u}")
    p = params
    total_males = state.M + state.Ms
    frac = state.M / total_males if total_males > 0 else 0.0
    dE = p.beta_E * state.F * (1.0 - state.E / p.K) - (p.nu_E + p.delta_E) * state.E
    dM = (1.0 - p.nu) * p.nu_E * state.E - p.delta_M * state.M
    dF = p.nu * p.nu_E * state.E * frac - p.delta_F * state.F
    dMs = u - p.delta_s * state.Ms
    return StateDerivative(dE, dM, dF, dMs)


def derivative_arrays(E, M, F, Ms, params: ModelParams, u):
    """Vectorized right-hand side on plain numpy arrays (one entry per
    simulation). Same conventions as `derivative`."""
    p = params
    total_males = M + Ms
    frac = np.divide(M, total_males, out=np.zeros_like(total_males),
                     where=total_males > 0)
    dE = p.beta_E * F * (1.0 - E / p.K) - (p.nu_E + p.delta_E) * E
    dM = (1.0 - p.nu) * p.nu_E * E - p.delta_M * M
    dF = p.nu * p.nu_E * E * frac - p.delta_F * F
    dMs = u - p.delta_s * Ms
    return dE, dM, dF, dMs


def unfertilized_flow(E, M, Ms, Fs, params: ModelParams):
    """Rate of change of the tracked unfertilized-female count: females
    emerge at rate nu*nu_E*E, a fraction Ms/(M+Ms) of them mates sterile,
    and they die at the female death rate.

    Simulations track this passive observable alongside the four
    dynamical compartments so the measured female total follows actual
    emergence instead of the instantaneous ratio F*Ms/M, which stays
    bounded away from zero during suppression (M and F decay in a fixed
    ratio) and would blind every threshold controller near extinction.
    """
    p = params
    total_males = M + Ms
    sterile_frac = np.divide(Ms, total_males,
                             out=np.zeros_like(np.asarray(total_males, dtype=float)),
                             where=total_males > 0)
    return p.nu * p.nu_E * E * sterile_frac - p.delta_F * Fs


def unfertilized_females(state: SitState) -> float:
    """Fs = F*Ms/M; defined as 0 when M = 0 (F decays exponentially there,
    so the convention does not affect limits)."""
    if state.M <= 0:
        return 0.0
    return state.F * state.Ms / state.M


def observe(state: SitState) -> Observation:
    """The measurable totals (M+Ms, F+Fs)."""
    return Observation(state.M + state.Ms, state.F + unfertilized_females(state))


def persistence_equilibrium(params: ModelParams):
    """Positive steady state (E*, M*, F*) of the uncontrolled system
    (u = 0, Ms = 0). Raises if the persistence condition fails."""
    p = params
    if not p.persistent:
        raise ValueError("no positive equilibrium: "
                         "beta_E*nu*nu_E <= delta_F*(nu_E + delta_E)")
    e_star = p.K * (1.0 - p.delta_F * (p.nu_E + p.delta_E) / (p.beta_E * p.nu * p.nu_E))
    m_star = (1.0 - p.nu) * p.nu_E * e_star / p.delta_M
    f_star = p.nu * p.nu_E * e_star / p.delta_F
    return e_star, m_star, f_star


def critical_constant_control(params: ModelParams) -> float:
    """Threshold release rate above which a constant control alone drives
    the pest population extinct."""
    p = params
    if not p.persistent:
        raise ValueError("critical control undefined: persistence condition fails")
    lead = (p.K * p.beta_E * p.nu * (1.0 - p.nu) * p.nu_E ** 2 * p.delta_s
            / (4.0 * (p.delta_E + p.nu_E) * p.delta_F * p.delta_M))
    rel = 1.0 - p.delta_F * (p.nu_E + p.delta_E) / (p.beta_E * p.nu * p.nu_E)
    return lead * rel ** 2


def params_from_config(cfg: dict) -> ModelParams:
    """Build ModelParams from a parsed key-value configuration; missing
    keys fall back to the defaults."""
    kwargs = {}
    for key, field in PARAM_CONFIG_KEYS.items():
        if key in cfg:
            kwargs[field] = float(cfg[key])
    return ModelParams(**kwargs)
