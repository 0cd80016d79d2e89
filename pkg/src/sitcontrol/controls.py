"""Feedback release laws: constant, the regression law, its bang-bang
simplification, and a Gaussian noise wrapper.

Every law maps the observable totals (m_total, f_total) to a release rate.
Evaluation accepts scalars or numpy arrays and is pure; the noise wrapper
consumes an explicitly passed random stream.

The branch predicates of the regression laws are ratios of logarithms in
the original formulation; they are evaluated here in exponentiated
(power-law) form, e.g. log(m)/log(f) > a  <=>  m > f**a for f > 1, which
extends the laws monotonically to the whole non-negative quadrant (the
log ratios flip sign for arguments <= 1, which would wrongly force u_max
near extinction). Ramp values still compute the log ratio directly; the
ramp regions provably satisfy f_total > 1.
"""

from dataclasses import dataclass

import numpy as np

from .model import Observation


def _as_result(value, *inputs):
    """Return a float when every input was scalar, else the array."""
    if all(np.ndim(x) == 0 for x in inputs):
        return float(value)
    return value


@dataclass(frozen=True)
class ConstantLaw:
    """Fixed release rate, ignoring the observation."""

    u_bar: float = 0.0

    def __post_init__(self):
        if self.u_bar < 0:
            raise ValueError("u_bar must be >= 0")

    u_cap = None  # no intrinsic upper bound

    def evaluate(self, m_total, f_total, rng=None):
        return _as_result(np.full(np.shape(m_total), self.u_bar), m_total)


@dataclass(frozen=True)
class RegPiecewiseLaw:
    """Two-branch piecewise law fitted to the learned policy: below the
    male threshold it keys on f_total alone, above on the ratio
    log(m_total)/log(f_total), each with a bang-bang plus linear ramp."""

    u_min: float = 10.0
    u_max: float = 3e5
    alpha1: float = 3.0
    alpha2: float = 4.0
    m_thr: float = 200.0

    def __post_init__(self):
        _check_band(self.u_min, self.u_max)
        if not self.alpha1 < self.alpha2:
            raise ValueError("alpha1 must be < alpha2")
        if not self.m_thr > 1:
            raise ValueError("m_thr must be > 1")

    @property
    def u_cap(self):
        return self.u_max

    def evaluate(self, m_total, f_total, rng=None):
        return _reg_eval(self, m_total, f_total)


@dataclass(frozen=True)
class SimplifiedBangLaw:
    """Bang-bang law: u_min once males dominate females to the alpha2
    power, u_max otherwise."""

    u_min: float = 10.0
    u_max: float = 3e5
    alpha2: float = 4.0

    def __post_init__(self):
        _check_band(self.u_min, self.u_max)

    @property
    def u_cap(self):
        return self.u_max

    def evaluate(self, m_total, f_total, rng=None):
        m = np.asarray(m_total, dtype=float)
        f = np.asarray(f_total, dtype=float)
        out = np.where(m > f ** self.alpha2, self.u_min, self.u_max)
        return _as_result(out, m_total, f_total)


@dataclass(frozen=True)
class NoisyLaw:
    """Additive zero-mean Gaussian perturbation on top of an inner law,
    clipped to stay non-negative (and below the inner law's cap)."""

    inner: object
    sigma: float = 5.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def u_cap(self):
        return self.inner.u_cap

    def evaluate(self, m_total, f_total, rng=None):
        base = self.inner.evaluate(m_total, f_total)
        if rng is None:
            raise ValueError("noisy law evaluation requires a random stream")
        g = rng.normal(0.0, self.sigma, size=np.shape(m_total) or None)
        out = np.maximum(np.asarray(base, dtype=float) + g, 0.0)
        if self.u_cap is not None:
            out = np.minimum(out, self.u_cap)
        return _as_result(out, m_total, f_total)


def _check_band(u_min, u_max):
    if not 0 <= u_min <= u_max:
        raise ValueError("need 0 <= u_min <= u_max")


def _reg_eval(law, m_total, f_total):
    m = np.asarray(m_total, dtype=float)
    f = np.asarray(f_total, dtype=float)
    # Safe logs: selections below only read them where f > 1 (and m > 1)
    # is guaranteed, but np.where evaluates both sides.
    log_f = np.log(np.maximum(f, 1.0 + 1e-12))
    log_m = np.log(np.maximum(m, 1.0 + 1e-12))

    # Left branch (m_total < m_thr): three-way split on f_total.
    f_lo = law.m_thr ** (1.0 / law.alpha2)  # ratio > alpha2 below this
    f_hi = law.m_thr ** (1.0 / law.alpha1)  # ratio <= alpha1 from here on
    left_ramp = law.u_max * (law.alpha2 - np.log(law.m_thr) / log_f)
    left = np.where(f < f_lo, law.u_min,
                    np.where(f < f_hi, left_ramp, law.u_max))

    # Right branch: same split on log(m)/log(f), in power form.
    right_ramp = law.u_max * (law.alpha2 - log_m / log_f)
    right = np.where(m > f ** law.alpha2, law.u_min,
                     np.where(m > f ** law.alpha1, right_ramp, law.u_max))

    out = np.where(m < law.m_thr, left, right)
    out = np.clip(out, 0.0, law.u_max)
    return _as_result(out, m_total, f_total)


# Convenience surface: evaluation directly on Observation values.

def evaluate_constant(law: ConstantLaw, obs: Observation) -> float:
    return law.evaluate(obs.m_total, obs.f_total)


def evaluate_reg(law: RegPiecewiseLaw, obs: Observation) -> float:
    return _reg_eval(law, obs.m_total, obs.f_total)


def evaluate_simplified(law: SimplifiedBangLaw, obs: Observation) -> float:
    return law.evaluate(obs.m_total, obs.f_total)


def apply_noise(law: NoisyLaw, obs: Observation, rng) -> float:
    return law.evaluate(obs.m_total, obs.f_total, rng=rng)


def strip_noise(law):
    """The deterministic core of a (possibly nested) noisy law."""
    while isinstance(law, NoisyLaw):
        law = law.inner
    return law


CONTROL_NAMES = ("constant", "ureg", "vreg")


def law_from_config(cfg: dict):
    """Build a control law from a parsed key-value configuration.

    Recognized keys: control (constant|ureg|vreg), u_bar, u_min, u_max,
    alpha1, alpha2, m_thr, noise_sigma. A positive noise_sigma wraps the
    law in Gaussian noise.
    """
    name = cfg.get("control", "constant")
    if name not in CONTROL_NAMES:
        raise ValueError(
            f"unknown control {name!r}; valid controls: {', '.join(CONTROL_NAMES)}")

    def num(key, default):
        return float(cfg[key]) if key in cfg else default

    if name == "constant":
        law = ConstantLaw(u_bar=num("u_bar", 0.0))
    elif name == "ureg":
        law = RegPiecewiseLaw(u_min=num("u_min", 10.0), u_max=num("u_max", 3e5),
                              alpha1=num("alpha1", 3.0), alpha2=num("alpha2", 4.0),
                              m_thr=num("m_thr", 200.0))
    else:
        law = SimplifiedBangLaw(u_min=num("u_min", 10.0), u_max=num("u_max", 3e5),
                                alpha2=num("alpha2", 4.0))
    sigma = num("noise_sigma", 0.0)
    if sigma > 0:
        law = NoisyLaw(inner=law, sigma=sigma)
    return law
