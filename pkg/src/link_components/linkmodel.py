"""Link-budget constants and the squared-angle thresholds Theta_D and Theta_E.

Units are SI throughout: angles in radians, wavelengths and distances in
meters, powers in watts. Telescope gains are dimensionless.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property

from src.numerics.specfun import digamma_log_gap

logger = logging.getLogger(__name__)


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")


def _fraction(name: str, value: float) -> None:
    if not 0 < value <= 1:
        raise ValueError(f"{name} must lie in (0, 1], got {value!r}")


@dataclass(frozen=True)
class PointingParams:
    """Means and standard deviations of the elevation (V) and azimuth (H) errors."""

    mu_v: float
    mu_h: float
    sigma_v: float
    sigma_h: float

    def __post_init__(self) -> None:
        _positive("sigma_v", self.sigma_v)
        _positive("sigma_h", self.sigma_h)
        for name in ("mu_v", "mu_h"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not math.isfinite(self.noncentrality):
            raise ValueError("mu_h / sigma_h overflows the noncentrality parameter")

    @property
    def noncentrality(self) -> float:
        """lambda = mu_h^2 / sigma_h^2."""
        ratio = self.mu_h / self.sigma_h
        return ratio * ratio

    @property
    def is_centered(self) -> bool:
        return self.mu_v == 0 and self.mu_h == 0

    @property
    def is_isotropic(self) -> bool:
        return self.sigma_v == self.sigma_h


@dataclass(frozen=True)
class LinkBudget:
    """Physical constants of the legitimate (1) and backflash (2) links."""

    p_s: float
    g_s: float
    g_e: float
    eta_s: float
    eta_d: float
    eta_e: float
    eta_q: float
    eta_b: float
    lambda1: float
    lambda2: float
    z1: float
    z2: float
    la1: float
    la2: float

    def __post_init__(self) -> None:
        for name in ("p_s", "g_s", "g_e", "lambda1", "lambda2", "z1", "z2"):
            _positive(name, getattr(self, name))
        for name in ("eta_s", "eta_d", "eta_e", "eta_q", "eta_b", "la1", "la2"):
            _fraction(name, getattr(self, name))


@dataclass(frozen=True)
class TurbulenceParams:
    """Gamma-Gamma large-scale (alpha_d) and small-scale (beta_d) parameters."""

    alpha_d: float
    beta_d: float

    def __post_init__(self) -> None:
        _positive("alpha_d", self.alpha_d)
        _positive("beta_d", self.beta_d)


def k1(budget: LinkBudget) -> float:
    """eta_q P_S G_S eta_S eta_D (L_A(Z1)/Z1^2) (lambda1/4pi)^2."""
    b = budget
    return (
        b.eta_q * b.p_s * b.g_s * b.eta_s * b.eta_d
        * (b.la1 / b.z1**2)
        * (b.lambda1 / (4.0 * math.pi)) ** 2
    )


def k2(budget: LinkBudget) -> float:
    """eta_B eta_q eta_D eta_E G_E (L_A(Z2)/Z2^2) (lambda2/4pi)^2."""
    b = budget
    return (
        b.eta_b * b.eta_q * b.eta_d * b.eta_e * b.g_e
        * (b.la2 / b.z2**2)
        * (b.lambda2 / (4.0 * math.pi)) ** 2
    )


def telescope_gain(d_d: float, wavelength: float) -> float:
    """G_D = (pi d_D / lambda)^2 for an unobscured circular aperture."""
    _positive("d_d", d_d)
    _positive("wavelength", wavelength)
    return (math.pi * d_d / wavelength) ** 2


def db_to_watts(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to turn power thresholds into angular thresholds.

    K1/K2 come from `budget` unless given explicitly through `k1_override` /
    `k2_override`, which win when both are present.
    """

    pointing: PointingParams
    g_d: float
    lambda_d: float
    lambda_e: float
    alpha: float
    budget: LinkBudget | None = None
    k1_override: float | None = None
    k2_override: float | None = None
    turbulence: TurbulenceParams | None = None

    def __post_init__(self) -> None:
        _positive("g_d", self.g_d)
        _positive("lambda_d", self.lambda_d)
        _positive("lambda_e", self.lambda_e)
        _positive("alpha", self.alpha)
        for name in ("k1_override", "k2_override"):
            value = getattr(self, name)
            if value is not None:
                _positive(name, value)
        if self.budget is None and (self.k1_override is None or self.k2_override is None):
            raise ValueError("Scenario needs a LinkBudget or both k1 and k2")

    @cached_property
    def k1(self) -> float:
        if self.k1_override is not None:
            return self.k1_override
        assert self.budget is not None
        return k1(self.budget)

    @cached_property
    def k2(self) -> float:
        if self.k2_override is not None:
            return self.k2_override
        assert self.budget is not None
        return k2(self.budget)

    def with_gain(self, g_d: float) -> "Scenario":
        return replace(self, g_d=g_d)


def theta_d(scenario: Scenario) -> float:
    """-ln(lambda_D / (K1 G_D)) / G_D; negative when the threshold is unreachable."""
    s = scenario
    return -math.log(s.lambda_d / (s.k1 * s.g_d)) / s.g_d


def theta_e(scenario: Scenario) -> float:
    """Eavesdropper threshold for the event theta^2 + alpha theta_V >= Theta_E."""
    s = scenario
    return -math.log(s.lambda_e / (s.k1 * s.k2 * s.g_d**2)) / (2.0 * s.g_d) - 0.5 * s.alpha**2


def theta_e_rayleigh(scenario: Scenario) -> float:
    """Threshold on Y = 2 theta^2 + 2 alpha theta_V; always twice `theta_e`."""
    s = scenario
    # ln(lambda_E e^{G_D a^2}) split to keep the exponent from overflowing.
    log_ratio = math.log(s.lambda_e / (s.k1 * s.k2 * s.g_d**2)) + s.g_d * s.alpha**2
    return -log_ratio / s.g_d


def g_d_star(scenario: Scenario) -> float:
    """Receiver gain at which `theta_e` peaks: e * sqrt(lambda_E / (K1 K2))."""
    s = scenario
    return math.e * math.sqrt(s.lambda_e / (s.k1 * s.k2))


def theta_e_max(scenario: Scenario) -> float:
    """Peak value of `theta_e` over G_D, attained at `g_d_star`."""
    s = scenario
    return math.sqrt(s.k1 * s.k2) / (math.e * math.sqrt(s.lambda_e)) - 0.5 * s.alpha**2


def eve_guard_active(scenario: Scenario) -> bool:
    """True when Theta_E <= -alpha^2/4, i.e. the eavesdropper event is certain.

    This is the validity condition of the simplified Rayleigh TPRE; it is
    equivalent to theta_e_rayleigh <= -alpha^2/2.
    """
    return theta_e(scenario) <= -0.25 * scenario.alpha**2


def received_power_legit(scenario: Scenario, theta: float) -> float:
    """P_D = K1 G_D exp(-G_D theta^2)."""
    s = scenario
    return s.k1 * s.g_d * math.exp(-s.g_d * theta**2)


def received_power_eve(scenario: Scenario, theta_v: float, theta_h: float) -> float:
    """P_E = K2 P_D(theta) L(theta_E) G_D with theta_E^2 = (theta_V + alpha)^2 + theta_H^2."""
    s = scenario
    theta_sq = theta_v**2 + theta_h**2
    theta_e_sq = (theta_v + s.alpha) ** 2 + theta_h**2
    legit = received_power_legit(scenario, math.sqrt(theta_sq))
    return s.k2 * legit * math.exp(-s.g_d * theta_e_sq) * s.g_d


def turbulence_log_mean(turb: TurbulenceParams) -> float:
    """E{ln I_D} = psi(alpha_D) + psi(beta_D) - ln(alpha_D beta_D); never positive."""
    return digamma_log_gap(turb.alpha_d) + digamma_log_gap(turb.beta_d)
