"""Transmission probabilities TPLR, TPE and TPRE under Beckmann pointing errors.

TPLR = Pr{theta^2 <= Theta_D}
TPE  = Pr{theta^2 + alpha theta_V >= Theta_E}
TPRE = Pr{theta^2 <= Theta_D, theta^2 + alpha theta_V >= Theta_E}

with theta^2 = theta_V^2 + theta_H^2, theta_V ~ N(mu_V, sigma_V^2) and
theta_H ~ N(mu_H, sigma_H^2). Conditioning on theta_V leaves a one-degree
noncentral chi-squared law for theta_H^2 / sigma_H^2, whose CDF is
1 - Q_{1/2}(sqrt(lambda), sqrt(x)); the outer Gaussian expectation over theta_V
is taken with Gauss-Hermite quadrature, a three-point robust rule, or replaced
by an asymptotic or closed form.

Integrands are evaluated in units of sigma_H (sigma^2 for the Rayleigh forms)
so that magnitudes stay near one for physical inputs around 1e-13..1e-10 rad^2.
"""

import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.link_components.linkmodel import PointingParams, TurbulenceParams, turbulence_log_mean
from src.metrics import clamp_diagnostics
from src.numerics.quadrature import DEFAULT_HERMITE_ORDER, DEFAULT_LEGENDRE_ORDER
from src.numerics.quadrature import gauss_hermite, gauss_legendre
from src.numerics.specfun import ln_gamma, marcum_q_complement, rice_ie

logger = logging.getLogger(__name__)

GAMMA_3_2 = math.exp(ln_gamma(1.5))

# Robust three-point rule for E{phi(theta_V)}: weights at mu_V, mu_V +- sqrt(3) sigma_V.
ROBUST_WEIGHTS = (2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0)
ROBUST_OFFSETS = (0.0, math.sqrt(3.0), -math.sqrt(3.0))


class Method(StrEnum):
    GHQ = "ghq"
    ROBUST = "robust"
    ASYMPTOTIC = "asymptotic"
    EXACT = "exact"
    LEGENDRE = "quadrature"
    SIMPLIFIED = "simplified"


class TpreRobustForm(StrEnum):
    # Theta_E/2 inside the eavesdropper term, outer cut Theta_E/(2 alpha) - Theta_D/alpha.
    HALVED_THRESHOLD = "halved-threshold"
    # The Hermite integrand evaluated at the three robust nodes.
    CONDITIONAL = "conditional"


@dataclass(frozen=True)
class TpResult:
    """A transmission probability and how it was obtained.

    `n_terms` is the quadrature order (0 for closed forms); `clamp_excess`
    is how far the raw value fell outside [0, 1].
    """

    value: float
    method: Method
    n_terms: int = 0
    clamp_excess: float = 0.0

    def __float__(self) -> float:
        return self.value


def _finish(raw: float, method: Method, n_terms: int = 0) -> TpResult:
    value = min(max(raw, 0.0), 1.0)
    excess = abs(raw - value)
    if excess > 0:
        clamp_diagnostics.record(str(method), excess)
    return TpResult(value=value, method=method, n_terms=n_terms, clamp_excess=excess)


def _chi2_below(a: float, radicand: ArrayLike) -> NDArray[np.float64]:
    """Pr{theta_H^2/sigma_H^2 <= radicand}; zero wherever the radicand is negative.

    The indicator is applied before the square root, so a false indicator maps
    to Q_{1/2}(a, 0) = 1, i.e. probability zero.
    """
    r = np.asarray(radicand, dtype=np.float64)
    b = np.sqrt(np.where(r >= 0, r, 0.0))
    return np.atleast_1d(marcum_q_complement(0.5, a, b))


def _hermite_angles(pointing: PointingParams, n: int) -> tuple[NDArray, NDArray]:
    """theta_V at the Hermite nodes in units of sigma_H, and normalized weights."""
    rule = gauss_hermite(n)
    p = pointing
    y = (math.sqrt(2.0) * p.sigma_v * rule.nodes + p.mu_v) / p.sigma_h
    return y, rule.weights / math.sqrt(math.pi)


def _robust_angles(pointing: PointingParams) -> NDArray[np.float64]:
    p = pointing
    return np.array([p.mu_v + k * p.sigma_v for k in ROBUST_OFFSETS])


def _robust_sum(values: NDArray[np.float64]) -> float:
    return float(np.dot(ROBUST_WEIGHTS, values))


def _eve_certain(theta_e: float, alpha: float) -> bool:
    # theta_V^2 + alpha theta_V >= -alpha^2/4, so the eavesdropper event always holds.
    return theta_e <= -0.25 * alpha * alpha


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")


def _asymptotic_prefactor(pointing: PointingParams) -> float:
    p = pointing
    exponent = -0.5 * p.noncentrality - p.mu_v**2 / (2.0 * p.sigma_v**2)
    return math.sqrt(math.pi) / (4.0 * GAMMA_3_2 * p.sigma_v * p.sigma_h) * math.exp(exponent)


# ---------------------------------------------------------------------------
# TPLR
# ---------------------------------------------------------------------------


def tplr_ghq(pointing: PointingParams, theta_d: float, n: int = DEFAULT_HERMITE_ORDER) -> TpResult:
    """Gauss-Hermite approximation of Pr{theta^2 <= Theta_D}."""
    y, w = _hermite_angles(pointing, n)
    if theta_d <= 0:
        return TpResult(0.0, Method.GHQ, n)
    a = math.sqrt(pointing.noncentrality)
    below = _chi2_below(a, theta_d / pointing.sigma_h**2 - y * y)
    # The weights sum to one, so 1 - sum(w Q) is summed as sum(w (1 - Q)).
    return _finish(float(w @ below), Method.GHQ, n)


def tplr_robust(pointing: PointingParams, theta_d: float) -> TpResult:
    """Three-point robust TPLR, tight when sigma_V^2 << sigma_H^2."""
    if theta_d <= 0:
        return TpResult(0.0, Method.ROBUST)
    a = math.sqrt(pointing.noncentrality)
    x = _robust_angles(pointing)
    phi = _chi2_below(a, (theta_d - x * x) / pointing.sigma_h**2)
    return _finish(_robust_sum(phi), Method.ROBUST)


def tplr_asymptotic(pointing: PointingParams, theta_d: float) -> TpResult:
    """Linear small-Theta_D law, valid as G_D -> infinity."""
    if theta_d <= 0:
        return TpResult(0.0, Method.ASYMPTOTIC)
    return _finish(_asymptotic_prefactor(pointing) * theta_d, Method.ASYMPTOTIC)


def turbulence_correction(pointing: PointingParams, g_d: float, turb: TurbulenceParams) -> float:
    """Additive Gamma-Gamma term of the saturated-gain TPLR; never positive."""
    if not g_d > 0:
        raise ValueError(f"g_d must be positive, got {g_d!r}")
    return _asymptotic_prefactor(pointing) * turbulence_log_mean(turb) / g_d


def tplr_turbulence_asymptotic(
    pointing: PointingParams, theta_d: float, g_d: float, turb: TurbulenceParams
) -> TpResult:
    """Saturated-gain TPLR with Gamma-Gamma scintillation on the received power."""
    if theta_d <= 0:
        return TpResult(0.0, Method.ASYMPTOTIC)
    raw = _asymptotic_prefactor(pointing) * theta_d + turbulence_correction(pointing, g_d, turb)
    return _finish(raw, Method.ASYMPTOTIC)


def tplr_hoyt(sigma_v: float, sigma_h: float, theta_d: float) -> TpResult:
    """Exact TPLR for zero means and unequal deviations (Hoyt)."""
    if sigma_v <= 0 or sigma_h <= 0:
        raise ValueError("sigma_v and sigma_h must be positive")
    if sigma_v == sigma_h:
        raise ValueError("equal deviations are the Rayleigh case; use tplr_rayleigh")
    if theta_d <= 0:
        return TpResult(0.0, Method.EXACT)
    q = min(sigma_v, sigma_h) / max(sigma_v, sigma_h)
    q2 = q * q
    k = (1.0 - q2) / (1.0 + q2)
    scale = (1.0 + q2) ** 2 / (4.0 * q2 * (sigma_v**2 + sigma_h**2))
    return _finish(2.0 * q / (1.0 + q2) * rice_ie(k, scale * theta_d), Method.EXACT)


def tplr_hoyt_asymptotic(sigma_v: float, sigma_h: float, theta_d: float) -> TpResult:
    if theta_d <= 0:
        return TpResult(0.0, Method.ASYMPTOTIC)
    raw = math.sqrt(math.pi) * theta_d / (4.0 * sigma_v * sigma_h * GAMMA_3_2)
    return _finish(raw, Method.ASYMPTOTIC)


def tplr_rayleigh(sigma: float, theta_d: float) -> TpResult:
    """1 - exp(-Theta_D / (2 sigma^2)) for zero means and equal deviations."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if theta_d <= 0:
        return TpResult(0.0, Method.EXACT)
    return _finish(-math.expm1(-theta_d / (2.0 * sigma * sigma)), Method.EXACT)


def tplr_rice(mu_v: float, mu_h: float, sigma: float, theta_d: float) -> TpResult:
    """Rice CDF 1 - Q_1(|mu| / sigma, sqrt(Theta_D) / sigma); mu = 0 gives Rayleigh."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    if theta_d <= 0:
        return TpResult(0.0, Method.EXACT)
    a = math.hypot(mu_v, mu_h) / sigma
    return _finish(float(marcum_q_complement(1.0, a, math.sqrt(theta_d) / sigma)), Method.EXACT)


def tplr_rice_asymptotic(mu_v: float, mu_h: float, sigma: float, theta_d: float) -> TpResult:
    if theta_d <= 0:
        return TpResult(0.0, Method.ASYMPTOTIC)
    s2 = sigma * sigma
    raw = math.exp(-(mu_v**2 + mu_h**2) / (2.0 * s2)) * theta_d / (2.0 * s2)
    return _finish(raw, Method.ASYMPTOTIC)


def tplr_exact(pointing: PointingParams, theta_d: float) -> TpResult:
    """Closed-form TPLR for the Rayleigh, Hoyt and Rice special cases."""
    p = pointing
    if p.is_isotropic and p.is_centered:
        return tplr_rayleigh(p.sigma_v, theta_d)
    if p.is_isotropic:
        return tplr_rice(p.mu_v, p.mu_h, p.sigma_v, theta_d)
    if p.is_centered:
        return tplr_hoyt(p.sigma_v, p.sigma_h, theta_d)
    raise ValueError("no closed form for nonzero means with unequal deviations")


# ---------------------------------------------------------------------------
# TPE
# ---------------------------------------------------------------------------


def tpe_ghq(
    pointing: PointingParams, theta_e: float, alpha: float, n: int = DEFAULT_HERMITE_ORDER
) -> TpResult:
    """Gauss-Hermite approximation of Pr{theta^2 + alpha theta_V >= Theta_E}."""
    _check_alpha(alpha)
    y, w = _hermite_angles(pointing, n)
    if _eve_certain(theta_e, alpha):
        return TpResult(1.0, Method.GHQ, n)
    s = pointing.sigma_h
    a = math.sqrt(pointing.noncentrality)
    below = _chi2_below(a, theta_e / s**2 - y * y - (alpha / s) * y)
    return _finish(1.0 - float(w @ below), Method.GHQ, n)


def tpe_robust(pointing: PointingParams, theta_e: float, alpha: float) -> TpResult:
    _check_alpha(alpha)
    if _eve_certain(theta_e, alpha):
        return TpResult(1.0, Method.ROBUST)
    a = math.sqrt(pointing.noncentrality)
    x = _robust_angles(pointing)
    phi = 1.0 - _chi2_below(a, (theta_e - x * x - alpha * x) / pointing.sigma_h**2)
    return _finish(_robust_sum(phi), Method.ROBUST)


def tpe_asymptotic(pointing: PointingParams, theta_e: float, alpha: float) -> TpResult:
    """Linear law as Theta_E -> -alpha^2/4 from above; exactly 1 below it."""
    _check_alpha(alpha)
    gap = alpha * alpha + 4.0 * theta_e
    if gap <= 0:
        return TpResult(1.0, Method.ASYMPTOTIC)
    p = pointing
    exponent = -0.5 * p.noncentrality - (0.5 * alpha + p.mu_v) ** 2 / (2.0 * p.sigma_v**2)
    slope = math.sqrt(math.pi) / (16.0 * p.sigma_h * p.sigma_v * GAMMA_3_2) * math.exp(exponent)
    return _finish(1.0 - slope * gap, Method.ASYMPTOTIC)


# ---------------------------------------------------------------------------
# TPRE
# ---------------------------------------------------------------------------


def tpre_ghq(
    pointing: PointingParams,
    theta_d: float,
    theta_e: float,
    alpha: float,
    n: int = DEFAULT_HERMITE_ORDER,
) -> TpResult:
    """Gauss-Hermite approximation of the joint legitimate/eavesdropper event."""
    _check_alpha(alpha)
    y, w = _hermite_angles(pointing, n)
    if theta_d <= 0:
        return TpResult(0.0, Method.GHQ, n)
    s = pointing.sigma_h
    a = math.sqrt(pointing.noncentrality)
    t_d = theta_d / s**2
    legit = _chi2_below(a, t_d - y * y)
    if _eve_certain(theta_e, alpha):
        # The eavesdropper term vanishes and the integrand is the TPLR one.
        return _finish(float(w @ legit), Method.GHQ, n)

    t_e = theta_e / s**2
    alpha_s = alpha / s
    eve = _chi2_below(a, t_e - y * y - alpha_s * y)
    inside = alpha_s * y >= t_e - t_d
    per_node = np.where(inside, np.maximum(legit - eve, 0.0), 0.0)
    return _finish(float(w @ per_node), Method.GHQ, n)


def tpre_robust(
    pointing: PointingParams,
    theta_d: float,
    theta_e: float,
    alpha: float,
    form: TpreRobustForm = TpreRobustForm.HALVED_THRESHOLD,
) -> TpResult:
    """Three-point robust TPRE.

    The default halved-threshold form uses Theta_E/2 inside the eavesdropper
    term, the indicator Theta_E >= 2(x^2 + alpha x) and the outer cut
    x >= Theta_E/(2 alpha) - Theta_D/alpha. It does not reduce to the Hermite
    integrand; `TpreRobustForm.CONDITIONAL` evaluates that integrand instead.
    """
    _check_alpha(alpha)
    if theta_d <= 0:
        return TpResult(0.0, Method.ROBUST)
    s2 = pointing.sigma_h**2
    a = math.sqrt(pointing.noncentrality)
    x = _robust_angles(pointing)
    legit = _chi2_below(a, (theta_d - x * x) / s2)

    if form is TpreRobustForm.CONDITIONAL:
        if _eve_certain(theta_e, alpha):
            return _finish(_robust_sum(legit), Method.ROBUST)
        eve = _chi2_below(a, (theta_e - x * x - alpha * x) / s2)
        inside = alpha * x >= theta_e - theta_d
        per_node = np.where(inside, np.maximum(legit - eve, 0.0), 0.0)
        return _finish(_robust_sum(per_node), Method.ROBUST)

    eve_on = theta_e >= 2.0 * (x * x + alpha * x)
    # The halved radicand can dip below zero for x < 0 even when eve_on holds.
    halved = np.maximum(theta_e / 2.0 - x * x + alpha * x, 0.0) / s2
    eve = np.where(eve_on, _chi2_below(a, halved), 0.0)
    inside = x >= theta_e / (2.0 * alpha) - theta_d / alpha
    return _finish(_robust_sum(np.where(inside, legit - eve, 0.0)), Method.ROBUST)


def tpre_asymptotic(pointing: PointingParams, theta_d: float) -> TpResult:
    """Large-G_D TPRE; the eavesdropper term has vanished, leaving the TPLR law."""
    return tplr_asymptotic(pointing, theta_d)


def tpre_rayleigh_quadrature(
    sigma: float,
    theta_d: float,
    theta_e_vc: float,
    alpha: float,
    n: int = DEFAULT_LEGENDRE_ORDER,
) -> TpResult:
    """Rayleigh-case TPRE as a Gauss-Legendre integral over X = theta^2 in [0, Theta_D].

    `theta_e_vc` is the threshold on Y = 2 theta^2 + 2 alpha theta_V, i.e.
    `linkmodel.theta_e_rayleigh`. The inner integral over Y is done in closed
    form with an arcsine.
    """
    _check_alpha(alpha)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    rule = gauss_legendre(n)
    if theta_d <= 0:
        return TpResult(0.0, Method.LEGENDRE, n)

    s2 = sigma * sigma
    t_d = theta_d / s2
    t_e = theta_e_vc / s2
    alpha_s = alpha / sigma
    x = 0.5 * t_d * (rule.nodes + 1.0)
    root = np.sqrt(x)
    lower = np.maximum(t_e, 2.0 * x - 2.0 * alpha_s * root)
    # Rounding pushes the ratio to 1 + 1e-16 near the support edge.
    ratio = np.clip((lower - 2.0 * x) / (2.0 * alpha_s * root), -1.0, 1.0)
    inner = np.exp(-0.5 * x) * (alpha_s * math.pi - 2.0 * alpha_s * np.arcsin(ratio))
    raw = t_d / (8.0 * math.pi * alpha_s) * float(rule.weights @ inner)
    return _finish(raw, Method.LEGENDRE, n)


def tpre_rayleigh_simplified(sigma: float, theta_d: float) -> TpResult:
    """Rayleigh TPRE when the eavesdropper event is certain; equals the Rayleigh TPLR."""
    result = tplr_rayleigh(sigma, theta_d)
    return TpResult(result.value, Method.SIMPLIFIED, 0, result.clamp_excess)


def tpre_rayleigh_asymptotic(sigma: float, theta_d: float) -> TpResult:
    """Theta_D / (2 sigma^2) = ln(K1 G_D / lambda_D) / (2 sigma^2 G_D)."""
    if theta_d <= 0:
        return TpResult(0.0, Method.ASYMPTOTIC)
    return _finish(theta_d / (2.0 * sigma * sigma), Method.ASYMPTOTIC)


def joint_pdf_xy(sigma: float, alpha: float, x: ArrayLike, y: ArrayLike) -> NDArray | float:
    """Joint density of X = theta^2 and Y = 2 theta^2 + 2 alpha theta_V (Rayleigh case).

    Supported on x >= 0, 2x - 2 alpha sqrt(x) <= y <= 2x + 2 alpha sqrt(x); the
    density diverges on the support edges, which carry no mass, so they return 0.
    """
    if sigma <= 0 or alpha <= 0:
        raise ValueError("sigma and alpha must be positive")
    x_arr, y_arr = np.broadcast_arrays(
        np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    )
    offset = (y_arr - 2.0 * x_arr) / (2.0 * alpha)
    bracket = x_arr - offset * offset
    inside = (x_arr >= 0) & (bracket > 0)
    safe = np.where(inside, bracket, 1.0)
    s2 = sigma * sigma
    density = np.exp(-x_arr / (2.0 * s2)) / (4.0 * math.pi * s2 * alpha * np.sqrt(safe))
    result = np.where(inside, density, 0.0)
    return float(result) if result.ndim == 0 else result
