"""Sweep, Monte Carlo validation and node-dump operations behind the CLI.

Each operation returns its CSV or report text; `src.cli` decides where it goes.
"""

import csv
import io
import logging
import math
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from src.link_components import linkmodel, oracle, transmission
from src.link_components.linkmodel import PointingParams, Scenario
from src.link_components.oracle import EstimateWithError
from src.link_components.transmission import TpResult
from src.metrics import emit_metric
from src.numerics import quadrature
from src.numerics.quadrature import DEFAULT_HERMITE_ORDER, DEFAULT_LEGENDRE_ORDER, RuleKind

logger = logging.getLogger(__name__)

Z_THRESHOLD = 4.0


class Target(StrEnum):
    TPLR = "tplr"
    TPE = "tpe"
    TPRE = "tpre"
    TPRE_RAYLEIGH = "tpre-rayleigh"


class SweepVariable(StrEnum):
    THETA_D = "theta-d"
    THETA_E = "theta-e"
    GD = "gd"


class Spacing(StrEnum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class GridPoint:
    """Thresholds at one sweep value. `theta_e` follows the theta^2 + alpha theta_V
    convention; `theta_e_vc` is its doubled Rayleigh-quadrature counterpart."""

    scenario: Scenario
    theta_d: float
    theta_e: float
    theta_e_vc: float
    order: int

    @property
    def pointing(self) -> PointingParams:
        return self.scenario.pointing

    @property
    def alpha(self) -> float:
        return self.scenario.alpha


Evaluator = Callable[[GridPoint], TpResult]


def _rayleigh_sigma(point: GridPoint) -> float:
    return point.pointing.sigma_v


def _simplified(point: GridPoint) -> TpResult:
    if point.theta_e > -0.25 * point.alpha**2:
        raise ValueError("simplified Rayleigh TPRE requires Theta_E <= -alpha^2/4")
    return transmission.tpre_rayleigh_simplified(_rayleigh_sigma(point), point.theta_d)


def _turbulence(point: GridPoint) -> TpResult:
    s = point.scenario
    assert s.turbulence is not None
    return transmission.tplr_turbulence_asymptotic(s.pointing, point.theta_d, s.g_d, s.turbulence)


EVALUATORS: dict[Target, dict[str, Evaluator]] = {
    Target.TPLR: {
        "ghq": lambda p: transmission.tplr_ghq(p.pointing, p.theta_d, p.order),
        "robust": lambda p: transmission.tplr_robust(p.pointing, p.theta_d),
        "asymptotic": lambda p: transmission.tplr_asymptotic(p.pointing, p.theta_d),
        "exact": lambda p: transmission.tplr_exact(p.pointing, p.theta_d),
        "turbulence": _turbulence,
    },
    Target.TPE: {
        "ghq": lambda p: transmission.tpe_ghq(p.pointing, p.theta_e, p.alpha, p.order),
        "robust": lambda p: transmission.tpe_robust(p.pointing, p.theta_e, p.alpha),
        "asymptotic": lambda p: transmission.tpe_asymptotic(p.pointing, p.theta_e, p.alpha),
    },
    Target.TPRE: {
        "ghq": lambda p: transmission.tpre_ghq(p.pointing, p.theta_d, p.theta_e, p.alpha, p.order),
        "robust": lambda p: transmission.tpre_robust(p.pointing, p.theta_d, p.theta_e, p.alpha),
        "asymptotic": lambda p: transmission.tpre_asymptotic(p.pointing, p.theta_d),
    },
    Target.TPRE_RAYLEIGH: {
        "quadrature": lambda p: transmission.tpre_rayleigh_quadrature(
            _rayleigh_sigma(p), p.theta_d, p.theta_e_vc, p.alpha, p.order
        ),
        "simplified": _simplified,
        "asymptotic": lambda p: transmission.tpre_rayleigh_asymptotic(
            _rayleigh_sigma(p), p.theta_d
        ),
    },
}

VARIABLES: dict[Target, tuple[SweepVariable, ...]] = {
    Target.TPLR: (SweepVariable.THETA_D, SweepVariable.GD),
    Target.TPE: (SweepVariable.THETA_E, SweepVariable.GD),
    Target.TPRE: (SweepVariable.THETA_D, SweepVariable.THETA_E, SweepVariable.GD),
    Target.TPRE_RAYLEIGH: (SweepVariable.THETA_D, SweepVariable.THETA_E, SweepVariable.GD),
}


def default_order(target: Target) -> int:
    return DEFAULT_LEGENDRE_ORDER if target is Target.TPRE_RAYLEIGH else DEFAULT_HERMITE_ORDER


def _check_target(target: Target, scenario: Scenario, methods: tuple[str, ...]) -> None:
    allowed = EVALUATORS[target]
    unknown = [m for m in methods if m not in allowed]
    if unknown:
        raise ValueError(
            f"Unknown method(s) {', '.join(unknown)} for {target}; choose from {', '.join(allowed)}"
        )
    pointing = scenario.pointing
    if target is Target.TPRE_RAYLEIGH and not (pointing.is_centered and pointing.is_isotropic):
        raise ValueError("tpre-rayleigh needs zero means and sigma_v == sigma_h")
    if "turbulence" in methods and scenario.turbulence is None:
        raise ValueError("method 'turbulence' needs alpha_d and beta_d in the scenario")
    if "exact" in methods and not (pointing.is_centered or pointing.is_isotropic):
        raise ValueError("method 'exact' needs zero means or sigma_v == sigma_h")


@dataclass(frozen=True)
class SweepRange:
    start: float
    stop: float
    count: int
    spacing: Spacing = Spacing.LINEAR

    def __post_init__(self) -> None:
        if self.count < 2:
            raise ValueError(f"Sweep needs at least 2 points, got {self.count}")
        if not self.start < self.stop:
            raise ValueError(f"Sweep start must be below stop, got {self.start} >= {self.stop}")
        if self.spacing is Spacing.LOG and self.start <= 0:
            raise ValueError("Log spacing needs a positive start")

    @classmethod
    def parse(cls, text: str) -> "SweepRange":
        """Parse `start:stop:count[:log]`."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"Invalid range {text!r}; expected start:stop:count[:log]")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError(f"Invalid range {text!r}; expected start:stop:count[:log]") from None
        spacing = Spacing.LINEAR
        if len(parts) == 4:
            try:
                spacing = Spacing(parts[3])
            except ValueError:
                raise ValueError(
                    f"Invalid spacing {parts[3]!r}; expected 'log' or 'linear'"
                ) from None
        return cls(start, stop, count, spacing)

    def grid(self) -> np.ndarray:
        if self.spacing is Spacing.LOG:
            values = np.geomspace(self.start, self.stop, self.count)
        else:
            values = np.linspace(self.start, self.stop, self.count)
        # Keep the requested endpoints exact.
        values[0], values[-1] = self.start, self.stop
        return values


@dataclass(frozen=True)
class MonteCarloSpec:
    n_samples: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError(f"Monte Carlo needs at least one sample, got {self.n_samples}")


@dataclass(frozen=True)
class SweepSpec:
    target: Target
    sweep_variable: SweepVariable
    range: SweepRange
    methods: tuple[str, ...]
    scenario: Scenario
    quadrature_order: int | None = None
    mc: MonteCarloSpec | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.methods:
            raise ValueError("At least one method is required")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("Methods must not repeat")
        if self.sweep_variable not in VARIABLES[self.target]:
            allowed = ", ".join(VARIABLES[self.target])
            raise ValueError(
                f"Cannot sweep {self.sweep_variable} for {self.target}; choose from {allowed}"
            )
        _check_target(self.target, self.scenario, self.methods)
        if self.sweep_variable is SweepVariable.GD and self.range.start <= 0:
            raise ValueError("G_D sweeps need a positive start")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @property
    def order(self) -> int:
        return self.quadrature_order or default_order(self.target)


def grid_point(
    scenario: Scenario, variable: SweepVariable | None, value: float, order: int
) -> GridPoint:
    """Thresholds with `variable` set to `value`; None evaluates the scenario as configured."""
    if variable is SweepVariable.GD:
        scenario = scenario.with_gain(value)
    theta_d = linkmodel.theta_d(scenario)
    theta_e = linkmodel.theta_e(scenario)
    theta_e_vc = linkmodel.theta_e_rayleigh(scenario)
    if variable is SweepVariable.THETA_D:
        theta_d = value
    elif variable is SweepVariable.THETA_E:
        theta_e, theta_e_vc = value, 2.0 * value
    return GridPoint(scenario, theta_d, theta_e, theta_e_vc, order)


def monte_carlo(
    target: Target, point: GridPoint, mc: MonteCarloSpec, workers: int = 1
) -> EstimateWithError:
    s = point.scenario
    if target is Target.TPLR:
        return oracle.mc_tplr(s.pointing, point.theta_d, mc.n_samples, mc.seed, workers)
    if target is Target.TPE:
        return oracle.mc_tpe(s.pointing, point.theta_e, s.alpha, mc.n_samples, mc.seed, workers)
    # Y >= Theta_E^VC is the same event as theta^2 + alpha theta_V >= Theta_E.
    return oracle.mc_tpre(
        s.pointing, point.theta_d, point.theta_e, s.alpha, mc.n_samples, mc.seed, workers
    )


def _cell(target: Target, method: str, point: GridPoint, value: float) -> float:
    try:
        return EVALUATORS[target][method](point).value
    except (ArithmeticError, ValueError) as exc:
        logger.warning("%s/%s failed at sweep value %s: %s", target, method, value, exc)
        return math.nan


def _row(spec: SweepSpec, value: float) -> list[float]:
    point = grid_point(spec.scenario, spec.sweep_variable, value, spec.order)
    row = [value] + [_cell(spec.target, m, point, value) for m in spec.methods]
    if spec.mc is not None:
        try:
            est = monte_carlo(spec.target, point, spec.mc)
            row += [est.estimate, est.std_error]
        except (ArithmeticError, ValueError) as exc:
            logger.warning("Monte Carlo failed at sweep value %s: %s", value, exc)
            row += [math.nan, math.nan]
    return row


def _format(value: float) -> str:
    # Shortest text that parses back to the same double.
    return repr(float(value))


def _to_csv(header: list[str], rows: list[list[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(v) for v in row])
    return buffer.getvalue()


def run_sweep(spec: SweepSpec) -> str:
    """Evaluate every method over the sweep grid and return the CSV document.

    Rows follow ascending sweep order whatever order workers finish in. A cell
    whose method fails holds `nan`; the sweep carries on.
    """
    grid = spec.range.grid().tolist()
    start = time.perf_counter()
    if spec.workers == 1:
        rows = [_row(spec, v) for v in grid]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(lambda v: _row(spec, v), grid))
    elapsed = time.perf_counter() - start

    header = ["sweep_value", *spec.methods]
    if spec.mc is not None:
        header += ["mc_estimate", "mc_stderr"]

    emit_metric(
        namespace="sweep",
        metrics={
            "RowCount": (len(rows), "Count"),
            "Duration": (elapsed, "Seconds"),
        },
        dimensions={"Target": str(spec.target), "Variable": str(spec.sweep_variable)},
    )
    return _to_csv(header, rows)


@dataclass(frozen=True)
class ValidationReport:
    target: Target
    method: str
    analytic: float
    estimate: EstimateWithError

    @property
    def std_error(self) -> float:
        """Monte Carlo standard error, floored by the binomial error of the analytic value.

        An all-miss or all-hit run reports zero error even when the analytic
        probability predicts a fraction of one hit.
        """
        p = min(max(self.analytic, 0.0), 1.0)
        n = self.estimate.n_samples
        return max(self.estimate.std_error, math.sqrt(p * (1.0 - p) / n))

    @property
    def z_score(self) -> float:
        gap = abs(self.analytic - self.estimate.estimate)
        if self.std_error == 0:
            return 0.0 if gap == 0 else math.inf
        return gap / self.std_error

    @property
    def passed(self) -> bool:
        return self.z_score <= Z_THRESHOLD

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 2

    def render(self) -> str:
        est = self.estimate
        lines = [
            f"target: {self.target}",
            f"method: {self.method}",
            f"analytic: {_format(self.analytic)}",
            f"mc_estimate: {_format(est.estimate)}",
            f"mc_stderr: {_format(est.std_error)}",
            f"n_samples: {est.n_samples}",
            f"seed: {est.seed}",
            f"z_score: {_format(self.z_score)}",
            f"result: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines) + "\n"


def run_mc_validate(
    scenario: Scenario,
    target: Target,
    mc: MonteCarloSpec,
    method: str | None = None,
    order: int | None = None,
    workers: int = 1,
) -> ValidationReport:
    """Compare one analytic value at the scenario's own G_D with a Monte Carlo estimate.

    `method` defaults to the target's primary form (ghq, or the Legendre
    quadrature for tpre-rayleigh). The report fails (exit code 2) when
    |analytic - mc| exceeds 4 standard errors.
    """
    method = method or next(iter(EVALUATORS[target]))
    _check_target(target, scenario, (method,))
    point = grid_point(scenario, None, scenario.g_d, order or default_order(target))
    analytic = EVALUATORS[target][method](point).value
    estimate = monte_carlo(target, point, mc, workers)
    report = ValidationReport(target, method, analytic, estimate)

    emit_metric(
        namespace="validation",
        metrics={"ZScore": (report.z_score, "None")},
        dimensions={"Target": str(target), "Method": method},
    )
    if not report.passed:
        logger.warning("Validation failed for %s/%s: z = %.3g", target, method, report.z_score)
    return report


def dump_nodes(kind: RuleKind | str, n: int) -> str:
    """CSV of the rule's (node, weight) pairs in ascending node order."""
    rule = quadrature.rule(kind, n)
    return _to_csv(["node", "weight"], [[node, weight] for node, weight in rule])
