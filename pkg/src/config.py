import io
import logging
import math
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from dotenv.parser import parse_stream

from src.link_components.linkmodel import (
    LinkBudget,
    PointingParams,
    Scenario,
    TurbulenceParams,
    db_to_watts,
    telescope_gain,
)

logger = logging.getLogger(__name__)

SCENARIOS_DIR = Path(__file__).resolve().parents[1] / "scenarios"

POINTING_KEYS = {"mu_v", "mu_h", "sigma_v", "sigma_v_sq", "sigma_h", "sigma_h_sq"}
BUDGET_KEYS = (
    "p_s", "g_s", "g_e", "eta_s", "eta_d", "eta_e", "eta_q", "eta_b",
    "lambda1", "lambda2", "z1", "z2", "la1", "la2",
)
SCENARIO_KEYS = {"g_d", "d_d", "lambda_d", "lambda_e", "alpha", "k1", "k2"}
TURBULENCE_KEYS = {"alpha_d", "beta_d"}
KNOWN_KEYS = POINTING_KEYS | set(BUDGET_KEYS) | SCENARIO_KEYS | TURBULENCE_KEYS


class ConfigError(ValueError):
    """A scenario file problem, rendered as `path:line: message`."""

    def __init__(self, message: str, path: Path | str | None = None, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.path = path
        self.line = line

    def __str__(self) -> str:
        location = str(self.path) if self.path is not None else "<config>"
        if self.line is not None:
            location = f"{location}:{self.line}"
        return f"{location}: {self.message}"


def list_presets() -> list[str]:
    if not SCENARIOS_DIR.exists():
        logger.warning("Scenarios directory not found: %s", SCENARIOS_DIR)
        return []
    return sorted(path.stem for path in SCENARIOS_DIR.glob("*.conf"))


def resolve_config(name_or_path: str | Path) -> Path:
    """Return an existing file path, or the shipped preset of that name."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    preset = SCENARIOS_DIR / f"{name_or_path}.conf"
    if preset.is_file():
        return preset
    presets = ", ".join(list_presets()) or "none"
    raise ConfigError(f"no such file or preset (presets: {presets})", path=name_or_path)


def read_entries(text: str, path: Path | str = "<config>") -> dict[str, tuple[str, int]]:
    """Parse `key = value` lines into {key: (value, line)}.

    Blank lines, `#` comments and inline comments after whitespace are ignored.
    """
    entries: dict[str, tuple[str, int]] = {}
    for binding in parse_stream(io.StringIO(text)):
        raw = binding.original.string
        # Leading blank lines are folded into the binding that follows them.
        line = binding.original.line + raw[: len(raw) - len(raw.lstrip())].count("\n")
        if binding.error:
            raise ConfigError(f"cannot parse {raw.strip()!r}", path=path, line=line)
        if binding.key is None:
            continue
        key = binding.key.lower()
        if binding.value is None or binding.value == "":
            raise ConfigError(f"missing value for {key!r}", path=path, line=line)
        if key in entries:
            message = f"duplicate key {key!r} (first set on line {entries[key][1]})"
            raise ConfigError(message, path=path, line=line)
        if key not in KNOWN_KEYS:
            logger.warning("%s:%d: ignoring unknown key %r", path, line, key)
            continue
        entries[key] = (binding.value.strip(), line)
    return entries


class _Reader:
    def __init__(self, entries: dict[str, tuple[str, int]], path: Path | str):
        self.entries = entries
        self.path = path

    def has(self, key: str) -> bool:
        return key in self.entries

    def error(self, message: str, key: str | None = None) -> ConfigError:
        line = self.entries[key][1] if key is not None and key in self.entries else None
        return ConfigError(message, path=self.path, line=line)

    def number(self, key: str) -> float:
        if key not in self.entries:
            raise self.error(f"missing required key {key!r}")
        text = self.entries[key][0]
        scale = None
        if key == "p_s" and text.lower().endswith("db"):
            text = text[:-2].strip()
            scale = db_to_watts
        try:
            value = float(text)
        except ValueError:
            raise self.error(f"{key} is not a number: {text!r}", key) from None
        if not math.isfinite(value):
            raise self.error(f"{key} must be finite", key)
        return scale(value) if scale else value

    def one_of(self, plain: str, squared: str) -> float:
        if self.has(plain) and self.has(squared):
            raise self.error(f"give {plain} or {squared}, not both", squared)
        if self.has(squared):
            value = self.number(squared)
            if value <= 0:
                raise self.error(f"{squared} must be positive", squared)
            return math.sqrt(value)
        return self.number(plain)

    @contextmanager
    def blame(self, key: str | None = None) -> Iterator[None]:
        """Re-raise validation errors as ConfigError pointing at `key`'s line."""
        try:
            yield
        except ConfigError:
            raise
        except ValueError as exc:
            raise self.error(str(exc), key) from exc


def parse_scenario(text: str, path: Path | str = "<config>") -> Scenario:
    """Build a Scenario from scenario-file text."""
    reader = _Reader(read_entries(text, path), path)

    with reader.blame("mu_h"):
        pointing = PointingParams(
            mu_v=reader.number("mu_v"),
            mu_h=reader.number("mu_h"),
            sigma_v=reader.one_of("sigma_v", "sigma_v_sq"),
            sigma_h=reader.one_of("sigma_h", "sigma_h_sq"),
        )

    budget = None
    present = [key for key in BUDGET_KEYS if reader.has(key)]
    if len(present) == len(BUDGET_KEYS):
        with reader.blame():
            budget = LinkBudget(**{key: reader.number(key) for key in BUDGET_KEYS})

    k1 = reader.number("k1") if reader.has("k1") else None
    k2 = reader.number("k2") if reader.has("k2") else None
    if budget is not None and (k1 is not None or k2 is not None):
        logger.warning("%s: explicit k1/k2 override the link budget", path)
    if budget is None and (k1 is None or k2 is None):
        missing = [key for key in BUDGET_KEYS if key not in present]
        raise reader.error(f"need k1 and k2 or a full link budget (missing: {', '.join(missing)})")

    if reader.has("g_d") and reader.has("d_d"):
        raise reader.error("give g_d or d_d, not both", "d_d")
    if reader.has("d_d"):
        with reader.blame("d_d"):
            g_d = telescope_gain(reader.number("d_d"), reader.number("lambda1"))
    else:
        g_d = reader.number("g_d")

    turbulence = None
    if reader.has("alpha_d") or reader.has("beta_d"):
        with reader.blame("alpha_d"):
            turbulence = TurbulenceParams(reader.number("alpha_d"), reader.number("beta_d"))

    with reader.blame():
        return Scenario(
            pointing=pointing,
            g_d=g_d,
            lambda_d=reader.number("lambda_d"),
            lambda_e=reader.number("lambda_e"),
            alpha=reader.number("alpha"),
            budget=budget,
            k1_override=k1,
            k2_override=k2,
            turbulence=turbulence,
        )


def load_scenario(name_or_path: str | Path) -> Scenario:
    path = resolve_config(name_or_path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read file: {exc}", path=path) from exc
    scenario = parse_scenario(text, path)
    logger.info("Loaded scenario from %s", path)
    return scenario
