"""Tests for src/config.py: preset loading and scenario-file diagnostics."""

import io
import logging
import math

import pytest
from dotenv.parser import parse_stream

from src import config
from src.config import ConfigError
from src.link_components import linkmodel

MINIMAL = """\
# comment line
mu_v = 1e-8
mu_h = 5e-8
sigma_v_sq = 1e-12
sigma_h_sq = 1e-11

k1 = 1.926e-19
k2 = 7.704e-21
g_d = 1e10
lambda_d = 1e-15
lambda_e = 1e-20
alpha = 1e-9
"""

BUDGET = """\
p_s = 0 dB
g_s = 1e9
g_e = 1e9
eta_s = 0.9
eta_d = 0.9
eta_e = 0.9
eta_q = 0.1
eta_b = 0.04
lambda1 = 780e-9
lambda2 = 780e-9
z1 = 9e5
z2 = 9e5
la1 = 0.5
la2 = 0.5
"""


def without(text, key):
    lines = text.splitlines(keepends=True)
    return "".join(line for line in lines if not line.startswith(f"{key} "))


def with_budget():
    return without(without(MINIMAL, "k1"), "k2") + BUDGET


@pytest.mark.parametrize("name", config.list_presets())
def test_every_preset_loads(name):
    scenario = config.load_scenario(name)
    assert scenario.g_d > 0
    assert scenario.k1 > 0 and scenario.k2 > 0


def test_presets_cover_the_shipped_scenarios():
    shipped = {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "turbulence"}
    assert shipped <= set(config.list_presets())
    assert config.load_scenario("turbulence").turbulence is not None
    fig9 = config.load_scenario("fig9").pointing
    assert fig9.is_centered and fig9.is_isotropic


def test_minimal_file_parses_squared_deviations():
    scenario = config.parse_scenario(MINIMAL)
    assert scenario.pointing.sigma_v == pytest.approx(1e-6)
    assert scenario.pointing.sigma_h == pytest.approx(math.sqrt(1e-11))
    assert (scenario.k1, scenario.k2) == (1.926e-19, 7.704e-21)
    assert scenario.budget is None


def test_full_budget_gives_link_constants_and_db_power():
    scenario = config.parse_scenario(with_budget())
    assert scenario.budget.p_s == 1.0
    assert scenario.k1 == pytest.approx(1.926e-19, rel=1e-3)
    louder = config.parse_scenario(with_budget().replace("p_s = 0 dB", "p_s = 30 dB"))
    assert louder.budget.p_s == pytest.approx(1000.0)


def test_explicit_constants_override_the_budget_with_a_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="src.config"):
        scenario = config.parse_scenario(with_budget() + "k1 = 3e-19\n", "override.conf")
    assert scenario.k1 == 3e-19
    assert "override" in caplog.text


def test_aperture_diameter_sets_the_gain():
    text = without(with_budget(), "g_d") + "d_d = 0.1\n"
    assert config.parse_scenario(text).g_d == pytest.approx(linkmodel.telescope_gain(0.1, 780e-9))


def test_inline_comments_are_ignored():
    scenario = config.parse_scenario(MINIMAL.replace("alpha = 1e-9", "alpha = 2e-9  # tilt"))
    assert scenario.alpha == 2e-9


def test_unknown_keys_are_warned_about(caplog):
    with caplog.at_level(logging.WARNING, logger="src.config"):
        config.parse_scenario(MINIMAL + "colour = blue\n", "extra.conf")
    assert "extra.conf:13" in caplog.text
    assert "colour" in caplog.text


def test_bad_number_reports_its_line():
    with pytest.raises(ConfigError) as info:
        config.parse_scenario(MINIMAL.replace("mu_h = 5e-8", "mu_h = five"), "bad.conf")
    assert info.value.line == 3
    assert str(info.value).startswith("bad.conf:3: ")


def test_line_without_equals_sign_is_a_parse_error():
    with pytest.raises(ConfigError) as info:
        config.parse_scenario(MINIMAL.replace("mu_h = 5e-8", "mu_h 5e-8"), "bad.conf")
    assert info.value.line == 3


def test_line_numbers_count_blank_lines():
    with pytest.raises(ConfigError) as info:
        config.parse_scenario(MINIMAL.replace("k1 = 1.926e-19", "k1 = nan"), "bad.conf")
    assert info.value.line == 7


def test_duplicate_key_is_rejected():
    with pytest.raises(ConfigError, match="first set on line 2") as info:
        config.parse_scenario(MINIMAL + "mu_v = 2e-8\n", "dup.conf")
    assert info.value.line == 13


def test_missing_value_is_rejected():
    with pytest.raises(ConfigError, match="missing value"):
        config.parse_scenario(MINIMAL.replace("alpha = 1e-9", "alpha ="))


def test_missing_required_key_is_rejected():
    with pytest.raises(ConfigError, match="lambda_d"):
        config.parse_scenario(without(MINIMAL, "lambda_d"))


def test_constants_or_budget_are_required():
    with pytest.raises(ConfigError, match="need k1 and k2"):
        config.parse_scenario(without(MINIMAL, "k2"))


def test_plain_and_squared_deviation_together_are_rejected():
    with pytest.raises(ConfigError, match="not both"):
        config.parse_scenario(MINIMAL + "sigma_v = 1e-6\n")


def test_invalid_physical_value_points_at_its_key():
    with pytest.raises(ConfigError) as info:
        config.parse_scenario(with_budget().replace("eta_q = 0.1", "eta_q = 1.5"), "eta.conf")
    assert "eta_q" in info.value.message


def test_unknown_preset_lists_the_available_ones():
    with pytest.raises(ConfigError, match="fig3"):
        config.resolve_config("no-such-scenario")


def test_scenario_loads_from_a_path(tmp_path):
    path = tmp_path / "custom.conf"
    path.write_text(MINIMAL, encoding="utf-8")
    assert config.load_scenario(path).alpha == 1e-9
    assert config.load_scenario(str(path)).alpha == 1e-9


def test_dotenv_bindings_carry_the_fields_the_reader_uses():
    text = "mu_v = 1e-8  # inline\n\n# note\nbad line here\n"
    first, comment, broken = list(parse_stream(io.StringIO(text)))
    assert (first.key, first.value, first.error) == ("mu_v", "1e-8", False)
    assert first.original.line == 1
    assert first.original.string.startswith("mu_v")
    assert comment.key is None and not comment.error
    assert comment.original.string.startswith("\n")
    assert broken.error
