import math
from pathlib import Path
from typing import Callable

import pytest

from fkhull.cohomology import FloorPolicy
from fkhull.entities.config import RunMode, load_config, override, parse_config, parse_modes
from fkhull.exceptions import FKHullConfigError, FKHullValidationError
from fkhull.utils import GOLDEN_MEAN

WriteConfig = Callable[..., Path]

GOLDEN = """\
[run]
mode = short

[basis]
omega_golden = true
alpha = 1
rho = 0.05

[index]
N = 1
K = 64

[shell_U]
sin 1:1 = 0.05
"""

LADDER = """\
[run]
mode = ladder

[basis]
omega_golden = true
rho = 0.1

[index]
K = 12

[ladder]
rho = 0.1
rho_inf = 0.05

[level.1]
alpha = 1
sin 1:1 = 0.01

[level.2]
alpha = 0.7071067811865476
nu = 0.01
sin 1:1 2:1 = 0.005
"""


def test_minimal_short_config() -> None:
    config = parse_config(GOLDEN)
    assert config.run.mode is RunMode.SHORT
    assert config.basis.rotation == pytest.approx(2 * math.pi * GOLDEN_MEAN)
    assert config.basis.alpha == [1.0]
    assert config.index.K == 64 and config.index.s == 1.0
    assert config.shell_U == {"1:1": (0.0, -0.025), "1:-1": (0.0, 0.025)}
    assert config.shell_V is None and config.long is None
    assert config.solver.divisor_policy is FloorPolicy.ERROR
    assert config.oracle.p == 233 and config.oracle.q == 377


def test_mode_lines() -> None:
    modes = parse_modes({"cos 1:2": "0.1", "cos 0": "0.3", "1:1 2:-1": "0.5, 0.25", "sin 0": "1.0"})
    assert modes == {
        "1:2": (0.05, 0.0),
        "1:-2": (0.05, 0.0),
        "": (0.3, 0.0),
        "1:1 2:-1": (0.5, 0.25),
    }
    # lines naming the same mode add up
    assert parse_modes({"cos 1:1": "0.2", "1:1": "0.1"})["1:1"] == pytest.approx((0.2, 0.0))


@pytest.mark.parametrize("key, value", [("1:x", "0.1"), ("sin 1:1", "big"), ("1:1", "1, 2, 3")])
def test_bad_mode_lines(key: str, value: str) -> None:
    with pytest.raises(FKHullConfigError) as info:
        parse_modes({key: value}, where="shell_U")
    assert "[shell_U]" in info.value.detail


def test_level_sections() -> None:
    config = parse_config(LADDER)
    assert config.run.mode is RunMode.LADDER
    assert config.ladder is not None and config.ladder.rho_inf == 0.05
    assert [level.alpha for level in config.levels] == [1.0, 0.7071067811865476]
    assert config.levels[0].nu is None and config.levels[1].nu == 0.01
    assert config.levels[1].modes == {"1:1 2:1": (0.0, -0.0025), "1:-1 2:-1": (0.0, 0.0025)}


@pytest.mark.parametrize(
    "text, field",
    [
        (GOLDEN.replace("rho = 0.05", "rho = -1"), "basis.rho"),
        (GOLDEN.replace("omega_golden = true", "omega_golden = true\nomega = 2.0"), "basis.__root__"),
        (GOLDEN.replace("alpha = 1", "alpha = 1, 1"), "basis.alpha"),
        (GOLDEN.replace("K = 64", "K = 0"), "index.K"),
        (GOLDEN.replace("mode = short", "mode = sideways"), "run.mode"),
        (GOLDEN.replace("mode = short", "mode = short\nlog_level = loud"), "run.log_level"),
        (GOLDEN.replace("sin 1:1", "sin 2:1"), "__root__"),
        (GOLDEN.replace("mode = short", "mode = verify"), "__root__"),
        (GOLDEN + "\n[oracle]\np = 2\nq = 4\n", "oracle.__root__"),
        (GOLDEN.replace("[index]\nN = 1\nK = 64\n", ""), "index"),
    ],
)
def test_validation_errors_name_fields(text: str, field: str) -> None:
    with pytest.raises(FKHullValidationError) as info:
        parse_config(text)
    assert field in info.value.fields
    assert field in info.value.detail


@pytest.mark.parametrize(
    "text",
    [
        GOLDEN + "\n[extras]\nx = 1\n",
        LADDER.replace("[level.2]", "[level.3]"),
        LADDER.replace("[level.2]", "[level.two]"),
        GOLDEN + "\n[run]\nseed = 1\n",
        "not an ini file",
    ],
)
def test_unreadable_configs(text: str) -> None:
    with pytest.raises(FKHullConfigError):
        parse_config(text)


def test_ladder_mode_needs_levels() -> None:
    with pytest.raises(FKHullValidationError):
        parse_config(GOLDEN.replace("mode = short", "mode = ladder"))


def test_paths_resolve_next_to_the_file(write_config: WriteConfig, tmp_path: Path) -> None:
    (tmp_path / "hull.coeffs").write_text("# N=1 s=1.0 K=64.0 rho=0.05\n")
    path = write_config(GOLDEN.replace("mode = short", "mode = verify\nhull = hull.coeffs"))
    config = load_config(path)
    assert config.run.hull == tmp_path / "hull.coeffs"
    assert config.source == path

    with pytest.raises(FKHullValidationError) as info:
        load_config(write_config(GOLDEN.replace("mode = short", "mode = verify\nhull = absent.coeffs"), "b.ini"))
    assert "run.hull" in info.value.fields


def test_missing_config_file(tmp_path: Path) -> None:
    with pytest.raises(FKHullConfigError):
        load_config(tmp_path / "absent.ini")


def test_override_revalidates() -> None:
    config = parse_config(GOLDEN.replace("mode = short", "mode = short\nlog_level = debug"))
    assert config.run.log_level == "DEBUG"
    long = override(config, mode=RunMode.LONG)
    assert long.run.mode is RunMode.LONG
    assert long.long is not None and long.long.include_short
    assert override(config, mode=None).run.mode is RunMode.SHORT
    with pytest.raises(FKHullValidationError):
        override(config, mode=RunMode.VERIFY)
