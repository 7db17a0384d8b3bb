"""Run configuration: INI text validated into pydantic models.

Example file::

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

Mode lines in ``[shell_U]``, ``[shell_V]`` and ``[level.<n>]`` sections are
``<multi-index> = re[, im]`` or ``cos <multi-index> = amplitude`` /
``sin <multi-index> = amplitude``.
"""

import configparser
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, Field, FilePath, PositiveFloat, PositiveInt, root_validator, validator
from pydantic.error_wrappers import ValidationError

from ..cohomology import FloorPolicy
from ..diophantine import DiophantineStyle
from ..exceptions import FKHullConfigError, FKHullIndexSpaceError, FKHullValidationError
from ..index_space import DEFAULT_CAP, MultiIndex
from ..utils import GOLDEN_MEAN, fibonacci_convergent, parse_complex, parse_float_list

logger = logging.getLogger(__name__)

ModeTable = Dict[str, Tuple[float, float]]

SECTIONS = ("run", "basis", "index", "solver", "shell_U", "shell_V", "long", "ladder", "oracle", "diophantine")
LEVEL_PREFIX = "level."
LEVEL_KEYS = ("alpha", "nu", "tau")


class RunMode(str, Enum):
    SHORT = "short"
    LONG = "long"
    LADDER = "ladder"
    VERIFY = "verify"
    ORACLE = "oracle"


class RunSection(BaseModel):
    mode: RunMode = RunMode.SHORT
    out: Path = Path("out")
    seed: int = 0
    log_level: str = "WARNING"
    # hull dump to verify, or initial guess of a solve
    hull: Optional[FilePath] = None
    # verify a long-range hull instead of a short-range one
    long: bool = False

    @validator("log_level")
    def _level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            raise ValueError(f"unknown log level {value!r}")
        return value


class BasisSection(BaseModel):
    omega: Optional[float] = None
    omega_golden: bool = False
    alpha: List[float] = Field(default_factory=lambda: [1.0])
    rho: PositiveFloat
    iota: PositiveFloat = 1.0

    @validator("alpha", pre=True)
    def _alpha(cls, value: Any) -> Any:
        return parse_float_list(value) if isinstance(value, str) else value

    @validator("alpha")
    def _alpha_range(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one frequency is required")
        if any(not 0 < a <= 1 for a in value):
            raise ValueError("entries must lie in (0, 1]")
        if len(set(value)) != len(value):
            raise ValueError("entries must be pairwise distinct")
        return value

    @root_validator(skip_on_failure=True)
    def _omega(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values["omega_golden"] == (values["omega"] is not None):
            raise ValueError("give exactly one of omega and omega_golden")
        return values

    @property
    def rotation(self) -> float:
        return 2.0 * math.pi * GOLDEN_MEAN if self.omega_golden else float(self.omega or 0.0)


class IndexSection(BaseModel):
    N: PositiveInt = 1
    K: PositiveFloat
    s: PositiveFloat = 1.0
    cap: PositiveInt = DEFAULT_CAP


class SolverSection(BaseModel):
    tol: PositiveFloat = 1e-12
    max_iter: PositiveInt = 40
    rho_loss: Optional[PositiveFloat] = None
    divergence_floor: PositiveFloat = 1e-9
    n_plus_cap: PositiveFloat = 1e6
    n_minus_cap: PositiveFloat = 1e6
    c_floor: float = Field(1e-8, ge=0)
    freeze_lambda: bool = False
    divisor_floor: PositiveFloat = 1e-14
    divisor_policy: FloorPolicy = FloorPolicy.ERROR
    reciprocal_tol: PositiveFloat = 1e-12
    vanish_tol: PositiveFloat = 1e-10
    uniqueness_scale: Optional[PositiveFloat] = None


class LongSection(BaseModel):
    model: Optional[FilePath] = None
    # add the on-site and nearest-neighbour terms of the [shell_*] sections
    include_short: bool = True
    L_max: Optional[int] = Field(None, ge=0)
    fixed_point_tol: PositiveFloat = 1e-14
    fixed_point_max_iter: PositiveInt = 200
    enforce_h5: bool = True


class LadderSection(BaseModel):
    rho: PositiveFloat
    rho_inf: PositiveFloat
    tau: PositiveFloat = 1.0

    @root_validator(skip_on_failure=True)
    def _radii(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if not values["rho_inf"] < values["rho"]:
            raise ValueError("rho_inf must be below rho")
        return values


class LevelSection(BaseModel):
    alpha: float = Field(..., gt=0, le=1)
    nu: Optional[PositiveFloat] = None
    tau: Optional[PositiveFloat] = None
    modes: ModeTable = Field(default_factory=dict)


class OracleSection(BaseModel):
    p: PositiveInt = fibonacci_convergent(12)[0]
    q: PositiveInt = fibonacci_convergent(12)[1]
    tol: PositiveFloat = 1e-12
    dense: bool = True
    dense_tol: PositiveFloat = 1e-13

    @root_validator(skip_on_failure=True)
    def _coprime(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if math.gcd(values["p"], values["q"]) != 1:
            raise ValueError("p and q must be coprime")
        return values


class DiophantineSection(BaseModel):
    nu: PositiveFloat
    tau: PositiveFloat
    style: DiophantineStyle = DiophantineStyle.PRODUCT


class RunConfig(BaseModel):
    run: RunSection = Field(default_factory=RunSection)
    basis: BasisSection
    index: IndexSection
    solver: SolverSection = Field(default_factory=SolverSection)
    shell_U: ModeTable = Field(default_factory=dict)
    shell_V: Optional[ModeTable] = None
    long: Optional[LongSection] = None
    ladder: Optional[LadderSection] = None
    levels: List[LevelSection] = Field(default_factory=list)
    oracle: OracleSection = Field(default_factory=OracleSection)
    diophantine: Optional[DiophantineSection] = None
    source: Optional[Path] = None

    @root_validator(skip_on_failure=True)
    def _consistent(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        index: IndexSection = values["index"]
        basis: BasisSection = values["basis"]
        mode: RunMode = values["run"].mode
        if mode is not RunMode.LADDER and index.N > len(basis.alpha):
            raise ValueError(f"index.N = {index.N} needs {index.N} alpha entries, got {len(basis.alpha)}")
        for table in (values["shell_U"], values["shell_V"] or {}):
            for key in table:
                if MultiIndex.parse(key).max_position > index.N:
                    raise ValueError(f"mode {key!r} uses a frequency beyond N = {index.N}")
        if mode is RunMode.LADDER and (values["ladder"] is None or not values["levels"]):
            raise ValueError("ladder mode needs a [ladder] section and at least one [level.<n>] section")
        if mode is RunMode.VERIFY and values["run"].hull is None:
            raise ValueError("verify mode needs run.hull")
        if mode is RunMode.LONG and values["long"] is None:
            values["long"] = LongSection()
        return values


def parse_modes(section: Mapping[str, str], skip: Tuple[str, ...] = (), where: str = "") -> ModeTable:
    """Parse mode lines into canonical multi-index text -> (re, im)."""
    modes: Dict[str, complex] = {}

    def add(k: MultiIndex, value: complex) -> None:
        modes[str(k)] = modes.get(str(k), 0j) + value

    for key, raw in section.items():
        if key in skip:
            continue
        try:
            head, _, tail = key.strip().partition(" ")
            if head in ("cos", "sin"):
                k = MultiIndex.parse(tail)
                amplitude = float(raw)
                if head == "cos" and not k:
                    add(k, amplitude)
                elif head == "cos":
                    add(k, amplitude / 2)
                    add(-k, amplitude / 2)
                elif k:
                    add(k, -0.5j * amplitude)
                    add(-k, 0.5j * amplitude)
            else:
                add(MultiIndex.parse(key), parse_complex(raw))
        except (ValueError, FKHullIndexSpaceError) as err:
            raise FKHullConfigError(f"[{where}] {key} = {raw}: {err}")
    return {key: (value.real, value.imag) for key, value in modes.items()}


def _resolve(value: Optional[str], base: Path) -> Optional[str]:
    if value is None:
        return None
    path = Path(value).expanduser()
    return str(path if path.is_absolute() else base / path)


def parse_config(text: str, base_dir: Union[str, Path] = ".", source: Optional[Path] = None) -> RunConfig:
    """Parse configuration text; relative file paths resolve against ``base_dir``."""
    parser = configparser.ConfigParser(delimiters=("=",), interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise FKHullConfigError(f"Unreadable configuration: {err}")
    base = Path(base_dir)

    data: Dict[str, Any] = {"source": source}
    levels: Dict[int, Dict[str, Any]] = {}
    for name in parser.sections():
        section = dict(parser.items(name))
        if name.startswith(LEVEL_PREFIX):
            try:
                n = int(name[len(LEVEL_PREFIX) :])
            except ValueError:
                raise FKHullConfigError(f"Level section [{name}] needs an integer suffix")
            level: Dict[str, Any] = {key: section[key] for key in LEVEL_KEYS if key in section}
            level["modes"] = parse_modes(section, LEVEL_KEYS, name)
            levels[n] = level
        elif name in ("shell_U", "shell_V"):
            data[name] = parse_modes(section, where=name)
        elif name in SECTIONS:
            data[name] = section
        else:
            raise FKHullConfigError(f"Unknown section [{name}]")
    if levels:
        if sorted(levels) != list(range(1, len(levels) + 1)):
            raise FKHullConfigError(f"Level sections must be numbered 1..n, got {sorted(levels)}")
        data["levels"] = [levels[n] for n in sorted(levels)]
    if "run" in data and "hull" in data["run"]:
        data["run"]["hull"] = _resolve(data["run"]["hull"], base)
    if "long" in data and "model" in data["long"]:
        data["long"]["model"] = _resolve(data["long"]["model"], base)

    try:
        config = RunConfig.parse_obj(data)
    except ValidationError as err:
        raise FKHullValidationError(err)
    logger.debug("Parsed %s configuration from %s", config.run.mode.value, source or "text")
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    if not path.is_file():
        raise FKHullConfigError(f"Configuration file {str(path)!r} does not exist")
    return parse_config(path.read_text(), path.parent, path)


def override(config: RunConfig, **run: Any) -> RunConfig:
    """Return the configuration with ``[run]`` keys replaced and revalidated."""
    data = config.dict()
    data["run"].update({key: value for key, value in run.items() if value is not None})
    try:
        return RunConfig.parse_obj(data)
    except ValidationError as err:
        raise FKHullValidationError(err)
