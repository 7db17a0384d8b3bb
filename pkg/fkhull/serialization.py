"""Text formats: hull dumps, long-range model files, CSV tables and reports.

Hull dump::

    # N=1 s=1.0 K=64.0 rho=0.05 lambda=0.0
    0 0.0 0.0
    1:-1 0.0030140442 0.0012
    ...

One line per member of the index set, ``<multi-index> <re> <im>`` with floats
written by ``repr`` so that a load returns identical coefficients. The zero
index is written as ``0``.

Model file records::

    # L; k0|k1|...|kL; re; im
    2; 1:1|0|1:-1; 0.01; 0.0
    1; elastic; -1.0
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from pydantic import BaseModel

from .entities.report import LadderReport, VerificationReport, flatten
from .exceptions import FKHullIndexSpaceError, FKHullSerializationError, FKHullSeriesError
from .fourier import FourierSeries
from .index_space import DEFAULT_CAP, MultiIndex, enumerate_indices
from .solvers.long_range import InteractionTerm
from .utils import format_value

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

HISTORY_HEADER = ("iteration", "rho", "eps", "delta_norm", "lambda")
LADDER_HEADER = (
    "level",
    "rho",
    "residual",
    "delta",
    "delta_bound",
    "n_plus",
    "n_minus",
    "c",
    "min_divisor",
    "nu_power",
    "margin",
)
ORACLE_HEADER = ("n", "u_chain", "u_hull", "diff")


@dataclass
class HullDump:
    h: FourierSeries
    rho: float
    lam: float = 0.0


def dump_hull(h: FourierSeries, rho: float, lam: float = 0.0) -> str:
    index_set = h.index_set
    lines = [
        f"# N={index_set.active_count} s={index_set.weight_exponent!r} K={index_set.radius!r} "
        f"rho={float(rho)!r} lambda={float(lam)!r}"
    ]
    for k, value in zip(index_set, h.coeffs):
        lines.append(f"{str(k) or '0'} {float(value.real)!r} {float(value.imag)!r}")
    return "\n".join(lines) + "\n"


def _header(line: str) -> Dict[str, str]:
    if not line.startswith("#"):
        raise FKHullSerializationError("Hull dump must start with a '# N= s= K= rho=' header", line=1)
    fields: Dict[str, str] = {}
    for token in line[1:].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise FKHullSerializationError(f"Malformed header token {token!r}", line=1)
        fields[key] = value
    missing = {"N", "s", "K", "rho"} - set(fields)
    if missing:
        raise FKHullSerializationError(f"Header lacks {sorted(missing)}", line=1)
    return fields


def parse_hull(text: str, cap: int = DEFAULT_CAP) -> HullDump:
    """Parse a hull dump; modes not written stay zero."""
    lines = text.splitlines()
    if not lines:
        raise FKHullSerializationError("Empty hull dump")
    fields = _header(lines[0])
    try:
        index_set = enumerate_indices(int(fields["N"]), float(fields["K"]), float(fields["s"]), cap)
        rho, lam = float(fields["rho"]), float(fields.get("lambda", "0.0"))
    except (ValueError, FKHullIndexSpaceError) as err:
        raise FKHullSerializationError(f"Invalid header: {err}", line=1)
    coeffs = np.zeros(len(index_set), dtype=np.complex128)
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.rsplit(maxsplit=2)
        if len(parts) != 3:
            raise FKHullSerializationError(f"Expected '<multi-index> <re> <im>', got {line!r}", line=number)
        try:
            k = MultiIndex.parse(parts[0])
            value = complex(float(parts[1]), float(parts[2]))
        except (ValueError, FKHullIndexSpaceError) as err:
            raise FKHullSerializationError(str(err), line=number)
        position = index_set.position(k)
        if position is None:
            raise FKHullSerializationError(f"Mode {parts[0]!r} is outside {index_set!r}", line=number)
        coeffs[position] = value
    return HullDump(FourierSeries(index_set, coeffs), rho, lam)


def write_hull(path: PathLike, h: FourierSeries, rho: float, lam: float = 0.0) -> Path:
    path = Path(path)
    path.write_text(dump_hull(h, rho, lam))
    logger.debug("Wrote hull dump %s", path)
    return path


def read_hull(path: PathLike, cap: int = DEFAULT_CAP) -> HullDump:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise FKHullSerializationError(f"Cannot read hull dump {str(path)!r}: {err.strerror}")
    return parse_hull(text, cap)


def parse_model(text: str) -> List[InteractionTerm]:
    """Parse model file records into one interaction term per range."""
    coeffs: Dict[int, Dict[Tuple[MultiIndex, ...], complex]] = {}
    stiffness: Dict[int, float] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [field.strip() for field in line.split(";")]
        try:
            L = int(fields[0])
            if L < 0:
                raise ValueError(f"range must be >= 0, got {L}")
            if len(fields) == 3 and fields[1] == "elastic":
                stiffness[L] = stiffness.get(L, 0.0) + float(fields[2])
                continue
            if len(fields) != 4:
                raise ValueError("expected 'L; k0|...|kL; re; im' or 'L; elastic; kappa'")
            modes = tuple(MultiIndex.parse(part) for part in fields[1].split("|"))
            if len(modes) != L + 1:
                raise ValueError(f"range {L} needs {L + 1} multi-indices, got {len(modes)}")
            value = complex(float(fields[2]), float(fields[3]))
        except (ValueError, FKHullIndexSpaceError) as err:
            raise FKHullSerializationError(f"Bad model record: {err}", line=number)
        table = coeffs.setdefault(L, {})
        table[modes] = table.get(modes, 0j) + value
    terms = []
    for L in sorted(set(coeffs) | set(stiffness)):
        try:
            terms.append(InteractionTerm(L, coeffs.get(L, {}), stiffness.get(L, 0.0)))
        except FKHullSeriesError as err:
            raise FKHullSerializationError(f"Invalid range {L} term: {err}")
    return terms


def read_model(path: PathLike) -> List[InteractionTerm]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise FKHullSerializationError(f"Cannot read model file {str(path)!r}: {err.strerror}")
    return parse_model(text)


def dump_model(terms: Iterable[InteractionTerm]) -> str:
    lines = ["# L; k0|k1|...|kL; re; im"]
    for term in terms:
        for modes, value in term.coeffs.items():
            text = "|".join(str(k) or "0" for k in modes)
            lines.append(f"{term.L}; {text}; {value.real!r}; {value.imag!r}")
        if term.stiffness:
            lines.append(f"{term.L}; elastic; {term.stiffness!r}")
    return "\n".join(lines) + "\n"


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(float(v)) if isinstance(v, np.floating) else format_value(v) for v in row])
    logger.debug("Wrote %s", path)
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with Path(path).open(newline="") as handle:
        return list(csv.DictReader(handle))


def write_history(path: PathLike, report: VerificationReport) -> Path:
    """Write residual_history.csv: iteration, rho, eps, delta_norm, lambda."""
    rows = [(r.iteration, r.rho, r.eps, r.delta_norm, r.lam) for r in report.history]
    return write_csv(path, HISTORY_HEADER, rows)


def write_ladder(path: PathLike, report: LadderReport) -> Path:
    rows = [tuple(getattr(level, name) for name in LADDER_HEADER) for level in report.levels]
    return write_csv(path, LADDER_HEADER, rows)


def write_oracle(path: PathLike, table: np.ndarray) -> Path:
    rows = [(int(row[0]), float(row[1]), float(row[2]), float(row[3])) for row in table]
    return write_csv(path, ORACLE_HEADER, rows)


def report_items(report: BaseModel, exclude: Optional[Set[str]] = None) -> List[Tuple[str, str]]:
    """Return the formatted dotted key/value pairs of a report."""
    if exclude is None:
        exclude = {"history", "levels"}
    return [(key, format_value(value)) for key, value in flatten(report, exclude)]


def write_report(directory: PathLike, report: BaseModel, exclude: Optional[Set[str]] = None) -> Tuple[Path, Path]:
    """Write report.txt (aligned ``key : value``) and report.kv (``key=value``)."""
    directory = Path(directory)
    items = report_items(report, exclude)
    width = max((len(key) for key, _ in items), default=0)
    text = directory / "report.txt"
    text.write_text("".join(f"{key.ljust(width)} : {value}\n" for key, value in items))
    kv = directory / "report.kv"
    kv.write_text("".join(f"{key}={value}\n" for key, value in items))
    logger.debug("Wrote %s and %s", text, kv)
    return text, kv


def read_report_kv(path: PathLike) -> Dict[str, str]:
    items = {}
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FKHullSerializationError(f"Expected key=value, got {line!r}", line=number)
        items[key] = value
    return items
