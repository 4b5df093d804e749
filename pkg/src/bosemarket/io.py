"""File formats and run reports.

Grid JSON::

    {"levels": [{"epsilon": 0, "g": 1}, {"epsilon": 1, "g": 5}]}

Panel CSV header ``investor_id,identified_count``; production CSV header
``t,labor,capital,output``.  Comma separated, ``.`` decimals, UTF-8, header
mandatory, unknown keys and columns rejected.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .errors import BoundsViolation, FileNotFound, ParseError, ValidationError
from .indicators import InvestorPanel, ProductionSeries
from .model import LevelGrid, validate_grid

PANEL_HEADER = ["investor_id", "identified_count"]
SERIES_HEADER = ["t", "labor", "capital", "output"]


def read_text(path) -> str:
    p = Path(path)
    try:
        return p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFound(f"{path}: no such file") from None
    except IsADirectoryError:
        raise FileNotFound(f"{path}: is a directory") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 ({exc.reason})", path) from None


def _locate(text: str, needle: str, occurrence: int = 0) -> tuple[Optional[int], Optional[int]]:
    pos = -1
    for _ in range(occurrence + 1):
        pos = text.find(needle, pos + 1)
        if pos < 0:
            return None, None
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def parse_grid(text: str, path="<grid>") -> LevelGrid:
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object with key 'levels'", path, 1, 1)
    extra = sorted(set(doc) - {"levels"})
    if extra:
        raise ParseError(f"unknown key {extra[0]!r}", path, *_locate(text, f'"{extra[0]}"'))
    if "levels" not in doc:
        raise ParseError("missing key 'levels'", path, 1, 1)
    levels = doc["levels"]
    if not isinstance(levels, list):
        raise ParseError("'levels' must be a list", path, *_locate(text, '"levels"'))
    raw = []
    for i, lv in enumerate(levels):
        where = _locate(text, "{", i + 1)
        if not isinstance(lv, dict):
            raise ParseError(f"levels[{i}] must be an object", path, *where)
        extra = sorted(set(lv) - {"epsilon", "g"})
        if extra:
            raise ParseError(f"levels[{i}]: unknown key {extra[0]!r}", path, *where)
        for key in ("epsilon", "g"):
            if key not in lv:
                raise ParseError(f"levels[{i}]: missing key {key!r}", path, *where)
        eps, g = lv["epsilon"], lv["g"]
        if isinstance(eps, bool) or not isinstance(eps, (int, Decimal)):
            raise ParseError(f"levels[{i}].epsilon must be a number", path, *where)
        if isinstance(g, bool) or not isinstance(g, int):
            raise ParseError(f"levels[{i}].g must be an integer", path, *where)
        raw.append((eps, g))
    try:
        return validate_grid(raw)
    except ValidationError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def load_grid(path) -> LevelGrid:
    return parse_grid(read_text(path), path)


def grid_to_json(grid: LevelGrid) -> str:
    levels = []
    for lv in grid.levels:
        eps = lv.epsilon
        levels.append({"epsilon": int(eps) if eps.denominator == 1 else float(eps), "g": lv.g})
    return json.dumps({"levels": levels}, indent=2) + "\n"


def _csv_rows(text: str, path, header: list[str]):
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise ParseError(f"empty file; expected header {','.join(header)}", path, 1) from None
    if [h.strip() for h in first] != header:
        raise ParseError(
            f"header must be {','.join(header)}, got {','.join(first)}", path, 1, 1
        )
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, got {len(row)}", path, reader.line_num
            )
        yield reader.line_num, [c.strip() for c in row]


def parse_panel(text: str, total_stocks: int, path="<panel>") -> InvestorPanel:
    if total_stocks is None or total_stocks < 1:
        raise BoundsViolation(f"--total-stocks must be >= 1, got {total_stocks}")
    counts, seen = [], {}
    for line, (investor, value) in _csv_rows(text, path, PANEL_HEADER):
        if not investor:
            raise ParseError("empty investor_id", path, line, 1)
        if investor in seen:
            raise ParseError(
                f"duplicate investor_id {investor!r} (first on line {seen[investor]})", path, line, 1
            )
        seen[investor] = line
        try:
            h = int(value)
        except ValueError:
            raise ParseError(
                f"identified_count {value!r} is not an integer", path, line, len(investor) + 2
            ) from None
        if not 0 <= h <= total_stocks:
            raise BoundsViolation(
                f"{path}: line {line}: investor {investor!r} identifies {h} stocks, "
                f"outside [0, {total_stocks}]"
            )
        counts.append(h)
    return InvestorPanel(total_stocks, tuple(counts))


def load_panel(path, total_stocks: int) -> InvestorPanel:
    return parse_panel(read_text(path), total_stocks, path)


def parse_series(text: str, path="<series>") -> ProductionSeries:
    rows = []
    for line, fields in _csv_rows(text, path, SERIES_HEADER):
        values = []
        col = 1
        for name, cell in zip(SERIES_HEADER, fields):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{name} {cell!r} is not a number", path, line, col) from None
            if not math.isfinite(v):
                raise ParseError(f"{name} {cell!r} is not finite", path, line, col)
            values.append(v)
            col += len(cell) + 1
        t, labor, capital, output = values
        if rows and t <= rows[-1][0]:
            raise ParseError(f"t={cell_repr(t)} does not increase (previous {cell_repr(rows[-1][0])})",
                             path, line, 1)
        if labor <= 0 or capital <= 0:
            raise BoundsViolation(f"{path}: line {line}: labor and capital must be positive")
        if output < 0:
            raise BoundsViolation(f"{path}: line {line}: output must be non-negative")
        rows.append(tuple(values))
    return ProductionSeries(tuple(rows))


def cell_repr(v: float) -> str:
    return f"{v:g}"


def load_series(path) -> ProductionSeries:
    return parse_series(read_text(path), path)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class RunReport:
    command: str
    inputs_digest: str
    results: Any
    tool_version: str = __version__
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "results": self.results,
            "tool_version": self.tool_version,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(d["command"], d["inputs_digest"], d["results"], d["tool_version"], d["seed"])


def inputs_digest(files: dict[str, Optional[str]], flags: dict) -> str:
    """SHA-256 over the bytes of every input file and the canonical flags."""
    h = hashlib.sha256()
    for name in sorted(files):
        h.update(name.encode())
        h.update(b"\0")
        path = files[name]
        if path is not None:
            h.update(Path(path).read_bytes())
        h.update(b"\0")
    h.update(json.dumps(flags, sort_keys=True, default=str).encode())
    return h.hexdigest()


def report_to_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def report_from_json(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)) and not any(isinstance(x, dict) for x in v):
            for i, x in enumerate(v):
                out[f"{key}_{i}"] = x
        else:
            out[key] = v
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def results_to_csv(results: Any) -> str:
    """Tabular rendering of a results payload.

    A payload with a ``rows`` list becomes one line per row; any other mapping
    becomes a single flattened row.
    """
    if isinstance(results, dict) and isinstance(results.get("rows"), list):
        rows = [_flatten(r) for r in results["rows"]]
    elif isinstance(results, list):
        rows = [_flatten(r) for r in results]
    else:
        rows = [_flatten(results)]
    header: list[str] = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in header])
    return buf.getvalue()


def render(report: RunReport, fmt: str) -> str:
    if fmt == "csv":
        return results_to_csv(report.results)
    return report_to_json(report)

