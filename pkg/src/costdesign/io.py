"""Problem and report files.

Problems and reports are JSON; traces, weights and benchmark tables are
CSV.  Floats are written with ``repr`` so they read back bit-for-bit.

A problem file looks like::

    {
      "m": 2,
      "points": [
        {"id": "a", "f": [1.0, 0.0], "cost": 0.5},
        {"id": "b", "f": [1.0, 1.0], "cost": 1.8}
      ]
    }

with two optional, mutually exclusive blocks: ``"budget": {"N": .., "B":
..}`` (costs are then raw currency amounts) and ``"constraints": {"c1":
[..], "c2": [..]}`` (two general linear constraints; point costs are then
ignored and may be omitted).
"""
from __future__ import annotations

import bisect
import csv
import json
import math
from dataclasses import dataclass
from json.decoder import JSONObject
from json.scanner import py_make_scanner
from pathlib import Path
from typing import Optional

import numpy as np

from .barycentric import SolverReport
from .model import DesignInstance, InvalidInstanceError
from .transforms import (BackMap, general_two_constraint_to_canonical,
                         normalize_costs)


class ProblemFileError(ValueError):
    """Malformed problem, design or report file."""

    def __init__(self, message: str, line: Optional[int] = None,
                 source: str = "<input>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class _Obj(dict):
    line = None


class _LineDecoder(json.JSONDecoder):
    """JSON decoder that remembers the line on which each object starts."""

    def __init__(self, text: str):
        super().__init__()
        starts = [0]
        pos = text.find("\n")
        while pos >= 0:
            starts.append(pos + 1)
            pos = text.find("\n", pos + 1)

        def parse_object(s_and_end, *args):
            s, end = s_and_end
            obj, new_end = JSONObject(s_and_end, *args)
            obj = _Obj(obj)
            obj.line = bisect.bisect_right(starts, end - 1)
            return obj, new_end

        self.parse_object = parse_object
        self.scan_once = py_make_scanner(self)


def _load_json(text: str, source: str):
    try:
        return _LineDecoder(text).decode(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(exc.msg, exc.lineno, source) from None


def _line(obj):
    return getattr(obj, "line", None)


@dataclass
class ProblemFile:
    m: int
    ids: list
    F: np.ndarray
    costs: Optional[np.ndarray] = None
    budget: Optional[tuple] = None          # (N, B)
    c1: Optional[np.ndarray] = None
    c2: Optional[np.ndarray] = None

    def to_instance(self) -> tuple[DesignInstance, BackMap]:
        """Canonical size-and-cost instance and the map back to file weights."""
        if self.c1 is not None:
            return general_two_constraint_to_canonical(self.F, self.c1,
                                                       self.c2, self.ids)
        costs = self.costs
        if self.budget is not None:
            costs = normalize_costs(costs, *self.budget)
        inst = DesignInstance(self.F, costs, self.ids)
        return inst, BackMap.identity(inst.n)

    def to_json(self) -> dict:
        points = []
        for k, x in enumerate(self.ids):
            p = {"id": x, "f": [float(v) for v in self.F[k]]}
            if self.costs is not None:
                p["cost"] = float(self.costs[k])
            points.append(p)
        out = {"m": self.m, "points": points}
        if self.budget is not None:
            out["budget"] = {"N": int(self.budget[0]), "B": float(self.budget[1])}
        if self.c1 is not None:
            out["constraints"] = {"c1": [float(v) for v in self.c1],
                                  "c2": [float(v) for v in self.c2]}
        return out

    def dumps(self) -> str:
        return _dumps(self.to_json())

    @classmethod
    def from_instance(cls, instance: DesignInstance) -> "ProblemFile":
        return cls(m=instance.m, ids=list(instance.ids),
                   F=np.array(instance.F), costs=np.array(instance.costs))


def _dumps(obj) -> str:
    # one point per line keeps large files diffable and the line numbers useful
    if isinstance(obj, dict) and "points" in obj:
        head = {k: v for k, v in obj.items() if k != "points"}
        lines = ["{"]
        for k, v in head.items():
            lines.append(f"  {json.dumps(k)}: {json.dumps(v)},")
        lines.append('  "points": [')
        pts = [json.dumps(p) for p in obj["points"]]
        lines.append(",\n".join("    " + p for p in pts))
        lines.append("  ]")
        lines.append("}")
        return "\n".join(lines) + "\n"
    return json.dumps(obj, indent=2) + "\n"


def _number(value, what, line, source, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemFileError(f"{what} must be a number, got {value!r}",
                               line, source)
    if not math.isfinite(value):
        raise ProblemFileError(f"{what} must be finite", line, source)
    if positive and value <= 0:
        raise ProblemFileError(f"{what} must be positive, got {value!r}",
                               line, source)
    return float(value)


def parse_problem(text: str, source: str = "<input>") -> ProblemFile:
    """Parse and validate a problem file."""
    doc = _load_json(text, source)
    if not isinstance(doc, dict):
        raise ProblemFileError("top level must be an object", 1, source)
    top = _line(doc)
    m = doc.get("m")
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ProblemFileError(f"'m' must be a positive integer, got {m!r}",
                               top, source)
    points = doc.get("points")
    if not isinstance(points, list) or not points:
        raise ProblemFileError("'points' must be a non-empty list", top, source)
    has_budget = "budget" in doc
    has_constraints = "constraints" in doc
    if has_budget and has_constraints:
        raise ProblemFileError("'budget' and 'constraints' are mutually "
                               "exclusive", top, source)

    ids, rows, costs = [], [], []
    seen = set()
    for k, p in enumerate(points):
        line = _line(p)
        if not isinstance(p, dict):
            raise ProblemFileError(f"point #{k + 1} must be an object",
                                   top, source)
        pid = p.get("id", str(k + 1))
        if not isinstance(pid, (str, int)) or isinstance(pid, bool):
            raise ProblemFileError(f"point #{k + 1}: bad id {pid!r}", line, source)
        pid = str(pid)
        if pid in seen:
            raise ProblemFileError(f"duplicate point id {pid!r}", line, source)
        seen.add(pid)
        f = p.get("f")
        if not isinstance(f, list):
            raise ProblemFileError(f"point {pid!r}: missing regressor 'f'",
                                   line, source)
        if len(f) != m:
            raise ProblemFileError(
                f"point {pid!r}: regressor has {len(f)} entries, expected {m}",
                line, source)
        row = [_number(v, f"point {pid!r} regressor", line, source) for v in f]
        if not any(row):
            raise ProblemFileError(f"point {pid!r}: regressor is zero",
                                   line, source)
        if "cost" in p:
            costs.append(_number(p["cost"], f"point {pid!r} cost", line,
                                 source, positive=True))
        elif not has_constraints:
            raise ProblemFileError(f"point {pid!r}: missing 'cost'", line, source)
        ids.append(pid)
        rows.append(row)

    F = np.array(rows, dtype=float)
    if np.linalg.matrix_rank(F) < m:
        raise ProblemFileError(f"regressors do not span R^{m}", top, source)
    pf = ProblemFile(m=m, ids=ids, F=F,
                     costs=np.array(costs) if len(costs) == len(ids) else None)
    if has_budget:
        b = doc["budget"]
        bl = _line(b) or top
        if not isinstance(b, dict) or "N" not in b or "B" not in b:
            raise ProblemFileError("'budget' needs 'N' and 'B'", bl, source)
        N = b["N"]
        if isinstance(N, bool) or not isinstance(N, int) or N < 1:
            raise ProblemFileError("budget 'N' must be a positive integer",
                                   bl, source)
        pf.budget = (N, _number(b["B"], "budget 'B'", bl, source, positive=True))
    if has_constraints:
        cons = doc["constraints"]
        cl = _line(cons) or top
        if not isinstance(cons, dict):
            raise ProblemFileError("'constraints' must be an object", cl, source)
        for key in ("c1", "c2"):
            vals = cons.get(key)
            if not isinstance(vals, list) or len(vals) != len(ids):
                raise ProblemFileError(
                    f"constraint '{key}' must list {len(ids)} numbers", cl, source)
            setattr(pf, key, np.array([_number(v, f"constraint '{key}'", cl,
                                               source, positive=True)
                                       for v in vals]))
    try:
        pf.to_instance()
    except InvalidInstanceError as exc:
        raise ProblemFileError(str(exc), top, source) from None
    return pf


def read_problem(path) -> ProblemFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError(exc.strerror or str(exc), None, str(path)) from None
    return parse_problem(text, str(path))


def write_problem(problem: ProblemFile, path) -> None:
    Path(path).write_text(problem.dumps())


# ---------------------------------------------------------------------------
# reports and designs


def report_to_json(report: SolverReport, instance: DesignInstance,
                   back: Optional[BackMap] = None) -> dict:
    """Serializable view of a solver report.

    Weights are given for every point of the original problem (``back``
    maps canonical weights to file weights); ``constraints`` holds the
    size and cost totals of the canonical design.
    """
    w = report.w if back is None else back(report.w)
    return {
        "status": report.status.value,
        "phi": report.phi,
        "eff_lb": report.eff_lb,
        "iterations": report.iterations,
        "elapsed_s": report.elapsed,
        "constraints": {"size": float(np.sum(report.w)),
                        "cost": float(np.dot(instance.costs, report.w))},
        "weights": [{"id": x, "w": float(v)} for x, v in zip(report.ids, w)],
        "deletions": [{"iteration": t, "ids": list(ids)}
                      for t, ids in report.deletions],
        "trace": [row._asdict() for row in report.trace],
        "warnings": list(report.warnings),
    }


def write_report(report: SolverReport, instance: DesignInstance, path,
                 back: Optional[BackMap] = None) -> None:
    Path(path).write_text(json.dumps(report_to_json(report, instance, back),
                                     indent=2) + "\n")


TRACE_FIELDS = ("iter", "phi", "eff_lb", "active_n", "elapsed_s")


def write_trace(report: SolverReport, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(TRACE_FIELDS)
        for row in report.trace:
            out.writerow([row.iteration, repr(row.phi), repr(row.eff_lb),
                          row.active, f"{row.elapsed:.6f}"])


def read_design(path, ids) -> np.ndarray:
    """Weights from a report JSON or an ``id,w`` CSV, ordered like ``ids``.

    Ids missing from the file get weight zero; unknown ids are an error.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError(exc.strerror or str(exc), None, str(path)) from None
    lookup = {x: k for k, x in enumerate(ids)}
    w = np.zeros(len(ids))
    if text.lstrip().startswith("{"):
        doc = _load_json(text, str(path))
        entries = doc.get("weights") if isinstance(doc, dict) else None
        if not isinstance(entries, list):
            raise ProblemFileError("report has no 'weights' list", _line(doc),
                                   str(path))
        pairs = [(e.get("id"), e.get("w"), _line(e)) for e in entries
                 if isinstance(e, dict)]
    else:
        pairs = []
        rows = csv.reader(text.splitlines())
        for lineno, row in enumerate(rows, start=1):
            if not row or (lineno == 1 and row[0].strip().lower() == "id"):
                continue
            if len(row) != 2:
                raise ProblemFileError("expected 'id,w'", lineno, str(path))
            try:
                val = float(row[1])
            except ValueError:
                raise ProblemFileError(f"bad weight {row[1]!r}", lineno,
                                       str(path)) from None
            pairs.append((row[0].strip(), val, lineno))
    for pid, val, line in pairs:
        pid = str(pid)
        if pid not in lookup:
            raise ProblemFileError(f"unknown point id {pid!r}", line, str(path))
        w[lookup[pid]] = _number(val, f"weight of {pid!r}", line, str(path))
    if len(pairs) == 0:
        raise ProblemFileError("design lists no weights", None, str(path))
    return w
