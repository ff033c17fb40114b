"""CSV sample files, result documents and experiment report files."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import fields

import numpy as np

from . import __version__
from .reltest import TestResult

SMALL_SAMPLE = 50


class MatrixFileError(ValueError):
    """A sample file could not be parsed."""

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def read_matrix(path, header: bool = False) -> np.ndarray:
    """Read a comma-separated matrix, one observation per row.

    Blank lines are skipped.  With ``header=True`` the first line is skipped.
    Raises ``OSError`` if the file cannot be opened and ``MatrixFileError``
    for ragged rows or cells that are not finite decimals.
    """
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise MatrixFileError(path, f"expected {width} columns, found {len(row)}", lineno)
            values = []
            for col, cell in enumerate(row, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise MatrixFileError(path, f"column {col}: {cell.strip()!r} is not a number", lineno) from None
                if not math.isfinite(v):
                    raise MatrixFileError(path, f"column {col}: {cell.strip()!r} is not finite", lineno)
                values.append(v)
            rows.append(values)
    if not rows:
        raise MatrixFileError(path, "no data rows")
    return np.array(rows, dtype=np.float64)


def write_matrix(path, A, header=None) -> None:
    """Write ``A`` so that ``read_matrix`` returns it bit for bit."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in A:
            writer.writerow([repr(float(v)) for v in row])


RESULT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "relmmd test result",
    "type": "object",
    "required": ["tool", "version", "inputs", "result", "warnings"],
    "additionalProperties": False,
    "properties": {
        "tool": {"const": "relmmd"},
        "version": {"type": "string"},
        "inputs": {
            "type": "object",
            "required": ["ref", "y", "z", "m", "n", "r", "dim", "kernel", "bandwidth", "alpha", "seed"],
            "additionalProperties": False,
            "properties": {
                "ref": {"type": "string"},
                "y": {"type": "string"},
                "z": {"type": "string"},
                "m": {"type": "integer", "minimum": 3},
                "n": {"type": "integer", "minimum": 3},
                "r": {"type": "integer", "minimum": 3},
                "dim": {"type": "integer", "minimum": 1},
                "kernel": {"enum": ["gaussian-rbf", "linear"]},
                "bandwidth": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "seed": {"type": ["integer", "null"]},
            },
        },
        "result": {
            "type": "object",
            "required": [
                "mmd_xy", "mmd_xz", "statistic", "projected_sd", "p_value",
                "alpha", "decision", "degenerate_variance",
            ],
            "additionalProperties": False,
            "properties": {
                "mmd_xy": {"type": "number"},
                "mmd_xz": {"type": "number"},
                "statistic": {"type": "number"},
                "projected_sd": {"type": "number", "minimum": 0},
                "p_value": {"type": "number", "minimum": 0, "maximum": 1},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "decision": {"enum": ["favor-z", "favor-y", "inconclusive"]},
                "degenerate_variance": {"type": "boolean"},
            },
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}

RESULT_FIELDS = tuple(RESULT_SCHEMA["properties"]["result"]["required"])


def result_document(result: TestResult, paths, shapes) -> dict:
    """Assemble the machine-readable record of one test invocation."""
    (m, dim), (n, _), (r, _) = shapes
    kernel = result.kernel
    warnings = []
    if result.degenerate_variance:
        warnings.append("degenerate variance: projected variance was floored; the p-value is unreliable")
    if min(m, n, r) < SMALL_SAMPLE:
        warnings.append(f"small sample: min(m, n, r) = {min(m, n, r)} < {SMALL_SAMPLE}; the normal approximation may be poor")
    body = {}
    for f in fields(result):
        if f.name in RESULT_FIELDS:
            value = getattr(result, f.name)
            body[f.name] = value.value if f.name == "decision" else value
    return {
        "tool": "relmmd",
        "version": __version__,
        "inputs": {
            "ref": str(paths[0]),
            "y": str(paths[1]),
            "z": str(paths[2]),
            "m": m,
            "n": n,
            "r": r,
            "dim": dim,
            "kernel": kernel.family,
            "bandwidth": kernel.bandwidth,
            "alpha": result.alpha,
            "seed": None,
        },
        "result": body,
        "warnings": warnings,
    }


def format_document(doc: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    flat = {f"input.{k}": v for k, v in doc["inputs"].items()}
    flat.update(doc["result"])
    flat["warnings"] = "; ".join(doc["warnings"])
    flat["version"] = doc["version"]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(flat.keys())
        writer.writerow([_cell(v) for v in flat.values()])
        return buf.getvalue()
    if fmt == "text":
        res = doc["result"]
        lines = [
            f"relmmd {doc['version']}",
            f"samples      m={doc['inputs']['m']} n={doc['inputs']['n']} r={doc['inputs']['r']} dim={doc['inputs']['dim']}",
            f"kernel       {doc['inputs']['kernel']} bandwidth={_cell(doc['inputs']['bandwidth'])}",
            f"MMD^2(X,Y)   {res['mmd_xy']!r}",
            f"MMD^2(X,Z)   {res['mmd_xz']!r}",
            f"statistic    {res['statistic']!r}",
            f"projected sd {res['projected_sd']!r}",
            f"p-value      {res['p_value']!r}",
            f"alpha        {res['alpha']!r}",
            f"decision     {res['decision']}",
        ]
        lines += [f"warning: {w}" for w in doc["warnings"]]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_report(path, kind: str, config: dict, columns, rows, summary: dict | None = None) -> None:
    """CSV report whose leading comment lines echo the configuration (and summary)."""
    buf = io.StringIO()
    buf.write(f"# relmmd {kind} config: {json.dumps(_jsonable(config), sort_keys=True)}\n")
    if summary is not None:
        buf.write(f"# relmmd {kind} summary: {json.dumps(_jsonable(summary), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(_jsonable(v)) for v in row])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def read_report(path):
    """Parse a report file back into (comment dict, column names, rows of strings)."""
    meta = {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# relmmd "):
            label, _, payload = line[len("# relmmd "):].partition(": ")
            meta[label] = json.loads(payload)
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, np.generic):
        return v.item()
    return v
