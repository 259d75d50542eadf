"""Versioned JSON schemas for points, diagrams and reports, plus CSV summaries.

Floats are emitted through ``repr`` (Python's shortest-roundtrip encoding),
so deserialize(serialize(x)) reproduces every coordinate and p-value bit for
bit.  Each document carries a ``schema`` tag; loading a document with an
unknown tag raises :class:`SchemaVersionError`.  Field-by-field layouts are
documented in docs/SCHEMAS.md.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .laguerre import ConvexCell, LaguerreDiagram
from .models import model_from_dict, model_to_dict
from .montecarlo import TestReport
from .pointprocess import MarkedPoints, SimulationWindow

__all__ = [
    "SchemaVersionError",
    "POINTS_SCHEMA",
    "DIAGRAM_SCHEMA",
    "REPORT_SCHEMA",
    "points_to_dict",
    "points_from_dict",
    "window_to_dict",
    "window_from_dict",
    "diagram_to_dict",
    "diagram_from_dict",
    "report_to_dict",
    "report_from_dict",
    "dump_json",
    "load_json",
    "reports_to_csv",
]

POINTS_SCHEMA = "sectvoro.points/1"
DIAGRAM_SCHEMA = "sectvoro.diagram/1"
REPORT_SCHEMA = "sectvoro.report/1"


class SchemaVersionError(ValueError):
    """Document schema tag is missing or not supported."""


def _check_schema(obj: dict, expected: str):
    tag = obj.get("schema") if isinstance(obj, dict) else None
    if tag != expected:
        raise SchemaVersionError(f"expected schema {expected!r}, got {tag!r}")


def window_to_dict(window: SimulationWindow) -> dict:
    return {
        "r_obs": window.r_obs,
        "r_margin": window.r_margin,
        "t_cap": window.t_cap,
        "delta_floor": window.delta_floor,
        "seed": window.seed,
        "shell_budget": window.shell_budget,
    }


def window_from_dict(obj: dict) -> SimulationWindow:
    return SimulationWindow(
        r_obs=float(obj["r_obs"]),
        r_margin=float(obj["r_margin"]),
        t_cap=float(obj["t_cap"]),
        delta_floor=float(obj.get("delta_floor", 0.0625)),
        seed=int(obj.get("seed", 0)),
        shell_budget=int(obj.get("shell_budget", 64)),
    )


def points_to_dict(points: MarkedPoints, model=None, window=None) -> dict:
    doc = {
        "schema": POINTS_SCHEMA,
        "dim": points.dim,
        "position": [list(map(float, row)) for row in points.position],
        "height": [float(x) for x in points.height],
    }
    if model is not None:
        doc["model"] = model_to_dict(model)
    if window is not None:
        doc["window"] = window_to_dict(window)
    return doc


def points_from_dict(obj: dict):
    _check_schema(obj, POINTS_SCHEMA)
    pts = MarkedPoints(np.asarray(obj["position"], dtype=float),
                       np.asarray(obj["height"], dtype=float))
    model = model_from_dict(obj["model"]) if "model" in obj else None
    window = window_from_dict(obj["window"]) if "window" in obj else None
    return pts, model, window


def _cell_to_dict(cell: ConvexCell) -> dict:
    return {
        "nucleus_index": cell.nucleus_index,
        "vertices": [list(map(float, v)) for v in cell.vertices],
        "facets": [
            {"code": int(code), "vertex_ids": list(map(int, vids)),
             "normal": list(map(float, np.atleast_1d(a))), "offset": float(b)}
            for code, vids, a, b in cell.facets
        ],
        "measures": {
            "volume": cell.measures().volume,
            "boundary": cell.measures().boundary,
            "f_vector": list(cell.measures().f_vector),
        },
    }


def _cell_from_dict(obj: dict, dim: int) -> ConvexCell:
    facets = [
        (f["code"], tuple(f["vertex_ids"]), np.asarray(f["normal"], dtype=float),
         float(f["offset"]))
        for f in obj["facets"]
    ]
    return ConvexCell(nucleus_index=int(obj["nucleus_index"]), dim=dim,
                      vertices=np.asarray(obj["vertices"], dtype=float), facets=facets)


def diagram_to_dict(diag: LaguerreDiagram) -> dict:
    faces = {
        str(k): [
            {"key": list(face.key), "cells": list(face.cells),
             "centre": list(map(float, face.centre)), "clipped": face.clipped}
            for face in lst
        ]
        for k, lst in diag.face_lattice().items()
    }
    return {
        "schema": DIAGRAM_SCHEMA,
        "dim": diag.dim,
        "box": [list(map(float, ax)) for ax in diag.box],
        "nuclei": {
            "position": [list(map(float, row)) for row in diag.positions],
            "height": [float(x) for x in diag.heights],
        },
        "cells": [None if c is None else _cell_to_dict(c) for c in diag.cells],
        "faces": faces,
    }


def diagram_from_dict(obj: dict) -> LaguerreDiagram:
    _check_schema(obj, DIAGRAM_SCHEMA)
    dim = int(obj["dim"])
    cells = [None if c is None else _cell_from_dict(c, dim) for c in obj["cells"]]
    return LaguerreDiagram(
        dim=dim,
        positions=np.asarray(obj["nuclei"]["position"], dtype=float),
        heights=np.asarray(obj["nuclei"]["height"], dtype=float),
        box=tuple((float(lo), float(hi)) for lo, hi in obj["box"]),
        cells=cells,
    )


def report_to_dict(report: TestReport) -> dict:
    doc = {"schema": REPORT_SCHEMA}
    doc.update(report.to_dict())
    return doc


def report_from_dict(obj: dict) -> TestReport:
    _check_schema(obj, REPORT_SCHEMA)
    return TestReport(
        statistic=obj["statistic"],
        estimate=obj["estimate"],
        std_error=obj["std_error"],
        target=obj["target"],
        z_score=obj["z_score"],
        p_value=obj["p_value"],
        passed=bool(obj["passed"]),
        n_samples=int(obj["n_samples"]),
        n_replicates=int(obj["n_replicates"]),
        thresholds=dict(obj["thresholds"]),
        details=dict(obj.get("details", {})),
    )


def dump_json(obj: dict, path=None) -> str:
    """Serialize with shortest-roundtrip float encoding (json uses repr)."""
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def load_json(path_or_text):
    if isinstance(path_or_text, str) and path_or_text.lstrip().startswith(("{", "[")):
        return json.loads(path_or_text)
    with open(path_or_text) as fh:
        return json.load(fh)


REPORT_CSV_COLUMNS = [
    "statistic", "estimate", "std_error", "target", "z_score", "p_value",
    "passed", "n_samples", "n_replicates",
]


def reports_to_csv(reports, path=None) -> str:
    """Fixed-column CSV summary of a report list."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_COLUMNS)
    for r in reports:
        d = r.to_dict() if hasattr(r, "to_dict") else r
        writer.writerow([repr(d[c]) if isinstance(d[c], float) else d[c]
                         for c in REPORT_CSV_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
