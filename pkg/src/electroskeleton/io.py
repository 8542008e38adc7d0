"""JSON bundles, CSV exports and the shipped JSON schemas."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from importlib import resources
from pathlib import Path

from .pipeline import PipelineResult

SCHEMAS = ("bundle", "verify", "conjecture")


def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(name)
    text = resources.files("electroskeleton").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def load_vertices(path: str | Path) -> list[list[float]]:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "vertices" not in data:
        raise ValueError(f"{path}: expected an object with a 'vertices' list")
    return data["vertices"]


def parse_vertex_list(text: str) -> list[list[float]]:
    nums = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    if len(nums) % 2:
        raise ValueError("--vertices needs an even number of coordinates")
    return [nums[i : i + 2] for i in range(0, len(nums), 2)]


def skeleton_dict(result: PipelineResult) -> dict:
    skel = result.skeleton
    return {
        "arcs": [
            {
                "pair": list(map(int, a.pair)),
                "endpoint_kinds": list(a.endpoint_kinds),
                "endpoint_refs": list(map(int, a.endpoint_refs)),
                "points": a.points.tolist(),
            }
            for a in skel.arcs
        ],
        "junctions": [
            {"location": j.location.tolist(), "incident_pairs": sorted(list(map(int, p)) for p in j.incident_pairs)}
            for j in skel.junctions
        ],
    }


def measure_dict(result: PipelineResult) -> dict:
    mu = result.measure
    return {
        "samples": [
            {"x": x, "y": y, "weight": w, "density": d, "pair": [int(p) for p in pr.split("-")]}
            for x, y, w, d, pr in mu.rows()
        ]
    }


def bundle(result: PipelineResult, config: dict) -> dict:
    conn = result.connectivity
    return {
        "polygon": {"vertices": result.polygon.to_list()},
        "robin_constant": result.solution.robin_constant,
        "skeleton": skeleton_dict(result),
        "measure": measure_dict(result),
        "summary": {
            "mass": result.measure.total_mass,
            "n_regions": conn.n_regions,
            "n_arcs": conn.n_arcs,
            "n_junctions": conn.n_junctions,
            "complement_connected": conn.complement_connected,
            "arc_masses": result.measure.arc_masses().tolist(),
        },
        "config": config,
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(prefix: str | Path, result: PipelineResult) -> list[Path]:
    """`<prefix>_ridges.csv` (flattened arc points) and `<prefix>_measure.csv`."""
    prefix = str(prefix)
    ridges = Path(f"{prefix}_ridges.csv")
    measure = Path(f"{prefix}_measure.csv")
    ridges.parent.mkdir(parents=True, exist_ok=True)
    with open(ridges, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arc", "pair", "x", "y"])
        for k, arc in enumerate(result.skeleton.arcs):
            tag = f"{arc.pair[0]}-{arc.pair[1]}"
            for x, y in arc.points:
                w.writerow([k, tag, repr(float(x)), repr(float(y))])
    with open(measure, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "weight", "density", "pair"])
        for x, y, wt, d, pr in result.measure.rows():
            w.writerow([repr(x), repr(y), repr(wt), repr(d), pr])
    return [ridges, measure]
