"""Scenario files (JSON) and small CSV/JSON writers with byte-stable output."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .distributions import DistributionSpec
from .errors import InvalidParameterError
from .scenario import (CellConfig, FixedDistance, PacketPmf, RatePmf, Scenario, UniformDistance,
                       UserClass, rate_pmf_from_table)

__all__ = [
    "SCENARIO_SCHEMA_HELP",
    "ScenarioFormatError",
    "load_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "dump_scenario",
    "write_rows",
    "write_json",
    "fmt",
]

SCENARIO_SCHEMA_HELP = """\
Scenario file (JSON):
{
  "name": "my_cell",                                  (optional)
  "cell": {"K": 275, "theta_kbits": 5.0, "frame_s": 0.01, "c_km_s": 300000.0},
  "classes": [
    {
      "label": "type1",
      "population": 250,
      "lambda_per_s": 0.01,                           (optional: 1/mean of inter_gen)
      "inter_gen": {"family": "uniform", "params": {"a": 50, "b": 150}},
      "packets": {"values": [10, 11, 12], "probs": [0.3, 0.4, 0.3]},
      "rates": {"csv_ref": "rates.csv", "row": 1}
            or {"rates": [48, 73.6], "probs": [0.5, 0.5]},
      "distance": {"fixed_km": 1.0} or {"range_km": [0.1, 3.0]}
    }
  ]
}
families and params:
  deterministic {period}   uniform {a, b}   exponential {rate}
  pareto {shape, scale}    bounded_pareto {shape, lower, upper}
  empirical {samples: [...]} or {csv_ref: "trace.csv"} (column dt_seconds)
Relative csv_ref paths resolve against the scenario file's directory.
"""


class ScenarioFormatError(InvalidParameterError):
    """The scenario file is not shaped like the documented schema."""


def _need(d: Mapping[str, Any], key: str, where: str):
    if not isinstance(d, Mapping) or key not in d:
        raise ScenarioFormatError(f"{where}: missing field {key!r}")
    return d[key]


def _class_from_dict(d: Mapping[str, Any], i: int, base_dir: Path | None) -> UserClass:
    where = f"classes[{i}]"
    label = str(d.get("label", f"class{i + 1}"))
    pop = _need(d, "population", where)
    ig = _need(d, "inter_gen", where)
    try:
        spec = DistributionSpec.from_dict(ig, base_dir)
    except KeyError as exc:
        raise ScenarioFormatError(f"{where}.inter_gen: missing field {exc.args[0]!r}") from None
    pk = _need(d, "packets", where)
    packets = PacketPmf(tuple(_need(pk, "values", f"{where}.packets")),
                        tuple(_need(pk, "probs", f"{where}.packets")))
    rd = _need(d, "rates", where)
    if "csv_ref" in rd:
        path = Path(rd["csv_ref"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        rates = rate_pmf_from_table(path, int(rd.get("row", 1)))
    else:
        rates = RatePmf(tuple(_need(rd, "rates", f"{where}.rates")),
                        tuple(_need(rd, "probs", f"{where}.rates")))
    dd = d.get("distance", {"fixed_km": 0.0})
    if "range_km" in dd:
        lo, hi = dd["range_km"]
        dist = UniformDistance(float(lo), float(hi))
    elif "fixed_km" in dd:
        dist = FixedDistance(float(dd["fixed_km"]))
    else:
        raise ScenarioFormatError(f"{where}.distance: expected 'fixed_km' or 'range_km'")
    lam = d.get("lambda_per_s")
    try:
        return UserClass.build(label, int(pop), spec, packets, rates, dist,
                               traffic_rate=None if lam is None else float(lam))
    except InvalidParameterError as exc:
        raise InvalidParameterError(f"{where}: {exc}") from None


def scenario_from_dict(d: Mapping[str, Any], base_dir: Path | None = None) -> Scenario:
    cd = d.get("cell", {})
    if not isinstance(cd, Mapping):
        raise ScenarioFormatError("cell: expected an object")
    cell = CellConfig(int(cd.get("K", 275)), float(cd.get("theta_kbits", 5.0)),
                      float(cd.get("frame_s", 0.010)), float(cd.get("c_km_s", 3.0e5)))
    classes = _need(d, "classes", "scenario")
    if not isinstance(classes, list):
        raise ScenarioFormatError("classes: expected a list")
    return Scenario(cell, tuple(_class_from_dict(c, i, base_dir) for i, c in enumerate(classes)),
                    name=str(d.get("name", "scenario")))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    with path.open() as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"{path}: invalid JSON ({exc})") from None
    s = scenario_from_dict(d, path.parent)
    if "name" not in d:
        s = Scenario(s.cell, s.classes, name=path.stem)
    return s


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    """Inline representation (empirical samples and rate pmfs embedded)."""
    classes = []
    for c in s.classes:
        if isinstance(c.distance, UniformDistance):
            dist = {"range_km": [c.distance.d_min, c.distance.d_max]}
        else:
            dist = {"fixed_km": c.distance.km}
        classes.append({
            "label": c.label,
            "population": c.population,
            "lambda_per_s": c.traffic_rate,
            "inter_gen": c.inter_gen.to_dict(),
            "packets": {"values": list(c.packets.values), "probs": list(c.packets.probs)},
            "rates": {"rates": list(c.rates.rates), "probs": list(c.rates.probs)},
            "distance": dist,
        })
    cell = s.cell
    return {"name": s.name,
            "cell": {"K": cell.total_blocks, "theta_kbits": cell.packet_size_kbits,
                     "frame_s": cell.frame_duration, "c_km_s": cell.signal_speed_km_s},
            "classes": classes}


def dump_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def fmt(v) -> str:
    """Shortest round-tripping text for a CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def _jsonable(v):
    if isinstance(v, Mapping):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
