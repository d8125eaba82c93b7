"""Plan files in, CSV tables and JSON reports out.

Plan files are YAML (JSON documents are valid input too) checked against the
schemas shipped in ``sglab/schemas``. Every number written by this module
uses 12 significant digits so output bytes are stable across platforms.
"""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import jsonschema
import yaml

from sglab.qubit import Direction, Port, PureState
from sglab.simulator import UNPOLARIZED, CountRecord, ExperimentPlan, SGStage, SweepRow
from sglab.witness import READOUT, U_KIND, W_KIND, Preparation, ProbabilityTable, WitnessReport

NORM_TOL = 1e-6
CSV_TOL = 1e-6

CHAIN_COLUMNS = ("stage_index", "transmitted", "outcome_plus", "outcome_minus")
SWEEP_COLUMNS = ("angle_rad", "analytic_p", "estimate_p", "ci_low", "ci_high", "n")
TABLE_COLUMNS = ("prep", "measurement", "outcome", "probability")


class PlanError(ValueError):
    """A plan or table file failed to parse or validate.

    ``str(err)`` is ``"<path>:<line>: <message>"`` when the line is known.
    """

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


def fmt(x: float) -> str:
    """Render a float with 12 significant digits (no negative zero)."""
    x = float(x)
    if x == 0.0:
        x = 0.0
    return format(x, ".12g")


def quantize(x: float) -> float:
    """The float that ``fmt`` writes, so computed values match re-read ones."""
    return float(fmt(x))


def load_schema(name: str) -> dict:
    return json.loads(resources.files("sglab").joinpath("schemas", name).read_text(encoding="utf-8"))


def _node_line(root: yaml.Node, path: Sequence) -> Optional[int]:
    """1-based line of the YAML node at ``path`` (deepest reachable ancestor)."""
    node = root
    line = node.start_mark.line + 1
    for key in path:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == key:
                    line = k.start_mark.line + 1
                    node = v
                    break
            else:
                return line
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            return line
    return line


def _format_path(path: Sequence) -> str:
    out = ""
    for key in path:
        out += f"[{key}]" if isinstance(key, int) else (f".{key}" if out else str(key))
    return out or "<document>"


def _error_message(err: jsonschema.ValidationError) -> tuple[list, str]:
    path = list(err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        return path + extra[:1], f"unknown key {extra[0]!r}" if extra else err.message
    if err.validator == "required":
        return path, err.message
    label = _format_path(path)
    return path, f"{label}: {err.message}"


def _load_validated(text: str, schema_name: str, path) -> tuple[dict, yaml.Node]:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        raise PlanError(f"parse error: {exc.problem or exc}", path, line) from None
    except yaml.YAMLError as exc:
        raise PlanError(f"parse error: {exc}", path) from None
    if root is None:
        raise PlanError("empty document", path, 1)
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(e.absolute_path), e.validator))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        key_path, msg = _error_message(err)
        raise PlanError(msg, path, _node_line(root, key_path))
    return data, root


def _stage(entry: dict) -> SGStage:
    return SGStage(Direction(entry["theta"], entry["phi"]), Port.parse(entry["port"]))


def _source(value, root, path):
    if value == UNPOLARIZED:
        return UNPOLARIZED
    a = complex(value["amp0_re"], value["amp0_im"])
    b = complex(value["amp1_re"], value["amp1_im"])
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if abs(norm - 1.0) > NORM_TOL:
        raise PlanError(f"source: amplitudes have norm {norm!r}, expected 1 within {NORM_TOL}",
                        path, _node_line(root, ["source"]))
    return PureState.from_vector((a, b), normalize=True)


def parse_plan(text: str, path="<plan>") -> ExperimentPlan:
    data, root = _load_validated(text, "plan.schema.json", path)
    return ExperimentPlan(
        stages=tuple(_stage(s) for s in data["stages"]),
        n_particles=data["n_particles"],
        seed=data["seed"],
        source=_source(data["source"], root, path),
    )


def load_plan(path) -> ExperimentPlan:
    path = Path(path)
    return parse_plan(path.read_text(encoding="utf-8"), path)


def parse_witness_plan(text: str, path="<plan>") -> tuple[list[Preparation], Optional[int], int]:
    """Preparations, particles per table cell (None for exact), and seed."""
    data, _ = _load_validated(text, "witness_plan.schema.json", path)
    preps = [Preparation(s.direction, s.selected_port) for s in map(_stage, data["preparations"])]
    return preps, data.get("n_particles"), data.get("seed", 0)


def load_witness_plan(path):
    path = Path(path)
    return parse_witness_plan(path.read_text(encoding="utf-8"), path)


def _render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def chain_csv(record: CountRecord) -> str:
    rows = [
        (k, kept, plus, minus)
        for k, (kept, (plus, minus)) in enumerate(
            zip(record.per_stage_transmitted, record.per_stage_outcomes), start=1)
    ]
    return _render_csv(CHAIN_COLUMNS, rows)


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    return _render_csv(SWEEP_COLUMNS, [
        (fmt(r.angle), fmt(r.analytic_p), fmt(r.estimate.p_hat),
         fmt(r.estimate.ci_low), fmt(r.estimate.ci_high), r.estimate.n)
        for r in rows
    ])


def _measurement_label(y) -> str:
    return READOUT if y == READOUT else f"{y[0]}-{y[1]}"


def table_csv(table: ProbabilityTable) -> str:
    def order(item):
        (x, y), _ = item
        return (0, 0) if y == READOUT else y, x

    rows = []
    for (x, y), dist in sorted(table.entries.items(), key=order):
        for a in sorted(dist, reverse=table.kind == W_KIND):
            rows.append((x, _measurement_label(y), a, fmt(dist[a])))
    return _render_csv(TABLE_COLUMNS, rows)


def quantize_table(table: ProbabilityTable) -> ProbabilityTable:
    """Round every entry to what ``table_csv`` would write."""
    entries = {key: {a: quantize(p) for a, p in dist.items()} for key, dist in table.entries.items()}
    return ProbabilityTable(table.kind, table.n_preps, entries)


def parse_table(text: str, kind: str, path="<table>") -> ProbabilityTable:
    """Read a table CSV.

    Columns: ``prep`` (1..N), ``measurement`` (``readout`` for U, ``x-x'``
    with x > x' for W), ``outcome`` (1..N for U, +1/-1 for W), ``probability``.
    """
    if kind not in (U_KIND, W_KIND):
        raise PlanError(f"kind must be U or W, got {kind!r}", path)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != TABLE_COLUMNS:
        raise PlanError(f"header must be {','.join(TABLE_COLUMNS)}", path, 1)
    entries: dict = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(TABLE_COLUMNS):
            raise PlanError(f"expected {len(TABLE_COLUMNS)} columns, got {len(row)}", path, lineno)
        try:
            x = int(row[0])
            y = _parse_measurement(row[1].strip(), kind)
            a = int(row[2])
            p = float(row[3])
        except ValueError as exc:
            raise PlanError(f"bad value: {exc}", path, lineno) from None
        if not math.isfinite(p):
            raise PlanError("probability must be finite", path, lineno)
        dist = entries.setdefault((x, y), {})
        if a in dist:
            raise PlanError(f"duplicate entry for prep {x}, measurement {row[1]}, outcome {a}",
                            path, lineno)
        dist[a] = p
    if not entries:
        raise PlanError("table has no rows", path)
    n = max(x for x, _ in entries)
    if kind == W_KIND:
        n = max(n, max(y[0] for _, y in entries))
    for (x, y), dist in entries.items():
        total = sum(dist.values())
        if abs(total - 1.0) > CSV_TOL:
            raise PlanError(f"distribution for prep {x}, measurement {_measurement_label(y)} "
                            f"sums to {total!r}", path)
        # renormalize within tolerance so the table invariant holds exactly
        if total != 1.0 and abs(total - 1.0) > 1e-9:
            entries[(x, y)] = {a: p / total for a, p in dist.items()}
    try:
        return ProbabilityTable(kind, n, entries)
    except ValueError as exc:
        raise PlanError(str(exc), path) from None


def _parse_measurement(label: str, kind: str):
    if kind == U_KIND:
        if label != READOUT:
            raise ValueError(f"U-table measurement must be {READOUT!r}, got {label!r}")
        return READOUT
    left, sep, right = label.partition("-")
    if not sep:
        raise ValueError(f"W-table measurement must look like 2-1, got {label!r}")
    x, xp = int(left), int(right)
    if x <= xp:
        raise ValueError(f"pair {label!r} must list the larger preparation first")
    return (x, xp)


def load_table(path, kind: str) -> ProbabilityTable:
    path = Path(path)
    return parse_table(path.read_text(encoding="utf-8"), kind, path)


def report_json(report: WitnessReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
