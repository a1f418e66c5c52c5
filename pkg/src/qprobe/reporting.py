"""Serialization of run results: report envelopes (JSON) and delimited
trajectory/sweep tables (CSV).

Every emitted envelope carries the fully resolved inputs next to the
results, so any payload can be traced to, and re-run from, the numbers in
the same file.  CSV headers carry a schema-version comment line; floats
are written with repr precision so reloading reproduces them bit-for-bit.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import DimensionlessDesign, FeasibilityReport, PhysicalParams
from .dynamics import IntegratorConfig, ObservableSeries
from .errors import ConfigError
from .protocol import ProtocolResult, SweepTable, ThermalProtocolResult
from .states import GENERATOR_NAME

ENVELOPE_SCHEMA = "qprobe-envelope-v1"
TRAJECTORY_CSV_SCHEMA = "qprobe-trajectory-csv-v1"
SWEEP_CSV_SCHEMA = "qprobe-sweep-csv-v1"

TRAJECTORY_COLUMNS = ObservableSeries.COLUMNS
SWEEP_COLUMNS = (
    "axis_value", "d01_analytic", "d_eff_numeric", "c_full",
    "feas_momentum_shift", "feas_separation", "feas_coherence",
    "feas_markov", "feas_underdamped", "error",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def params_to_dict(params: PhysicalParams) -> dict:
    return dataclasses.asdict(params)


def params_from_dict(data: dict) -> PhysicalParams:
    known = {f.name for f in dataclasses.fields(PhysicalParams)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown parameter key(s): {', '.join(sorted(unknown))}")
    return PhysicalParams(**data)


def config_to_dict(config: IntegratorConfig) -> dict:
    return dataclasses.asdict(config)


def config_from_dict(data: dict) -> IntegratorConfig:
    known = {f.name for f in dataclasses.fields(IntegratorConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown integrator key(s): {', '.join(sorted(unknown))}")
    return IntegratorConfig(**data)


def design_to_dict(design: DimensionlessDesign) -> dict:
    out = dataclasses.asdict(design)
    out["estimate_ratios"] = design.estimate_ratios()
    return out


def feasibility_to_dict(report: FeasibilityReport) -> dict:
    return {
        "all_passed": report.all_passed,
        "conditions": [dataclasses.asdict(c) for c in report.conditions()],
    }


def protocol_result_to_dict(result: ProtocolResult) -> dict:
    return {
        "alpha": [result.alpha.real, result.alpha.imag],
        "c_half": result.c_half,
        "c_full": result.c_full,
        "d_eff": result.d_eff,
        "d_eff_half": result.d_eff_half,
        "d01_analytic": result.d01_analytic,
        "relative_deviation": result.relative_deviation,
        "branch_separation": result.branch_separation,
        "branch_overlap_analytic": result.branch_overlap_analytic,
        "revival_fidelity": result.revival_fidelity,
        "dissipator_kind": result.dissipator_kind,
        "design": design_to_dict(result.design),
        "feasibility": feasibility_to_dict(result.regime_report),
    }


def thermal_result_to_dict(result: ThermalProtocolResult) -> dict:
    return {
        "n_samples": result.n_samples,
        "n_rejected": result.n_rejected,
        "seed": result.seed,
        "mean_c_full": result.mean_c_full,
        "stderr_c_full": result.stderr_c_full,
        "mean_d_eff": result.mean_d_eff,
        "stderr_d_eff": result.stderr_d_eff,
        "d01_analytic": result.d01_analytic,
        "d_eff_coefficient_of_variation": result.coefficient_of_variation,
        "samples": [[a.real, a.imag] for a in result.samples],
        "per_sample": [protocol_result_to_dict(r) for r in result.results],
    }


def sweep_table_to_dict(table: SweepTable) -> dict:
    rows = []
    for row in table.rows:
        entry = {
            "axis_value": row.axis_value,
            "d01_analytic": row.d01_analytic,
            "d_eff_numeric": row.d_eff_numeric,
            "c_full": row.c_full,
            "error": row.error,
        }
        if row.design is not None:
            entry["design"] = design_to_dict(row.design)
        if row.report is not None:
            entry["feasibility"] = feasibility_to_dict(row.report)
        rows.append(entry)
    return {"axis": table.axis, "mode": table.mode,
            "metadata": table.metadata, "rows": rows}


@dataclass
class ReportEnvelope:
    """Self-contained record of one run: resolved inputs plus payload."""

    command: str
    params: PhysicalParams
    fock_dim: int
    config: IntegratorConfig
    results: dict
    seed: int | None = None
    preset: str | None = None
    run_args: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    emitted_files: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        unit_label = "natural" if (self.params.hbar == 1.0 and self.params.k_b == 1.0) else "SI"
        return {
            "schema": ENVELOPE_SCHEMA,
            "artifact_version": __version__,
            "command": self.command,
            "preset": self.preset,
            "unit_system": {"hbar": self.params.hbar, "k_b": self.params.k_b,
                            "label": unit_label},
            "generator": {"name": GENERATOR_NAME, "numpy": np.__version__},
            "seed": self.seed,
            "params": params_to_dict(self.params),
            "space": {"fock_dim": self.fock_dim},
            "integrator": config_to_dict(self.config),
            "run": dict(self.run_args),
            "warnings": list(self.warnings),
            "emitted_files": list(self.emitted_files),
            "results": self.results,
        }

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, default=_json_default) + "\n")
        return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def load_envelope(path: Path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != ENVELOPE_SCHEMA:
        raise ConfigError(
            f"{path} is not a {ENVELOPE_SCHEMA} document (schema = {data.get('schema')!r})"
        )
    return data


def write_trajectory_csv(path: Path, series: ObservableSeries) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema: {TRAJECTORY_CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in series.rows():
            writer.writerow([_fmt(float(v)) for v in row])
    return path


def write_sweep_csv(path: Path, table: SweepTable) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema: {SWEEP_CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in table.rows:
            flags = ["", "", "", "", ""]
            if row.report is not None:
                report = row.report
                flags = [
                    str(report.cond_momentum_shift.passed).lower(),
                    str(report.cond_separation.passed).lower(),
                    str(report.cond_coherence.passed).lower(),
                    "" if report.cond_markov is None
                    else str(report.cond_markov.passed).lower(),
                    str(report.cond_underdamped.passed).lower(),
                ]
            writer.writerow([
                _fmt(row.axis_value),
                _fmt(row.d01_analytic),
                _fmt(row.d_eff_numeric),
                _fmt(row.c_full),
                *flags,
                row.error or "",
            ])
    return path


def read_csv_rows(path: Path) -> tuple[str, list[dict]]:
    """Read back a package CSV: returns (schema line, list of row dicts)."""
    path = Path(path)
    with path.open() as fh:
        schema = fh.readline().strip().lstrip("# ").removeprefix("schema: ")
        reader = csv.DictReader(fh)
        return schema, list(reader)
