"""Command-line surface: feasibility reports, trajectory simulation,
protocol runs, and parameter sweeps.

Resolution order for every setting: built-in defaults, then preset, then
config file, then command-line flags.  Emitted artifacts: a JSON report
envelope per run, CSV tables for trajectories/sweeps/thermal samples, and
(unless --no-plot) rendered figures next to them.

Exit codes: 0 success, 2 configuration/parameter errors, 3 truncation
errors, 4 integrator errors, 5 infeasible runs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__, plotting, reporting
from .analytic import PhysicalParams, design_summary, feasibility
from .dynamics import (
    APPLY_PATHS,
    DISSIPATOR_KINDS,
    IntegratorConfig,
    evolve,
    trajectory_observables,
)
from .errors import (
    ConfigError,
    InfeasibleError,
    IntegrationError,
    ParameterError,
    QprobeError,
    TruncationError,
)
from .presets import load_preset, preset_names
from .protocol import (
    SWEEP_AXES,
    SWEEP_MODES,
    run_single,
    run_thermal,
    sweep,
)
from .states import CoherentLabel, ThermalSpec, prepare_protocol_input

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRUNCATION = 3
EXIT_INTEGRATOR = 4
EXIT_INFEASIBLE = 5

PARAM_KEYS = ("m", "omega", "gamma", "theta", "epsilon", "lam", "omega_cut", "hbar", "k_b")
CONFIG_SECTIONS = ("params", "space", "integrator", "output", "run")


@dataclasses.dataclass
class RunSpec:
    """Fully resolved description of one CLI invocation."""

    command: str
    params: PhysicalParams
    fock_dim: int
    config: IntegratorConfig
    output_dir: Path
    table_format: str = "csv"
    plot: bool = True
    seed: int = 0
    preset: str | None = None
    warnings: list[str] = dataclasses.field(default_factory=list)
    # command-specific settings
    alpha: complex = 0.0
    thermal_nbar: float | None = None
    periods: float = 1.0
    thermal_samples: int | None = None
    workers: int | None = None
    axis: str | None = None
    values: list[float] | None = None
    mode: str = "analytic"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qprobe",
        description="Size and simulate a qubit-assisted probe of coherence "
                    "between classical-like oscillator states.",
    )
    parser.add_argument("--version", action="version", version=f"qprobe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser):
        p.add_argument("--preset", choices=preset_names(),
                       help="named parameter preset (default: natural-units-reference "
                            "unless a config file supplies parameters)")
        p.add_argument("--config", type=Path,
                       help="TOML config file, or a previously emitted report "
                            "envelope (.json) to re-run")
        p.add_argument("--flux-quantum", choices=("h/2e", "hbar/2e"), default="h/2e",
                       help="flux quantum convention for the flux-lc preset")
        for key in PARAM_KEYS:
            p.add_argument(f"--{key.replace('_', '-')}", type=float, default=None,
                           help=f"override parameter {key}")
        p.add_argument("--fock-dim", type=int, default=None,
                       help="oscillator truncation dimension")
        p.add_argument("--steps-per-period", type=int, default=None)
        p.add_argument("--dissipator", choices=DISSIPATOR_KINDS, default=None)
        p.add_argument("--trace-tolerance", type=float, default=None)
        p.add_argument("--leak-threshold", type=float, default=None)
        p.add_argument("--record-stride", type=int, default=None)
        p.add_argument("--apply-path", choices=APPLY_PATHS, default=None)
        p.add_argument("--output", type=Path, default=None,
                       help="output directory (default: $QPROBE_OUTPUT_DIR or cwd)")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="table format: csv files next to the envelope (default) "
                            "or json (everything in the envelope)")
        p.add_argument("--plot", dest="plot", action="store_true", default=None,
                       help="render figures next to the tables (default)")
        p.add_argument("--no-plot", dest="plot", action="store_false")
        p.add_argument("--seed", type=int, default=None)

    p_feas = sub.add_parser("feasibility", help="closed-form design report")
    add_common(p_feas)

    p_sim = sub.add_parser("simulate", help="integrate one trajectory")
    add_common(p_sim)
    p_sim.add_argument("--alpha", type=complex, default=None,
                       help="initial coherent amplitude, e.g. 1+0.5j")
    p_sim.add_argument("--thermal", type=float, default=None, metavar="NBAR",
                       help="start from a thermal oscillator state instead")
    p_sim.add_argument("--periods", type=float, default=None,
                       help="evolution length in oscillator periods (default 1)")

    p_proto = sub.add_parser("protocol", help="run the two-step coherence probe")
    add_common(p_proto)
    p_proto.add_argument("--alpha", type=complex, default=None)
    p_proto.add_argument("--thermal-samples", type=int, default=None,
                         help="average over this many sampled initial amplitudes")
    p_proto.add_argument("--workers", type=int, default=None)

    p_sweep = sub.add_parser("sweep", help="scan one parameter axis")
    add_common(p_sweep)
    p_sweep.add_argument("--axis", choices=SWEEP_AXES, default=None)
    p_sweep.add_argument("--values", type=str, default=None,
                         help="comma-separated axis values")
    p_sweep.add_argument("--mode", choices=SWEEP_MODES, default=None)
    p_sweep.add_argument("--alpha", type=complex, default=None)
    p_sweep.add_argument("--workers", type=int, default=None)
    return parser


def _load_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        envelope = reporting.load_envelope(path)
        run = dict(envelope.get("run", {}))
        if envelope.get("seed") is not None:
            run.setdefault("seed", envelope["seed"])
        return {
            "params": envelope["params"],
            "space": dict(envelope["space"]),
            "integrator": envelope["integrator"],
            "run": run,
        }
    with path.open("rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed TOML in {path}: {exc}") from None
    unknown = set(data) - set(CONFIG_SECTIONS)
    if unknown:
        raise ConfigError(
            f"unknown config section(s) in {path}: {', '.join(sorted(unknown))}"
        )
    return data


def load_spec(args: argparse.Namespace) -> RunSpec:
    """Resolve defaults, preset, config file and flags into a RunSpec."""
    file_cfg = _load_config_file(args.config) if args.config else {}
    file_params = dict(file_cfg.get("params", {}))
    file_space = dict(file_cfg.get("space", {}))
    file_integrator = dict(file_cfg.get("integrator", {}))
    file_output = dict(file_cfg.get("output", {}))
    file_run = dict(file_cfg.get("run", {}))

    warnings: list[str] = []
    preset = None
    preset_name = args.preset
    if preset_name is None and not file_params:
        preset_name = "natural-units-reference"
    if preset_name is not None:
        kwargs = {"flux_quantum": args.flux_quantum} if preset_name == "flux-lc" else {}
        preset = load_preset(preset_name, **kwargs)
        warnings.extend(preset.notes)

    # parameters: preset -> config file -> flags
    param_values = reporting.params_to_dict(preset.params) if preset else {}
    unknown = set(file_params) - set(PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown [params] key(s): {', '.join(sorted(unknown))}")
    param_values.update(file_params)
    for key in PARAM_KEYS:
        value = getattr(args, key)
        if value is not None:
            param_values[key] = value
    missing = {"m", "omega", "gamma", "theta", "epsilon"} - set(param_values)
    if missing:
        raise ConfigError(
            f"missing required parameter(s): {', '.join(sorted(missing))}; "
            "give a preset, a config file, or explicit flags"
        )
    params = reporting.params_from_dict(param_values)

    # space
    unknown = set(file_space) - {"fock_dim"}
    if unknown:
        raise ConfigError(f"unknown [space] key(s): {', '.join(sorted(unknown))}")
    fock_dim = args.fock_dim or file_space.get("fock_dim") or (preset.fock_dim if preset else 64)

    # integrator
    integrator_values = reporting.config_to_dict(IntegratorConfig())
    unknown = set(file_integrator) - set(integrator_values)
    if unknown:
        raise ConfigError(f"unknown [integrator] key(s): {', '.join(sorted(unknown))}")
    integrator_values.update(file_integrator)
    flag_map = {
        "steps_per_period": args.steps_per_period,
        "dissipator_kind": args.dissipator,
        "trace_tolerance": args.trace_tolerance,
        "leak_threshold": args.leak_threshold,
        "record_stride": args.record_stride,
        "apply_path": args.apply_path,
    }
    for key, value in flag_map.items():
        if value is not None:
            integrator_values[key] = value
    config = reporting.config_from_dict(integrator_values)

    unknown = set(file_output) - {"dir", "format", "plot"}
    if unknown:
        raise ConfigError(f"unknown [output] key(s): {', '.join(sorted(unknown))}")
    output_dir = args.output or file_output.get("dir") \
        or os.environ.get("QPROBE_OUTPUT_DIR") or "."
    table_format = args.format or file_output.get("format") or "csv"
    plot = args.plot if args.plot is not None else bool(file_output.get("plot", True))

    known_run = {"seed", "alpha_re", "alpha_im", "thermal", "periods",
                 "thermal_samples", "workers", "axis", "values", "mode"}
    unknown = set(file_run) - known_run
    if unknown:
        raise ConfigError(f"unknown [run] key(s): {', '.join(sorted(unknown))}")
    seed = args.seed if args.seed is not None else file_run.get("seed")

    spec = RunSpec(
        command=args.command,
        params=params,
        fock_dim=int(fock_dim),
        config=config,
        output_dir=Path(output_dir),
        table_format=table_format,
        plot=plot,
        seed=0 if seed is None else int(seed),
        preset=preset_name,
        warnings=warnings,
    )
    if params.gamma > 0 and config.dissipator_kind == "caldeira-leggett":
        spec.warnings.append(
            "caldeira-leggett dissipator selected: not completely positive and "
            "its protocol exponent runs ~3/2 of the closed form; see README"
        )

    alpha = getattr(args, "alpha", None)
    if alpha is None and ("alpha_re" in file_run or "alpha_im" in file_run):
        alpha = complex(file_run.get("alpha_re", 0.0), file_run.get("alpha_im", 0.0))
    spec.alpha = complex(alpha) if alpha is not None else 0.0
    thermal = getattr(args, "thermal", None)
    spec.thermal_nbar = thermal if thermal is not None else file_run.get("thermal")
    periods = getattr(args, "periods", None)
    spec.periods = float(periods if periods is not None else file_run.get("periods", 1.0))
    samples = getattr(args, "thermal_samples", None)
    spec.thermal_samples = samples if samples is not None else file_run.get("thermal_samples")
    workers = getattr(args, "workers", None)
    spec.workers = workers if workers is not None else file_run.get("workers")
    spec.axis = getattr(args, "axis", None) or file_run.get("axis")
    values = getattr(args, "values", None)
    if values is None:
        values = file_run.get("values")
    if isinstance(values, str):
        try:
            values = [float(tok) for tok in values.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --values entry: {exc}") from None
    spec.values = values
    mode = getattr(args, "mode", None)
    spec.mode = mode or file_run.get("mode") or "analytic"
    return spec


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _cmd_feasibility(spec: RunSpec) -> reporting.ReportEnvelope:
    design = design_summary(spec.params)
    report = feasibility(design, spec.params)
    results = {
        "design": reporting.design_to_dict(design),
        "feasibility": reporting.feasibility_to_dict(report),
    }
    envelope = reporting.ReportEnvelope(
        command="feasibility", params=spec.params, fock_dim=spec.fock_dim,
        config=spec.config, results=results, seed=spec.seed,
        preset=spec.preset, warnings=spec.warnings,
    )
    if spec.plot:
        fig = plotting.feasibility_figure(report, spec.output_dir / "feasibility_conditions.png")
        envelope.emitted_files.append(fig.name)
    for cond in report.conditions():
        status = "pass" if cond.passed else "FAIL"
        print(f"  {cond.name:15s} ratio = {cond.ratio:12.4g}  [{status}]  ({cond.description})")
    print(f"  chi = {design.chi:.4g}, Q = {design.quality:.4g}, nbar = {design.nbar:.4g}, "
          f"per-step exponent = {design.d01:.4g}")
    return envelope


def _cmd_simulate(spec: RunSpec) -> reporting.ReportEnvelope:
    space = spec.params.space(spec.fock_dim)
    if spec.thermal_nbar is not None:
        initial = ThermalSpec(spec.thermal_nbar)
    else:
        initial = CoherentLabel(spec.alpha)
    rho0 = prepare_protocol_input(initial, space)
    t_end = spec.periods * spec.params.period
    traj = evolve(rho0, t_end, spec.params, space, spec.config)
    series = trajectory_observables(traj)
    results = {
        "t_end": t_end,
        "periods": spec.periods,
        "final": dataclasses.asdict(traj.samples[-1]),
    }
    envelope = reporting.ReportEnvelope(
        command="simulate", params=spec.params, fock_dim=spec.fock_dim,
        config=spec.config, results=results, seed=spec.seed,
        preset=spec.preset, warnings=spec.warnings,
    )
    if spec.table_format == "csv":
        path = reporting.write_trajectory_csv(spec.output_dir / "simulate_trajectory.csv", series)
        envelope.emitted_files.append(path.name)
    else:
        results["trajectory"] = {col: list(getattr(series, col if col != "time" else "times"))
                                 for col in series.COLUMNS}
    if spec.plot:
        fig = plotting.trajectory_figure(series, spec.output_dir / "simulate_trajectory.png",
                                         spec.params.period)
        envelope.emitted_files.append(fig.name)
        fig = plotting.phase_space_figure(series, spec.output_dir / "simulate_phase_space.png",
                                          space.delta_x, space.delta_p)
        envelope.emitted_files.append(fig.name)
    final = traj.samples[-1]
    print(f"  t = {final.time:.6g}: coherence = {final.coherence:.6g}, "
          f"purity = {final.purity:.6g}, trace dev = {final.trace_dev:.3g}")
    return envelope


def _cmd_protocol(spec: RunSpec) -> reporting.ReportEnvelope:
    space = spec.params.space(spec.fock_dim)
    envelope = reporting.ReportEnvelope(
        command="protocol", params=spec.params, fock_dim=spec.fock_dim,
        config=spec.config, results={}, seed=spec.seed,
        preset=spec.preset, warnings=spec.warnings,
    )
    if spec.thermal_samples:
        result = run_thermal(spec.params, space, spec.config,
                             n_samples=spec.thermal_samples, seed=spec.seed,
                             workers=spec.workers)
        envelope.results["thermal"] = reporting.thermal_result_to_dict(result)
        if spec.table_format == "csv":
            path = spec.output_dir / "protocol_samples.csv"
            with path.open("w") as fh:
                fh.write("# schema: qprobe-thermal-samples-csv-v1\n")
                fh.write("sample_index,alpha_re,alpha_im,c_full,d_eff\n")
                for idx, (a, r) in enumerate(zip(result.samples, result.results)):
                    fh.write(f"{idx},{a.real!r},{a.imag!r},{r.c_full!r},{r.d_eff!r}\n")
            envelope.emitted_files.append(path.name)
        if spec.plot:
            fig = plotting.thermal_samples_figure(
                result.d_eff_values, result.d01_analytic,
                spec.output_dir / "protocol_samples.png")
            envelope.emitted_files.append(fig.name)
        print(f"  thermal mean d_eff = {result.mean_d_eff:.6g} "
              f"(stderr {result.stderr_d_eff:.2g}, cv {result.coefficient_of_variation:.2g}) "
              f"vs closed form {result.d01_analytic:.6g}; "
              f"rejected {result.n_rejected} draws")
        return envelope
    result = run_single(spec.alpha, spec.params, space, spec.config)
    envelope.results["single"] = reporting.protocol_result_to_dict(result)
    series = trajectory_observables(result.trajectory)
    if spec.table_format == "csv":
        path = reporting.write_trajectory_csv(spec.output_dir / "protocol_trajectory.csv", series)
        envelope.emitted_files.append(path.name)
    if spec.plot:
        design = result.design
        half_pred = math.exp(-design.d01) * result.branch_overlap_analytic
        full_pred = math.exp(-2.0 * design.d01)
        markers = {
            "closed form, half period": (spec.params.period / 2.0, half_pred),
            "closed form, full period": (spec.params.period, full_pred),
        }
        fig = plotting.trajectory_figure(series, spec.output_dir / "protocol_trajectory.png",
                                         spec.params.period, markers)
        envelope.emitted_files.append(fig.name)
        fig = plotting.phase_space_figure(series, spec.output_dir / "protocol_phase_space.png",
                                          space.delta_x, space.delta_p)
        envelope.emitted_files.append(fig.name)
    print(f"  c_full = {result.c_full:.6g}, d_eff = {result.d_eff:.6g} "
          f"vs closed form {result.d01_analytic:.6g} "
          f"({100 * result.relative_deviation:+.1f}%), "
          f"revival fidelity = {result.revival_fidelity:.6g}")
    return envelope


def _cmd_sweep(spec: RunSpec) -> reporting.ReportEnvelope:
    if not spec.axis:
        raise ConfigError("sweep requires --axis")
    if not spec.values:
        raise ConfigError("sweep requires --values")
    space = spec.params.space(spec.fock_dim)
    table = sweep(spec.params, spec.axis, spec.values, spec.mode, space,
                  spec.config, alpha=spec.alpha, workers=spec.workers)
    envelope = reporting.ReportEnvelope(
        command="sweep", params=spec.params, fock_dim=spec.fock_dim,
        config=spec.config, results={"sweep": reporting.sweep_table_to_dict(table)},
        seed=spec.seed, preset=spec.preset, warnings=spec.warnings,
    )
    if spec.table_format == "csv":
        path = reporting.write_sweep_csv(spec.output_dir / "sweep.csv", table)
        envelope.emitted_files.append(path.name)
    if spec.plot:
        fig = plotting.sweep_figure(table, spec.output_dir / "sweep.png")
        envelope.emitted_files.append(fig.name)
    for row in table.rows:
        numeric = f", d_eff = {row.d_eff_numeric:.6g}" if row.d_eff_numeric is not None else ""
        err = f"  ERROR: {row.error}" if row.error else ""
        print(f"  {spec.axis} = {row.axis_value:<12.6g} d01 = {row.d01_analytic:.6g}{numeric}{err}")
    return envelope


_COMMANDS = {
    "feasibility": _cmd_feasibility,
    "simulate": _cmd_simulate,
    "protocol": _cmd_protocol,
    "sweep": _cmd_sweep,
}


def _spec_run_args(spec: RunSpec) -> dict:
    args = {
        "seed": spec.seed,
        "alpha_re": spec.alpha.real,
        "alpha_im": spec.alpha.imag,
        "thermal": spec.thermal_nbar,
        "periods": spec.periods,
        "thermal_samples": spec.thermal_samples,
        "workers": spec.workers,
        "axis": spec.axis,
        "values": spec.values,
        "mode": spec.mode,
    }
    return {k: v for k, v in args.items() if v is not None}


def run_command(spec: RunSpec) -> reporting.ReportEnvelope:
    """Execute a resolved RunSpec and write its envelope; returns it."""
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    envelope = _COMMANDS[spec.command](spec)
    envelope.run_args = _spec_run_args(spec)
    path = envelope.write(spec.output_dir / f"{spec.command}.json")
    print(f"  report envelope: {path}")
    return envelope


def _error_payload(exc: QprobeError, code: int) -> dict:
    payload = {"schema": "qprobe-error-v1", "error": type(exc).__name__,
               "message": str(exc), "exit_code": code}
    for attr in ("step", "drift", "population", "deficit"):
        value = getattr(exc, attr, None)
        if value is not None:
            payload[attr] = value
    return payload


def _exit_code_for(exc: QprobeError) -> int:
    if isinstance(exc, (ConfigError, ParameterError)):
        return EXIT_CONFIG
    if isinstance(exc, TruncationError):
        return EXIT_TRUNCATION
    if isinstance(exc, IntegrationError):
        return EXIT_INTEGRATOR
    if isinstance(exc, InfeasibleError):
        return EXIT_INFEASIBLE
    return 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        spec = load_spec(args)
        run_command(spec)
        return EXIT_OK
    except QprobeError as exc:
        code = _exit_code_for(exc)
        print(json.dumps(_error_payload(exc, code)), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
