"""The two-step coherence-probing experiment.

One run prepares (|0> + |1>)/sqrt(2) (x) |alpha>, evolves for a full
oscillator period recording the half-period and full-period states, and
reads the effective per-step decoherence exponent off the final qubit
coherence.  Thermal averaging samples the initial coherent label from the
Gaussian mixture decomposition of the thermal state; sweeps scan one
physical axis and tabulate closed-form against simulated exponents.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import (
    DimensionlessDesign,
    FeasibilityReport,
    PhysicalParams,
    branch_amplitudes,
    design_summary,
    feasibility,
)
from .dynamics import IntegratorConfig, Trajectory, evolve
from .errors import InfeasibleError, ParameterError
from .hilbert import (
    SpaceDescriptor,
    partial_trace_qubit,
    fidelity_to_pure,
    qubit_coherence,
)
from .states import (
    CoherentLabel,
    ThermalSpec,
    coherent_overlap,
    coherent_state,
    fock_guard_dim,
    prepare_protocol_input,
    sample_coherent_label,
)

SWEEP_AXES = ("theta", "m", "epsilon", "gamma", "omega")
SWEEP_MODES = ("analytic", "numeric", "both")


@dataclass(frozen=True)
class ProtocolResult:
    """Outcome of a single protocol run."""

    alpha: complex
    c_half: float
    c_full: float
    d_eff: float
    d_eff_half: float
    d01_analytic: float
    branch_separation: float
    branch_overlap_analytic: float
    revival_fidelity: float
    regime_report: FeasibilityReport
    design: DimensionlessDesign
    dissipator_kind: str
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    @property
    def relative_deviation(self) -> float:
        """(d_eff - d01) / d01; inf when the analytic exponent vanishes."""
        if self.d01_analytic == 0.0:
            return math.inf if self.d_eff != 0.0 else 0.0
        return (self.d_eff - self.d01_analytic) / self.d01_analytic


@dataclass
class ThermalProtocolResult:
    """Aggregate over thermal samples of the initial coherent label."""

    samples: list[complex]
    results: list[ProtocolResult]
    mean_c_full: float
    stderr_c_full: float
    mean_d_eff: float
    stderr_d_eff: float
    d01_analytic: float
    n_samples: int
    n_rejected: int
    seed: int

    @property
    def d_eff_values(self) -> np.ndarray:
        return np.array([r.d_eff for r in self.results])

    @property
    def coefficient_of_variation(self) -> float:
        values = self.d_eff_values
        mean = values.mean()
        if mean == 0.0:
            return math.inf
        return float(values.std(ddof=1) / mean)


@dataclass
class SweepRow:
    axis_value: float
    d01_analytic: float
    d_eff_numeric: float | None
    c_full: float | None
    design: DimensionlessDesign | None
    report: FeasibilityReport | None
    params: PhysicalParams | None
    error: str | None = None


@dataclass
class SweepTable:
    axis: str
    mode: str
    rows: list[SweepRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def max_branch_excursion(alpha: complex, design: DimensionlessDesign) -> float:
    """Largest coherent amplitude visited by either branch during a run."""
    return abs(alpha) + 2.0 * abs(design.chi) + abs(design.dp_over_2dp)


def check_protocol_feasible(alpha: complex, design: DimensionlessDesign,
                            space: SpaceDescriptor) -> None:
    excursion = max_branch_excursion(alpha, design)
    needed = fock_guard_dim(excursion)
    if needed > space.fock_dim:
        raise InfeasibleError(
            f"branch excursion |alpha| = {excursion:.2f} needs fock_dim >= "
            f"{int(math.ceil(needed))}, have {space.fock_dim}"
        )


def run_single(alpha, params: PhysicalParams, space: SpaceDescriptor,
               config: IntegratorConfig = IntegratorConfig(),
               keep_trajectory: bool = True) -> ProtocolResult:
    """Run the two-step protocol for one initial coherent label.

    Evolves to the full period recording the half-period state; the
    effective exponent is d_eff = -ln(c_full)/2.  The half-period
    diagnostic d_eff_half corrects the raw half-period coherence by the
    closed-form branch-label overlap (the labels do not coincide at the
    half period, so the raw coherence under-reports the exponent).
    Set keep_trajectory=False to drop the recorded samples (thermal
    averaging does, to keep worker results light).
    """
    label = alpha if isinstance(alpha, CoherentLabel) else CoherentLabel(complex(alpha))
    design = design_summary(params)
    check_protocol_feasible(label.alpha, design, space)
    if config.steps_per_period % 2 != 0:
        raise ParameterError("steps_per_period must be even so T/2 lies on the step grid")
    rho0 = prepare_protocol_input(label, space)
    period = params.period
    traj = evolve(rho0, period, params, space, config,
                  checkpoint_times=(period / 2.0, period))
    half_state = traj.state_at(period / 2.0)
    full_state = traj.state_at(period)
    c_half = qubit_coherence(half_state)
    c_full = qubit_coherence(full_state)
    branches = branch_amplitudes(label.alpha, params)
    overlap = abs(coherent_overlap(branches.alpha0p, branches.alpha1p))
    d_eff = -0.5 * math.log(max(c_full, 1e-300))
    raw_half = -math.log(max(c_half, 1e-300))
    d_eff_half = raw_half + math.log(max(overlap, 1e-300))
    osc_full = partial_trace_qubit(full_state)
    revival = fidelity_to_pure(coherent_state(label, space), osc_full)
    return ProtocolResult(
        alpha=label.alpha,
        c_half=c_half,
        c_full=c_full,
        d_eff=d_eff,
        d_eff_half=d_eff_half,
        d01_analytic=design.d01,
        branch_separation=design.dx_over_2dx,
        branch_overlap_analytic=overlap,
        revival_fidelity=revival,
        regime_report=feasibility(design, params),
        design=design,
        dissipator_kind=config.dissipator_kind,
        trajectory=traj if keep_trajectory else None,
    )


def _thermal_sample_labels(params: PhysicalParams, space: SpaceDescriptor,
                           n_samples: int, seed: int) -> tuple[list[complex], int]:
    """Draw accepted coherent labels, resampling truncation-violating draws.

    Each sample owns an independent child stream of the seed, so results
    do not depend on worker scheduling.  Aborts when more than 10% of all
    draws are rejected (the surviving mixture would be biased).
    """
    design = design_summary(params)
    occupancy = design.nbar
    children = np.random.SeedSequence(seed).spawn(n_samples)
    labels: list[complex] = []
    rejected = 0
    for child in children:
        rng = np.random.default_rng(child)
        while True:
            label = sample_coherent_label(ThermalSpec(occupancy), rng)
            try:
                check_protocol_feasible(label.alpha, design, space)
            except InfeasibleError:
                rejected += 1
                if rejected > 0.10 * (n_samples + rejected):
                    raise InfeasibleError(
                        f"thermal sampling rejected {rejected} draws against "
                        f"{n_samples} requested samples (> 10%); increase fock_dim"
                    ) from None
                continue
            labels.append(label.alpha)
            break
    return labels, rejected


def _run_single_worker(args):
    alpha, params, space, config = args
    return run_single(alpha, params, space, config, keep_trajectory=False)


def _map_runs(tasks, workers: int | None):
    if workers is None:
        workers = min(os.cpu_count() or 1, len(tasks))
    if workers <= 1 or len(tasks) <= 1:
        return [_run_single_worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_single_worker, tasks, chunksize=1))


def run_thermal(params: PhysicalParams, space: SpaceDescriptor,
                config: IntegratorConfig, n_samples: int, seed: int,
                workers: int | None = None) -> ThermalProtocolResult:
    """Thermal-average the protocol over sampled initial coherent labels.

    Sample runs execute in parallel (process pool); aggregation is by
    sample index, so results are identical for any worker count.
    """
    if n_samples < 1:
        raise ParameterError(f"n_samples must be >= 1, got {n_samples}")
    labels, rejected = _thermal_sample_labels(params, space, n_samples, seed)
    tasks = [(alpha, params, space, config) for alpha in labels]
    results = _map_runs(tasks, workers)
    c_full = np.array([r.c_full for r in results])
    d_eff = np.array([r.d_eff for r in results])
    design = design_summary(params)

    def stderr(values: np.ndarray) -> float:
        if len(values) < 2:
            return 0.0
        return float(values.std(ddof=1) / math.sqrt(len(values)))

    return ThermalProtocolResult(
        samples=labels,
        results=results,
        mean_c_full=float(c_full.mean()),
        stderr_c_full=stderr(c_full),
        mean_d_eff=float(d_eff.mean()),
        stderr_d_eff=stderr(d_eff),
        d01_analytic=design.d01,
        n_samples=n_samples,
        n_rejected=rejected,
        seed=seed,
    )


def _params_for_axis_value(params: PhysicalParams, axis: str, value: float) -> PhysicalParams:
    if axis not in SWEEP_AXES:
        raise ParameterError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if axis in ("m", "epsilon", "omega") and value <= 0:
        raise ParameterError(f"{axis} must be > 0, got {value}")
    if axis in ("theta", "gamma") and value < 0:
        raise ParameterError(f"{axis} must be >= 0, got {value}")
    if axis == "m":
        # hold the branch separation 2 eps/(m omega^2) fixed: eps scales with m
        scale = value / params.m
        return replace(params, m=value, epsilon=params.epsilon * scale)
    return replace(params, **{axis: value})


def sweep(params: PhysicalParams, axis: str, values, mode: str,
          space: SpaceDescriptor, config: IntegratorConfig = IntegratorConfig(),
          alpha: complex = 0.0, workers: int | None = None) -> SweepTable:
    """Scan one axis; one row per value.

    mode 'analytic' fills only closed-form columns, 'numeric' only the
    simulated ones, 'both' fills both.  Row-level failures are recorded in
    the row instead of aborting the sweep.  For axis 'm' the coupling is
    rescaled proportionally so the branch separation stays fixed; the rule
    is recorded in the table metadata.
    """
    values = list(values)
    if not values:
        raise ParameterError("sweep needs at least one value")
    if axis not in SWEEP_AXES:
        raise ParameterError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    if mode not in SWEEP_MODES:
        raise ParameterError(f"mode must be one of {SWEEP_MODES}, got {mode!r}")
    table = SweepTable(axis=axis, mode=mode,
                       metadata={"alpha": alpha,
                                 "epsilon_rule": "epsilon scaled with m to hold the "
                                                 "branch separation fixed"
                                 if axis == "m" else None})
    numeric_tasks = []
    numeric_rows = []
    for value in values:
        try:
            row_params = _params_for_axis_value(params, axis, value)
            design = design_summary(row_params)
            row = SweepRow(
                axis_value=value,
                d01_analytic=design.d01,
                d_eff_numeric=None,
                c_full=None,
                design=design,
                report=feasibility(design, row_params),
                params=row_params,
            )
            if mode in ("numeric", "both"):
                check_protocol_feasible(alpha, design, space)
                numeric_tasks.append((alpha, row_params, space, config))
                numeric_rows.append(row)
        except Exception as exc:  # recorded, not raised: sweeps must survive bad rows
            row = SweepRow(axis_value=value, d01_analytic=math.nan,
                           d_eff_numeric=None, c_full=None, design=None,
                           report=None, params=None, error=str(exc))
        table.rows.append(row)
    if numeric_tasks:
        try:
            results = _map_runs(numeric_tasks, workers)
        except Exception:
            # fall back to per-row execution so one failure marks one row
            results = []
            for task in numeric_tasks:
                try:
                    results.append(_run_single_worker(task))
                except Exception as exc:
                    results.append(exc)
        for row, res in zip(numeric_rows, results):
            if isinstance(res, Exception):
                row.error = str(res)
            else:
                row.d_eff_numeric = res.d_eff
                row.c_full = res.c_full
    return table
