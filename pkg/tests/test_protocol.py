import math

import pytest

from qprobe import (
    InfeasibleError,
    IntegratorConfig,
    build_space,
    design_summary,
    reference_params,
    run_single,
    run_thermal,
    sweep,
)
from qprobe.protocol import check_protocol_feasible, max_branch_excursion

FAST = IntegratorConfig(record_stride=200)


def test_unitary_protocol_is_lossless():
    params = reference_params(chi=1.0, nbar=0.5, d01=0.0)
    space = build_space(48, 1, 1)
    res = run_single(0.0, params, space, FAST)
    assert res.c_full >= 1.0 - 1e-5
    assert abs(res.d_eff) < 1e-5
    assert res.revival_fidelity >= 1.0 - 1e-5


def test_uncoupled_qubit_keeps_coherence():
    # no branch separation means no which-path record: the qubit coherence
    # survives arbitrary oscillator damping
    params = reference_params(chi=1.0, nbar=0.5, d01=0.5).with_overrides(epsilon=0.0)
    space = build_space(32, 1, 1)
    res = run_single(0.0, params, space, FAST)
    assert res.c_full == pytest.approx(1.0, abs=1e-6)
    assert res.d01_analytic == pytest.approx(0.0, abs=1e-15)


def test_run_single_deterministic(desk_params):
    space = build_space(64, 1, 1)
    a = run_single(0.1 + 0.05j, desk_params, space, FAST)
    b = run_single(0.1 + 0.05j, desk_params, space, FAST)
    assert a.c_full == b.c_full
    assert a.d_eff == b.d_eff
    assert a.revival_fidelity == b.revival_fidelity


def test_desk_scale_exponent_matches_closed_form(desk_params):
    space = build_space(80, 1, 1)
    res = run_single(0.0, desk_params, space, FAST)
    assert abs(res.d_eff - 0.5) / 0.5 <= 0.15
    assert res.dissipator_kind == "quantum-optical"
    assert res.branch_separation == pytest.approx(2.0, rel=1e-12)


def test_half_step_exponent_consistent_in_high_occupation_regime():
    # overlap-corrected half-period exponent agrees with the full-period
    # one within 20% once the occupation is high enough that the label
    # overlap correction is subleading
    params = reference_params(chi=1.0, nbar=5.0, d01=0.4)
    space = build_space(80, 1, 1)
    res = run_single(0.0, params, space, FAST)
    assert abs(res.d_eff_half - res.d_eff) / res.d_eff <= 0.20


def test_infeasible_truncation_raises_before_integration(desk_params):
    # branch excursion 2 chi + shift needs ~14 levels; 8 cannot hold it
    space = build_space(8, 1, 1)
    with pytest.raises(InfeasibleError):
        run_single(0.0, desk_params, space, FAST)
    with pytest.raises(InfeasibleError):
        run_single(2.5, desk_params, build_space(16, 1, 1), FAST)


def test_excursion_guard_formula(desk_params):
    design = design_summary(desk_params)
    excursion = max_branch_excursion(1.0 + 0.0j, design)
    assert excursion == pytest.approx(1.0 + 2.0 + design.dp_over_2dp)
    check_protocol_feasible(0.0, design, build_space(64, 1, 1))


def test_revival_improves_with_quality():
    space = build_space(64, 1, 1)
    fidelities = []
    for gamma in (0.1, 0.01, 0.001):
        params = reference_params(chi=1.0, nbar=0.0, d01=0.1).with_overrides(gamma=gamma)
        res = run_single(0.0, params, space, FAST)
        fidelities.append(res.revival_fidelity)
    assert fidelities[0] < fidelities[1] < fidelities[2]
    assert fidelities[2] > 0.99


def test_thermal_zero_occupation_equals_single():
    params = reference_params(chi=1.0, nbar=0.5, d01=0.25).with_overrides(theta=0.0)
    space = build_space(48, 1, 1)
    single = run_single(0.0, params, space, FAST)
    thermal = run_thermal(params, space, FAST, n_samples=3, seed=7, workers=1)
    assert all(r.d_eff == single.d_eff for r in thermal.results)
    assert thermal.mean_d_eff == pytest.approx(single.d_eff, rel=1e-15)
    assert thermal.stderr_d_eff == pytest.approx(0.0, abs=1e-16)
    assert all(a == 0.0 for a in thermal.samples)


def test_thermal_deterministic_per_seed(desk_params):
    space = build_space(80, 1, 1)
    a = run_thermal(desk_params, space, FAST, n_samples=3, seed=42, workers=1)
    b = run_thermal(desk_params, space, FAST, n_samples=3, seed=42, workers=2)
    assert a.samples == b.samples
    assert a.mean_d_eff == b.mean_d_eff
    assert a.mean_c_full == b.mean_c_full


def test_thermal_rejection_guard():
    # occupation too high for the truncation: most draws violate the
    # excursion guard, tripping the 10% bias guard
    params = reference_params(chi=1.0, nbar=2.0, d01=0.25)
    space = build_space(18, 1, 1)
    with pytest.raises(InfeasibleError):
        run_thermal(params, space, FAST, n_samples=10, seed=3, workers=1)


def test_sweep_theta_proportionality(desk_params):
    params = desk_params.with_overrides(theta=15.0)
    space = build_space(64, 1, 1)
    table = sweep(params, "theta", [15.0, 30.0, 60.0], "analytic", space, FAST)
    d01s = [row.d01_analytic for row in table.rows]
    assert d01s[1] / d01s[0] == pytest.approx(2.0, rel=0.01)
    assert d01s[2] / d01s[0] == pytest.approx(4.0, rel=0.01)
    assert all(row.d_eff_numeric is None for row in table.rows)


def test_sweep_mass_rule(desk_params):
    from qprobe.analytic import branch_separation_x
    space = build_space(64, 1, 1)
    table = sweep(desk_params, "m", [1.0, 2.0], "analytic", space, FAST)
    assert table.rows[1].d01_analytic / table.rows[0].d01_analytic == pytest.approx(2.0, rel=1e-12)
    # the coupling rescaling keeps the physical branch separation fixed
    # (the separation in coherent-width units still grows with sqrt(m))
    assert branch_separation_x(table.rows[1].params) == pytest.approx(
        branch_separation_x(table.rows[0].params), rel=1e-12)
    assert table.metadata["epsilon_rule"] is not None


def test_sweep_gamma_monotone(desk_params):
    space = build_space(64, 1, 1)
    values = [1e-2, 1e-3, 1e-4, 0.0]
    table = sweep(desk_params, "gamma", values, "analytic", space, FAST)
    d01s = [row.d01_analytic for row in table.rows]
    assert all(a > b for a, b in zip(d01s, d01s[1:]))
    assert d01s[-1] == 0.0


def test_sweep_records_row_errors(desk_params):
    space = build_space(64, 1, 1)
    table = sweep(desk_params, "m", [1.0, -2.0], "analytic", space, FAST)
    assert table.rows[0].error is None
    assert table.rows[1].error is not None
    assert math.isnan(table.rows[1].d01_analytic)


def test_sweep_numeric_mode(desk_params):
    space = build_space(80, 1, 1)
    table = sweep(desk_params, "gamma", [desk_params.gamma], "both", space, FAST)
    row = table.rows[0]
    assert row.d_eff_numeric == pytest.approx(row.d01_analytic, rel=0.15)
    assert row.c_full == pytest.approx(math.exp(-2.0 * row.d_eff_numeric), rel=1e-9)


def test_sweep_rejects_bad_axis(desk_params):
    space = build_space(32, 1, 1)
    with pytest.raises(Exception):
        sweep(desk_params, "flux", [1.0], "analytic", space, FAST)
