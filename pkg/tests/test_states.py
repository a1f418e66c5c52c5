import numpy as np
import pytest

from qprobe import ParameterError, TruncationError, build_space
from qprobe.hilbert import oscillator_operators, qubit_coherence
from qprobe.states import (
    CoherentLabel,
    ThermalSpec,
    coherent_norm_deficit,
    coherent_overlap,
    coherent_state,
    fock_guard_dim,
    prepare_protocol_input,
    sample_coherent_label,
    thermal_state,
)


def test_vacuum_is_exact(space32):
    vec = coherent_state(CoherentLabel(0.0), space32)
    expected = np.zeros(32)
    expected[0] = 1.0
    assert np.array_equal(vec, expected.astype(complex))


def test_coherent_mean_occupation(space32):
    vec = coherent_state(CoherentLabel(1.0), space32)
    n_op = oscillator_operators(space32)["n"]
    assert (vec.conj() @ n_op @ vec).real == pytest.approx(1.0, abs=1e-8)


def test_coherent_norm_deficit_matches_poisson_tail():
    scipy_stats = pytest.importorskip("scipy.stats")
    # at fock_dim 30 the discarded tail of the |alpha|^2 = 4 distribution
    # is far below the double-precision floor, so just bound it
    assert coherent_norm_deficit(2.0, build_space(30, 1.0, 1.0)) < 1e-6
    # at fock_dim 12 the tail is resolvable and must match the Poisson
    # survival function computed independently
    deficit = coherent_norm_deficit(2.0, build_space(12, 1.0, 1.0))
    tail = scipy_stats.poisson.sf(11, 4.0)
    assert deficit == pytest.approx(tail, rel=1e-9)


def test_coherent_truncation_guard():
    sp = build_space(8, 1.0, 1.0)
    with pytest.raises(TruncationError):
        coherent_state(CoherentLabel(3.0), sp)  # guard: 9 + 9 + 3 > 8


def test_coherent_deficit_error_carries_magnitude():
    sp = build_space(16, 1.0, 1.0)
    # amplitude passes the cheap guard but fails the strict deficit check
    with pytest.raises(TruncationError) as err:
        coherent_state(CoherentLabel(2.5), sp, deficit_tol=1e-12)
    assert err.value.deficit is not None and err.value.deficit > 1e-12


def test_overlap_law(rng):
    sp = build_space(48, 1.0, 1.0)
    for _ in range(20):
        alpha, beta = rng.uniform(-3, 3, 2) * np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
        alpha *= rng.uniform(0, 1)
        va = coherent_state(CoherentLabel(alpha), sp)
        vb = coherent_state(CoherentLabel(beta), sp)
        measured = abs(np.vdot(va, vb)) ** 2
        assert measured == pytest.approx(np.exp(-abs(alpha - beta) ** 2), abs=1e-6)
        assert abs(coherent_overlap(alpha, beta)) ** 2 == pytest.approx(
            np.exp(-abs(alpha - beta) ** 2), rel=1e-12)


def test_thermal_zero_occupation_is_vacuum(space32):
    rho = thermal_state(ThermalSpec(0.0), space32)
    expected = np.zeros((32, 32), dtype=complex)
    expected[0, 0] = 1.0
    assert np.array_equal(rho, expected)


def test_thermal_weights():
    sp = build_space(64, 1.0, 1.0)
    rho = thermal_state(ThermalSpec(1.0), sp)
    assert rho[0, 0].real == pytest.approx(0.5, abs=1e-9)
    assert rho[1, 1].real == pytest.approx(0.25, abs=1e-9)
    n_op = oscillator_operators(sp)["n"]
    assert np.trace(n_op @ rho).real == pytest.approx(1.0, abs=1e-4)


def test_thermal_purity_closed_form():
    sp = build_space(64, 1.0, 1.0)
    rho = thermal_state(ThermalSpec(0.5), sp)
    assert np.trace(rho @ rho).real == pytest.approx(0.5, abs=1e-6)


def test_thermal_truncation_guard():
    sp = build_space(8, 1.0, 1.0)
    with pytest.raises(TruncationError):
        thermal_state(ThermalSpec(5.0), sp)


def test_sampling_degenerate_at_zero():
    assert sample_coherent_label(ThermalSpec(0.0), 7).alpha == 0.0


def test_sampling_deterministic_per_seed():
    a = sample_coherent_label(ThermalSpec(1.0), 42)
    b = sample_coherent_label(ThermalSpec(1.0), 42)
    assert a.alpha == b.alpha


def test_sampling_second_moment():
    rng = np.random.default_rng(5)
    samples = np.array([sample_coherent_label(ThermalSpec(1.0), rng).alpha
                        for _ in range(100_000)])
    mean_sq = (np.abs(samples) ** 2).mean()
    # |alpha|^2 is exponential with mean nbar: stderr = nbar/sqrt(M)
    assert abs(mean_sq - 1.0) < 3.0 / np.sqrt(100_000)


def test_sampling_rejects_negative_nbar():
    with pytest.raises(ParameterError):
        sample_coherent_label(-0.5, 0)


def test_fock_guard_formula():
    assert fock_guard_dim(2.0) == pytest.approx(4 + 6 + 3)


def test_prepare_protocol_input_vacuum(space32):
    rho = prepare_protocol_input(CoherentLabel(0.0), space32)
    n = space32.fock_dim
    plus = np.zeros(2 * n, dtype=complex)
    plus[0] = plus[n] = 1.0 / np.sqrt(2.0)
    assert np.abs(rho.matrix - np.outer(plus, plus.conj())).max() < 1e-12
    assert qubit_coherence(rho) == pytest.approx(1.0, abs=1e-12)


def test_prepare_protocol_input_thermal_zero_matches_vacuum(space32):
    a = prepare_protocol_input(CoherentLabel(0.0), space32)
    b = prepare_protocol_input(ThermalSpec(0.0), space32)
    assert np.array_equal(a.matrix, b.matrix)


def test_prepare_protocol_input_quadratures():
    sp = build_space(48, 1.0, 1.0)
    alpha = 1.0 + 0.5j
    rho = prepare_protocol_input(CoherentLabel(alpha), sp)
    ops = oscillator_operators(sp)
    n = sp.fock_dim
    osc = rho.matrix[:n, :n] + rho.matrix[n:, n:]
    x_mean = np.trace(ops["x"] @ osc).real
    p_mean = np.trace(ops["p"] @ osc).real
    assert x_mean == pytest.approx(2.0 * sp.delta_x * alpha.real, rel=1e-6)
    assert p_mean == pytest.approx(2.0 * sp.delta_p * alpha.imag, rel=1e-6)


def test_prepared_states_positive(space32):
    for init in (CoherentLabel(0.8 - 0.3j), ThermalSpec(0.7)):
        rho = prepare_protocol_input(init, space32)
        assert np.linalg.eigvalsh(rho.matrix).min() >= -1e-10
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-8)


def test_monte_carlo_matches_analytic_thermal():
    # light version of the reconstruction check (the full 1e4-sample run
    # lives in the acceptance suite)
    sp = build_space(32, 1.0, 1.0)
    n_samples = 2000
    children = np.random.SeedSequence(123).spawn(n_samples)
    acc = np.zeros((32, 32), dtype=complex)
    for child in children:
        gen = np.random.default_rng(child)
        label = sample_coherent_label(ThermalSpec(0.5), gen)
        vec = coherent_state(label, sp)
        acc += np.outer(vec, vec.conj())
    acc /= n_samples
    target = thermal_state(ThermalSpec(0.5), sp)
    distance = 0.5 * np.abs(np.linalg.eigvalsh(acc - target)).sum()
    assert distance < 0.05
