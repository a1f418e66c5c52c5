"""Initial-state preparation: coherent, thermal, and protocol input states.

Thermal states double as a Monte Carlo resource: they can be sampled as a
Gaussian-weighted mixture of coherent states (the P-function reading),
which is how the protocol averages over a thermal oscillator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, TruncationError
from .hilbert import CompositeDensity, SpaceDescriptor

# Name of the pseudo-random generator algorithm; recorded in run metadata
# so thermal-averaging results are reproducible per seed within one build.
GENERATOR_NAME = "numpy.random.PCG64"

COHERENT_DEFICIT_TOL = 1e-8
THERMAL_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class CoherentLabel:
    """Dimensionless coherent amplitude labeling a classical phase-space point."""

    alpha: complex

    @property
    def mean_occupation(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class ThermalSpec:
    """Mean occupation of a thermal oscillator state."""

    nbar: float

    def __post_init__(self):
        if self.nbar < 0:
            raise ParameterError(f"nbar must be >= 0, got {self.nbar}")


def fock_guard_dim(amplitude: float) -> float:
    """Minimum fock_dim adequate for amplitude |alpha| (mean + 3 sigma of the
    Poisson number distribution, rounded up)."""
    return amplitude**2 + 3.0 * amplitude + 3.0


def check_truncation(amplitude: float, fock_dim: int) -> None:
    needed = fock_guard_dim(amplitude)
    if needed > fock_dim:
        raise TruncationError(
            f"fock_dim {fock_dim} inadequate for |alpha| = {amplitude:.3f} "
            f"(guard requires >= {int(np.ceil(needed))})"
        )


def coherent_state(label: CoherentLabel | complex, space: SpaceDescriptor,
                   deficit_tol: float = COHERENT_DEFICIT_TOL) -> np.ndarray:
    """Truncated, renormalized coherent state vector on the oscillator factor.

    The amplitudes follow c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!) below
    the cutoff, built by the stable recursion c_n = c_{n-1} alpha/sqrt(n).
    Raises TruncationError (carrying the norm deficit) when the cutoff is
    inadequate.
    """
    alpha = label.alpha if isinstance(label, CoherentLabel) else complex(label)
    c = np.zeros(space.fock_dim, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, space.fock_dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    norm_sq = float(np.vdot(c, c).real)
    deficit = 1.0 - norm_sq
    needed = fock_guard_dim(abs(alpha))
    if needed > space.fock_dim:
        raise TruncationError(
            f"fock_dim {space.fock_dim} inadequate for |alpha| = {abs(alpha):.3f} "
            f"(guard requires >= {int(np.ceil(needed))}; norm deficit {deficit:.3e})",
            deficit=deficit,
        )
    if deficit > deficit_tol:
        raise TruncationError(
            f"coherent state |alpha|={abs(alpha):.3f} loses norm {deficit:.3e} "
            f"at fock_dim {space.fock_dim}",
            deficit=deficit,
        )
    return c / np.sqrt(norm_sq)


def coherent_norm_deficit(alpha: complex, space: SpaceDescriptor) -> float:
    """Pre-renormalization norm deficit of the truncated coherent expansion."""
    weights = np.exp(-abs(alpha) ** 2) * np.cumprod(
        np.concatenate(([1.0], abs(alpha) ** 2 / np.arange(1, space.fock_dim)))
    )
    return float(1.0 - weights.sum())


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Exact overlap <alpha|beta> of untruncated coherent states."""
    return np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + np.conj(alpha) * beta)


def thermal_state(spec: ThermalSpec | float, space: SpaceDescriptor) -> np.ndarray:
    """Truncated, renormalized thermal density matrix on the oscillator factor.

    Diagonal Boltzmann weights proportional to (nbar/(nbar+1))^n.  Raises
    TruncationError when the discarded geometric tail weighs more than
    THERMAL_TAIL_TOL.
    """
    nbar = spec.nbar if isinstance(spec, ThermalSpec) else float(spec)
    if nbar < 0:
        raise ParameterError(f"nbar must be >= 0, got {nbar}")
    if nbar == 0.0:
        rho = np.zeros((space.fock_dim, space.fock_dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    ratio = nbar / (nbar + 1.0)
    tail = ratio**space.fock_dim
    if tail > THERMAL_TAIL_TOL:
        raise TruncationError(
            f"thermal tail weight {tail:.3e} at fock_dim {space.fock_dim} "
            f"exceeds {THERMAL_TAIL_TOL}",
            deficit=tail,
        )
    weights = ratio ** np.arange(space.fock_dim)
    weights /= weights.sum()
    return np.diag(weights).astype(complex)


def sample_coherent_label(spec: ThermalSpec | float, seed) -> CoherentLabel:
    """Draw a coherent label from the thermal Glauber distribution
    p(alpha) = exp(-|alpha|^2/nbar) / (pi nbar).

    ``seed`` may be an integer or a numpy Generator (for streaming draws).
    nbar = 0 degenerates to alpha = 0 rather than erroring.
    """
    nbar = spec.nbar if isinstance(spec, ThermalSpec) else float(spec)
    if nbar < 0:
        raise ParameterError(f"nbar must be >= 0, got {nbar}")
    if nbar == 0.0:
        return CoherentLabel(0.0 + 0.0j)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sigma = np.sqrt(nbar / 2.0)
    re, im = rng.normal(0.0, sigma, size=2)
    return CoherentLabel(complex(re, im))


def qubit_plus_density() -> np.ndarray:
    """|+><+| on the qubit factor."""
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    return np.outer(plus, plus.conj())


def prepare_protocol_input(osc_init, space: SpaceDescriptor) -> CompositeDensity:
    """Composite initial state |+><+|_Q (x) rho_A(0).

    ``osc_init`` may be a CoherentLabel (or bare complex amplitude), a
    ThermalSpec, or an explicit oscillator density matrix.
    """
    if isinstance(osc_init, CoherentLabel):
        vec = coherent_state(osc_init, space)
        rho_a = np.outer(vec, vec.conj())
    elif isinstance(osc_init, ThermalSpec):
        rho_a = thermal_state(osc_init, space)
    elif isinstance(osc_init, (complex, float, int)):
        vec = coherent_state(CoherentLabel(complex(osc_init)), space)
        rho_a = np.outer(vec, vec.conj())
    else:
        rho_a = np.asarray(osc_init, dtype=complex)
        if rho_a.shape != (space.fock_dim, space.fock_dim):
            raise ParameterError(
                f"oscillator density must be {space.fock_dim}x{space.fock_dim}, "
                f"got {rho_a.shape}"
            )
    matrix = np.kron(qubit_plus_density(), rho_a)
    return CompositeDensity(matrix=matrix, time=0.0)
