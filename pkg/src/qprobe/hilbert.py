"""Truncated Fock-space operator algebra for the qubit (x) oscillator system.

The composite Hilbert space is qubit-first: a composite matrix acts on
C^2 (x) C^N with N the oscillator truncation.  Operators are plain dense
complex ndarrays; constructors that claim hermiticity validate the claim
at build time.  Ladder identities hold exactly below the truncation
boundary; anything touching the top Fock level is monitored by the
integrator rather than hidden here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

HERMITICITY_RTOL = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
QUBIT_IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpaceDescriptor:
    """Geometry of the truncated composite space.

    delta_x and delta_p are the coherent-state position and momentum
    spreads sqrt(hbar/2 m omega) and sqrt(m hbar omega / 2); their product
    is hbar/2 by construction.
    """

    fock_dim: int
    delta_x: float
    delta_p: float
    hbar: float = 1.0

    @property
    def total_dim(self) -> int:
        return 2 * self.fock_dim

    def __post_init__(self):
        if self.fock_dim < 2:
            raise ParameterError(f"fock_dim must be >= 2, got {self.fock_dim}")
        product = self.delta_x * self.delta_p
        target = 0.5 * self.hbar
        if abs(product - target) > 1e-12 * target:
            raise ParameterError(
                f"delta_x*delta_p = {product!r} violates hbar/2 = {target!r}"
            )


def build_space(fock_dim: int, m: float, omega: float, hbar: float = 1.0) -> SpaceDescriptor:
    """Build the space descriptor for an oscillator of mass m and frequency omega."""
    if fock_dim < 2:
        raise ParameterError(f"fock_dim must be >= 2, got {fock_dim}")
    if m <= 0 or omega <= 0 or hbar <= 0:
        raise ParameterError(
            f"m, omega, hbar must be positive (got m={m}, omega={omega}, hbar={hbar})"
        )
    delta_x = np.sqrt(hbar / (2.0 * m * omega))
    delta_p = np.sqrt(m * hbar * omega / 2.0)
    return SpaceDescriptor(fock_dim=fock_dim, delta_x=delta_x, delta_p=delta_p, hbar=hbar)


def as_hermitian(matrix: np.ndarray) -> np.ndarray:
    """Validate a hermiticity claim made at construction time."""
    scale = np.abs(matrix).max()
    if scale == 0.0:
        return matrix
    deviation = np.abs(matrix - matrix.conj().T).max()
    if deviation > HERMITICITY_RTOL * scale:
        raise ParameterError(
            f"matrix claimed hermitian but max|M - M^dag| = {deviation:.3e} "
            f"(scale {scale:.3e})"
        )
    return matrix


def annihilation(fock_dim: int) -> np.ndarray:
    """Truncated annihilation operator, <n-1|a|n> = sqrt(n)."""
    a = np.zeros((fock_dim, fock_dim), dtype=complex)
    ns = np.arange(1, fock_dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def oscillator_operators(space: SpaceDescriptor) -> dict[str, np.ndarray]:
    """Ladder and quadrature operators on the oscillator factor.

    Returns a dict with keys 'a', 'adag', 'x', 'p', 'n'.  x and p are
    hermitian by construction; [x, p] = i hbar holds exactly on basis
    states below the truncation boundary.
    """
    a = annihilation(space.fock_dim)
    adag = a.conj().T
    x = as_hermitian(space.delta_x * (a + adag))
    p = as_hermitian(1.0j * space.delta_p * (adag - a))
    # exact integer diagonal (the a^dag a product only matches to rounding)
    n = np.diag(np.arange(space.fock_dim, dtype=float)).astype(complex)
    return {"a": a, "adag": adag, "x": x, "p": p, "n": n}


def embed(qubit_op: np.ndarray, osc_op: np.ndarray) -> np.ndarray:
    """Kronecker embedding with the qubit factor first."""
    qubit_op = np.asarray(qubit_op, dtype=complex)
    osc_op = np.asarray(osc_op, dtype=complex)
    if qubit_op.shape != (2, 2):
        raise ParameterError(f"qubit operator must be 2x2, got {qubit_op.shape}")
    if osc_op.ndim != 2 or osc_op.shape[0] != osc_op.shape[1]:
        raise ParameterError(f"oscillator operator must be square, got {osc_op.shape}")
    return np.kron(qubit_op, osc_op)


@dataclass
class CompositeDensity:
    """Density matrix on the composite space, tagged with its time stamp."""

    matrix: np.ndarray
    time: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def copy(self) -> "CompositeDensity":
        return CompositeDensity(self.matrix.copy(), self.time)

    def validate(self, trace_tol: float = 1e-8, herm_tol: float = 1e-10,
                 eig_floor: float = -1e-8) -> "CompositeDensity":
        """Check trace, hermiticity and (spot-check) positivity."""
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > trace_tol:
            raise ParameterError(f"state trace {tr!r} deviates from 1 beyond {trace_tol}")
        herm_dev = np.abs(self.matrix - self.matrix.conj().T).max()
        if herm_dev > herm_tol:
            raise ParameterError(f"state hermiticity deviation {herm_dev:.3e} > {herm_tol}")
        min_eig = np.linalg.eigvalsh(self.matrix).min()
        if min_eig < eig_floor:
            raise ParameterError(f"state minimum eigenvalue {min_eig:.3e} < {eig_floor}")
        return self


def expectation(op: np.ndarray, rho: CompositeDensity | np.ndarray) -> complex:
    """trace(op @ rho); real up to roundoff for hermitian op and valid rho."""
    mat = rho.matrix if isinstance(rho, CompositeDensity) else rho
    if op.shape != mat.shape:
        raise ParameterError(f"dimension mismatch: op {op.shape} vs state {mat.shape}")
    return complex(np.einsum("ij,ji->", op, mat))


def partial_trace_oscillator(rho: CompositeDensity | np.ndarray) -> np.ndarray:
    """Reduced 2x2 qubit state (trace over the oscillator factor)."""
    mat = rho.matrix if isinstance(rho, CompositeDensity) else rho
    dim = mat.shape[0]
    if dim % 2 != 0 or mat.shape[0] != mat.shape[1]:
        raise ParameterError(f"composite state must be 2N x 2N, got {mat.shape}")
    fock_dim = dim // 2
    blocks = mat.reshape(2, fock_dim, 2, fock_dim)
    return np.einsum("anbn->ab", blocks)


def partial_trace_qubit(rho: CompositeDensity | np.ndarray) -> np.ndarray:
    """Reduced N x N oscillator state (trace over the qubit factor)."""
    mat = rho.matrix if isinstance(rho, CompositeDensity) else rho
    dim = mat.shape[0]
    if dim % 2 != 0 or mat.shape[0] != mat.shape[1]:
        raise ParameterError(f"composite state must be 2N x 2N, got {mat.shape}")
    fock_dim = dim // 2
    blocks = mat.reshape(2, fock_dim, 2, fock_dim)
    return np.einsum("qnqm->nm", blocks)


def qubit_coherence(rho: CompositeDensity | np.ndarray) -> float:
    """C = 2 |<0| rho_Q |1>|, the readout quantity of the whole experiment."""
    rho_q = partial_trace_oscillator(rho)
    return 2.0 * abs(rho_q[0, 1])


def fidelity_to_pure(state_vector: np.ndarray, rho: np.ndarray) -> float:
    """Fidelity <psi|rho|psi> of a density matrix against a pure reference."""
    val = np.vdot(state_vector, rho @ state_vector)
    return float(val.real)
