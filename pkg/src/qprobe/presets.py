"""Named parameter presets.

``flux-lc`` and ``ion-trap`` carry the laboratory parameter choices for
the two proposed realizations (SI units).  ``natural-units-reference`` is
the desk-scale regime every simulation-backed test runs in: natural units,
chi = 1, nbar = 1/2, and gamma tuned for a per-step exponent of 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import (
    PhysicalParams,
    flux_lc_realization,
    ion_trap_realization,
)
from .errors import ConfigError, ParameterError


@dataclass(frozen=True)
class Preset:
    name: str
    params: PhysicalParams
    fock_dim: int
    notes: tuple[str, ...] = ()


def reference_params(chi: float = 1.0, nbar: float = 0.5, d01: float = 0.5,
                     m: float = 1.0, omega: float = 1.0, hbar: float = 1.0,
                     k_b: float = 1.0) -> PhysicalParams:
    """Natural-units parameters hitting a requested (chi, nbar, d01) design.

    Inverts the closed forms: epsilon = chi hbar omega / delta_x, theta
    from the Bose-Einstein occupation, gamma = d01 omega / (16 pi chi^2
    (nbar + 1/2)).
    """
    if chi <= 0:
        raise ParameterError(f"chi must be > 0, got {chi}")
    if nbar < 0 or d01 < 0:
        raise ParameterError("nbar and d01 must be >= 0")
    delta_x = math.sqrt(hbar / (2.0 * m * omega))
    epsilon = chi * hbar * omega / delta_x
    theta = hbar * omega / (k_b * math.log1p(1.0 / nbar)) if nbar > 0 else 0.0
    gamma = d01 * omega / (16.0 * math.pi * chi**2 * (nbar + 0.5)) if d01 > 0 else 0.0
    return PhysicalParams(m=m, omega=omega, gamma=gamma, theta=theta,
                          epsilon=epsilon, hbar=hbar, k_b=k_b)


def flux_lc_preset(flux_quantum: str = "h/2e") -> Preset:
    params = flux_lc_realization(
        inductance=100e-6,
        capacitance=100e-12,
        resistance=1.0,
        qubit_inductance=100e-12,
        flux_linkage=1e-6,
        theta=10e-3,
        flux_quantum=flux_quantum,
    )
    return Preset(
        name="flux-lc",
        params=params,
        fock_dim=64,
        notes=(
            f"flux quantum convention: {flux_quantum}",
            "occupations around 130 put direct density-matrix integration out of "
            "desk-scale reach; use analytic/feasibility commands for this preset",
        ),
    )


def ion_trap_preset() -> Preset:
    params = ion_trap_realization(
        n_ions=100,
        omega=1e6,
        g=100.0 * math.sqrt(10.0) * 1e6,
        eta0=0.1 * math.sqrt(10.0),
        gamma=1e3,
        theta=0.1e-3,
    )
    return Preset(
        name="ion-trap",
        params=params,
        fock_dim=64,
        notes=(
            "collective-mode mass taken as 100 9Be+ ions; all dimensionless "
            "quantities are mass-independent",
            "chi = 10 implies branch excursions beyond desk-scale truncation; "
            "use analytic/feasibility commands for this preset",
        ),
    )


def natural_units_preset() -> Preset:
    return Preset(
        name="natural-units-reference",
        params=reference_params(chi=1.0, nbar=0.5, d01=0.5),
        fock_dim=96,
        notes=("natural units: hbar = k_b = m = omega = 1",),
    )


_PRESETS = {
    "flux-lc": flux_lc_preset,
    "ion-trap": ion_trap_preset,
    "natural-units-reference": natural_units_preset,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def load_preset(name: str, **kwargs) -> Preset:
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return builder(**kwargs)
