"""Unit-system constants.

The core works in whatever units the caller supplies: ``hbar`` and ``k_b``
are explicit fields of :class:`~qprobe.analytic.PhysicalParams` (both 1.0
in the default natural-unit system).  SI values live here for the
realization presets, which are specified in laboratory units.

All frequencies in this package are angular (rad/s).  Quoted "MHz"-style
figures from hardware datasheets are interpreted as rad/s when building
presets; see README.
"""

# CODATA 2018 exact/defined values
HBAR_SI = 1.054571817e-34  # J s
K_B_SI = 1.380649e-23  # J / K
E_CHARGE_SI = 1.602176634e-19  # C
H_PLANCK_SI = 6.62607015e-34  # J s

# Superconducting flux quantum, two circulating conventions.  The default
# h/(2e) value is the one under which the flux-LC preset lands at
# chi ~ sqrt(10); the hbar/(2e) variant is kept selectable.
FLUX_QUANTUM_H_2E = H_PLANCK_SI / (2.0 * E_CHARGE_SI)  # 2.0678e-15 Wb
FLUX_QUANTUM_HBAR_2E = HBAR_SI / (2.0 * E_CHARGE_SI)  # 3.2911e-16 Wb

# Mass of a single 9Be+ ion, the default constituent for the ion-chain
# collective mode (the dimensionless design is independent of this choice).
ATOMIC_MASS_SI = 1.66053906660e-27  # kg
BERYLLIUM_9_MASS_SI = 9.012183 * ATOMIC_MASS_SI
