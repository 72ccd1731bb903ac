"""Controlled-phase gates from colliding atoms in two moving harmonic wells.

Modules: ``basis`` (oscillator states and parameters), ``coupling`` (interaction
and kinetic matrices, the phase rate Omega(l)), ``path`` (separation paths),
``propagator`` (time evolution), ``objectives`` (phase and fidelity measures),
``optimizer`` (gradient search over paths), ``entangle`` (entangling power and
gate classification), ``transport`` (single-trap transport), ``lattice``
(optical-lattice double wells) and ``cli``.
"""

__version__ = "0.1.0"
