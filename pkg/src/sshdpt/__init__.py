"""Quench dynamics of Su-Schrieffer-Heeger chains and their nanomechanical replica.

Modules
-------
lattice
    Chains, disorder and the chiral operator.
spectral
    Tridiagonal eigensolver and chiral-pair bookkeeping.
quench
    Loschmidt amplitude, rate function, geometric phase and critical times.
phasemap
    Dynamical phase diagram and boundary bisection.
mech
    Carrier-level oscillator integration and lock-in demodulation.
"""

__version__ = "0.1.0"
