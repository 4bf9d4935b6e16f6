"""Quench dynamics from a prepared state: Loschmidt amplitude and its phases.

All evolution is spectral, ``psi(t) = sum_n exp(-i*PHASE_RATE*E_n*t) c_n psi_n``
with ``E_n`` in Hz and ``t`` in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .lattice import PHASE_RATE, ChiralOperator, HoppingChain, build_ssh, edge_state
from .spectral import ChiralSymmetryError, EigenSystem, eigendecompose, occupations

REALITY_TOL = 1e-8
POLARIZATION_TOL = 1e-10
ZERO_TOL = 1e-12
ROOT_TOL = 1e-7


def _coefficients(eig: EigenSystem, psi0) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (eig.size,):
        raise ValueError(f"state has {psi0.size} amplitudes, chain has {eig.size} sites")
    return eig.vectors.T @ psi0


def evolve(eig: EigenSystem, psi0, t) -> np.ndarray:
    """State at time ``t`` (scalar) or at each time of an array (rows)."""
    c = _coefficients(eig, psi0)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("evolution time must be non-negative")
    phases = np.exp(-1j * PHASE_RATE * np.multiply.outer(t, eig.eigenvalues))
    return (phases * c) @ eig.vectors.T


def loschmidt(eig: EigenSystem, psi0, times) -> np.ndarray:
    """G(t) = <psi0|psi(t)> as the occupation-weighted sum of phase factors."""
    w = occupations(eig, np.asarray(psi0, dtype=complex))
    t = np.asarray(times, dtype=float)
    return np.exp(-1j * PHASE_RATE * np.multiply.outer(t, eig.eigenvalues)) @ w


def is_polarized(psi0, tol: float = POLARIZATION_TOL) -> bool:
    psi0 = np.asarray(psi0)
    chir = ChiralOperator.for_sites(psi0.size).expectation(psi0) / np.vdot(psi0, psi0).real
    return abs(abs(chir) - 1.0) <= tol


def merged_weights(eig: EigenSystem, psi0) -> tuple[np.ndarray, np.ndarray]:
    """Per mirror pair: (|E_m|, combined weight of +E_m and -E_m)."""
    w = occupations(eig, np.asarray(psi0, dtype=complex))
    plus = np.array([p for p, _ in eig.pairing], dtype=int)
    minus = np.array([m for _, m in eig.pairing], dtype=int)
    return eig.eigenvalues[plus], w[plus] + w[minus]


def zero_mode_weight(eig: EigenSystem, psi0) -> float:
    w = occupations(eig, np.asarray(psi0, dtype=complex))
    return float(w[list(eig.zero_modes)].sum()) if eig.zero_modes else 0.0


def merged_loschmidt(eig: EigenSystem, psi0, times) -> np.ndarray:
    """Real G(t) with each mirror pair merged into one cosine.

    A zero-mode pair contributes its total weight as a constant (or a very
    slow cosine, if finite size splits it).
    """
    if not is_polarized(psi0):
        raise ChiralSymmetryError("initial state must live on one sublattice")
    energies, weights = merged_weights(eig, psi0)
    t = np.asarray(times, dtype=float)
    return np.cos(PHASE_RATE * np.multiply.outer(t, energies)) @ weights


def rate_function(G, unit_cells: int) -> np.ndarray:
    """lambda(t) = -(1/N) ln|G|^2, +inf where G vanishes exactly."""
    if unit_cells < 1:
        raise ValueError("unit_cells must be >= 1")
    r2 = np.abs(np.asarray(G)) ** 2
    with np.errstate(divide="ignore"):
        return -np.log(r2) / unit_cells


def dynamical_phase(eig: EigenSystem, psi0, t) -> np.ndarray:
    """-(sum_n w_n E_n) * PHASE_RATE * t, i.e. minus the integrated energy."""
    w = occupations(eig, np.asarray(psi0, dtype=complex))
    mean_energy = float(w @ eig.eigenvalues)
    return -PHASE_RATE * mean_energy * np.asarray(t, dtype=float)


def pgp(G, offset: float = 0.0, chiral: bool = True, zero_tol: float = ZERO_TOL):
    """Geometric phase (0 or pi) of a real-valued Loschmidt amplitude.

    Parameters
    ----------
    G : array_like
        Loschmidt amplitude (or a demodulated edge envelope).
    offset : float
        Constant phase rotated out before classification, e.g. a readout
        circuit's phase offset.
    chiral : bool
        Require ``|Im G| < REALITY_TOL`` (after the offset rotation).

    Returns
    -------
    phase : ndarray
        0 where ``Re G > 0``, pi where ``Re G < 0``.
    flagged : ndarray of bool
        Samples with ``|G| < zero_tol``; their phase is carried forward.
    """
    g = np.asarray(G, dtype=complex) * np.exp(-1j * offset)
    if chiral and g.size and np.max(np.abs(g.imag)) >= REALITY_TOL:
        raise ChiralSymmetryError(f"|Im G| reaches {np.max(np.abs(g.imag)):.3g}")
    phase = np.where(g.real < 0, np.pi, 0.0)
    flagged = np.abs(g) < zero_tol
    for k in np.flatnonzero(flagged):
        phase[k] = phase[k - 1] if k > 0 else 0.0
    return phase, flagged


def _refine(f, a, b, root_tol):
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    return bisect(f, a, b, xtol=root_tol, maxiter=200)


def _bracket_roots(f, t, values, root_tol):
    sign = np.sign(values)
    roots = []
    for k in range(len(t) - 1):
        if sign[k] == 0:
            if k == 0:
                continue  # t = 0 cannot be a zero of a normalized G
            roots.append(float(t[k]))
        elif sign[k] * sign[k + 1] < 0:
            roots.append(_refine(f, float(t[k]), float(t[k + 1]), root_tol))
    if sign[-1] == 0 and len(t) > 1:
        roots.append(float(t[-1]))
    return roots


def critical_times(eig: EigenSystem, psi0, window: float, grid_step: float | None = None,
                   root_tol: float = ROOT_TOL) -> list[float]:
    """Zeros of the merged real G(t) in [0, window], ascending."""
    if grid_step is None:
        grid_step = window / 4000
    n = max(int(np.ceil(window / grid_step)), 1)
    t = np.linspace(0.0, window, n + 1)
    energies, weights = merged_weights(eig, psi0)
    if not is_polarized(psi0):
        raise ChiralSymmetryError("initial state must live on one sublattice")

    def f(s):
        return float(np.cos(PHASE_RATE * s * energies) @ weights)

    values = np.cos(PHASE_RATE * np.multiply.outer(t, energies)) @ weights
    return _bracket_roots(f, t, values, root_tol)


def pgp_jump_times(eig: EigenSystem, psi0, times, root_tol: float = ROOT_TOL) -> list[float]:
    """Times where the sampled PGP flips, refined on G between the two samples."""
    t = np.asarray(times, dtype=float)
    G = loschmidt(eig, psi0, t)
    phase, _ = pgp(G)
    energies, weights = merged_weights(eig, psi0)

    def f(s):
        return float(np.cos(PHASE_RATE * s * energies) @ weights)

    jumps = []
    for k in np.flatnonzero(np.diff(phase) != 0):
        jumps.append(_refine(f, float(t[k]), float(t[k + 1]), root_tol))
    return jumps


@dataclass(frozen=True)
class LoschmidtTrace:
    times: np.ndarray
    G: np.ndarray
    rate: np.ndarray
    phi_dyn: np.ndarray
    phi_p: np.ndarray
    flagged: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return np.abs(self.G)

    @property
    def phi(self) -> np.ndarray:
        return np.angle(self.G) % (2 * np.pi)

    COLUMNS = ("t_s", "re_G", "im_G", "abs_G", "lambda", "phi_dyn_rad", "phi_P_rad")

    def columns(self) -> np.ndarray:
        return np.column_stack(
            [self.times, self.G.real, self.G.imag, self.r, self.rate, self.phi_dyn, self.phi_p]
        )


def loschmidt_trace(eig: EigenSystem, psi0, times, unit_cells: int, chiral: bool = True,
                    offset: float = 0.0) -> LoschmidtTrace:
    t = np.asarray(times, dtype=float)
    G = loschmidt(eig, psi0, t)
    phi_p, flagged = pgp(G, offset=offset, chiral=chiral)
    return LoschmidtTrace(t, G, rate_function(G, unit_cells), dynamical_phase(eig, psi0, t),
                          phi_p, flagged)


def edge_initial_state(unit_cells: int, initial_ratio: float, j_inter: float = 1.0) -> np.ndarray:
    """Sublattice-polarized zero mode of the topological chain ``initial_ratio * J, J``.

    For ``initial_ratio == 0`` this is exactly the site-1 excitation. Otherwise
    the near-zero eigenvector is projected onto the odd sublattice; since its
    mirror partner is its chiral image, the projection is the exact
    chirality-rotated combination of the pair.
    """
    if not 0 <= initial_ratio < 1:
        raise ValueError("initial Hamiltonian must be topological (0 <= ratio < 1)")
    sites = 2 * unit_cells
    if initial_ratio == 0:
        return edge_state(sites)
    eig = eigendecompose(build_ssh(unit_cells, initial_ratio * j_inter, j_inter))
    k = int(np.argmin(np.abs(eig.eigenvalues)))
    u = np.array(eig.vectors[:, k], dtype=complex)
    u[1::2] = 0.0
    u /= np.linalg.norm(u)
    if u[0].real < 0:
        u = -u
    return u


@dataclass(frozen=True)
class QuenchSpec:
    """A prepared state, the chain it evolves under, and the observation window.

    ``initial_ratio`` records which topological chain the edge state came
    from; with it (and a clean final chain) the quench can be rebuilt at other
    sizes for finite-size checks.
    """

    final_chain: HoppingChain
    initial_state: np.ndarray
    window: float
    grid_step: float | None = None
    initial_ratio: float | None = None
    root_tol: float = ROOT_TOL

    def __post_init__(self):
        psi = np.asarray(self.initial_state, dtype=complex)
        if psi.shape != (self.final_chain.sites,):
            raise ValueError("initial state dimension does not match the chain")
        if not abs(np.linalg.norm(psi) - 1.0) < 1e-12:
            raise ValueError("initial state must be normalized")
        if self.window <= 0:
            raise ValueError("window must be positive")
        object.__setattr__(self, "initial_state", psi)

    @classmethod
    def edge_quench(cls, unit_cells: int, j_intra: float, j_inter: float, window: float,
                    initial_ratio: float = 0.0, grid_step: float | None = None,
                    root_tol: float = ROOT_TOL) -> "QuenchSpec":
        return cls(build_ssh(unit_cells, j_intra, j_inter),
                   edge_initial_state(unit_cells, initial_ratio), window, grid_step,
                   initial_ratio, root_tol)

    def times(self) -> np.ndarray:
        step = self.grid_step or self.window / 4000
        n = max(int(np.ceil(self.window / step)), 1)
        return np.linspace(0.0, self.window, n + 1)

    def uniform_couplings(self) -> tuple[float, float] | None:
        c = self.final_chain.couplings
        if self.final_chain.deltas is not None and np.any(self.final_chain.deltas):
            return None
        if np.all(c[0::2] == c[0]) and (c.size == 1 or np.all(c[1::2] == c[1])):
            return float(c[0]), float(c[1]) if c.size > 1 else 0.0
        return None

    def resized(self, unit_cells: int) -> "QuenchSpec":
        pair = self.uniform_couplings()
        if pair is None or self.initial_ratio is None:
            raise ValueError("only clean edge quenches can be resized")
        return QuenchSpec.edge_quench(unit_cells, pair[0], pair[1], self.window,
                                      self.initial_ratio, self.grid_step, self.root_tol)


@dataclass(frozen=True)
class DptReport:
    dpt_present: bool
    critical_times: list
    pgp_jump_times: list
    min_abs_G: float
    finite_size_verdict: str
    escalation: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "dpt_present": self.dpt_present,
            "critical_times_s": [float(x) for x in self.critical_times],
            "pgp_jump_times_s": [float(x) for x in self.pgp_jump_times],
            "min_abs_G": float(self.min_abs_G),
            "finite_size_verdict": self.finite_size_verdict,
            "escalation": {str(k): [float(x) for x in v] for k, v in self.escalation.items()},
        }


def classify_dpt(spec: QuenchSpec, escalation_sizes=None) -> DptReport:
    """Locate DPTs in the window and test whether they survive larger chains.

    ``escalation_sizes`` lists unit-cell counts, ascending, starting at the
    spec's own size. The verdict is ``robust`` when every size still has a
    zero in the window (drifting times allowed), ``size-artifact`` when they
    vanish at some larger size, and ``not-applicable`` when there is nothing
    to escalate.
    """
    eig = eigendecompose(spec.final_chain)
    psi0 = spec.initial_state
    t = spec.times()
    tcs = critical_times(eig, psi0, spec.window, t[1] - t[0], spec.root_tol)
    jumps = pgp_jump_times(eig, psi0, t, spec.root_tol)
    min_abs = float(np.min(np.abs(loschmidt(eig, psi0, t))))
    for a, b in zip(tcs, jumps):
        if abs(a - b) > 2 * spec.root_tol:
            raise RuntimeError(f"PGP jump at {b} s does not match critical time {a} s")
    n0 = spec.final_chain.unit_cells
    sizes = list(escalation_sizes) if escalation_sizes is not None else [n0]
    if sizes[0] != n0 or sorted(sizes) != sizes:
        raise ValueError("escalation sizes must be ascending and start at the spec's size")
    escalation = {n0: tcs}
    verdict = "not-applicable"
    if tcs and len(sizes) > 1 and spec.initial_ratio is not None and spec.uniform_couplings():
        for n in sizes[1:]:
            big = spec.resized(n)
            escalation[n] = critical_times(eigendecompose(big.final_chain), big.initial_state,
                                           big.window, t[1] - t[0], big.root_tol)
        verdict = "robust" if all(escalation[n] for n in sizes) else "size-artifact"
    return DptReport(bool(tcs), tcs, jumps, min_abs, verdict, escalation)
