"""Open-boundary SSH hopping chains, bond disorder and chiral structure.

Couplings are stored in Hz as quoted for the device: a bond of ``J`` Hz
splits the normal modes of an isolated oscillator pair by ``J`` Hz. The
hopping term therefore advances phases at ``PHASE_RATE * J`` rad/s, which is
the only place the unit conversion enters (see :mod:`sshdpt.quench`).

Sites are 1-indexed in every external record; arrays are 0-indexed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import TABLE_V

PHASE_RATE = np.pi  # rad/s per Hz of quoted coupling

# random offsets are rounded to this grid so that adding and removing them is exact
DISORDER_QUANTUM = 2.0**-32

BOUNDARY = "boundary"


class ChainError(ValueError):
    """Invalid chain construction (negative bonds, wrong lengths)."""


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HoppingChain:
    """Nearest-neighbour chain with zero on-site energies.

    Parameters
    ----------
    couplings : array_like
        The ``sites - 1`` bond amplitudes in Hz, bond ``j`` joining sites
        ``j`` and ``j + 1``.
    """

    couplings: np.ndarray
    seed: int | None = None
    deltas: np.ndarray | None = None

    def __post_init__(self):
        c = _frozen(self.couplings)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ChainError(f"need an odd number of bonds (even site count), got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ChainError("couplings must be finite")
        if np.any(c < 0):
            j = int(np.argmax(c < 0)) + 1
            raise ChainError(f"bond {j} is negative ({c[j - 1]:g} Hz)")
        object.__setattr__(self, "couplings", c)
        if self.deltas is not None:
            object.__setattr__(self, "deltas", _frozen(self.deltas))

    @property
    def sites(self) -> int:
        return self.couplings.size + 1

    @property
    def unit_cells(self) -> int:
        return self.sites // 2

    def matrix(self) -> np.ndarray:
        """Dense real-symmetric Hamiltonian in Hz."""
        c = np.asarray(self.couplings)
        return np.diag(c, 1) + np.diag(c, -1)

    def to_record(self) -> dict:
        rec = {"sites": self.sites, "couplings": [float(x) for x in self.couplings]}
        if self.seed is not None:
            rec["seed"] = int(self.seed)
        if self.deltas is not None:
            rec["deltas"] = [float(x) for x in self.deltas]
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "HoppingChain":
        unknown = set(rec) - {"sites", "couplings", "seed", "deltas"}
        if unknown:
            raise ChainError(f"unknown chain record keys: {sorted(unknown)}")
        chain = cls(rec["couplings"], seed=rec.get("seed"), deltas=rec.get("deltas"))
        if "sites" in rec and rec["sites"] != chain.sites:
            raise ChainError(f"sites={rec['sites']} does not match {len(rec['couplings'])} couplings")
        return chain


@dataclass(frozen=True)
class DisorderSpec:
    strength: float
    deltas: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        d = _frozen(self.deltas)
        if np.any(np.abs(d) > self.strength):
            raise ChainError(f"offset exceeds disorder strength {self.strength:g} Hz")
        object.__setattr__(self, "deltas", d)

    def negated(self) -> "DisorderSpec":
        return DisorderSpec(self.strength, -self.deltas, self.seed)


@dataclass(frozen=True)
class ChiralOperator:
    """Diagonal sublattice operator: +1 on odd sites, -1 on even (1-indexed)."""

    diagonal: np.ndarray = field(repr=False)

    @classmethod
    def for_sites(cls, sites: int) -> "ChiralOperator":
        d = np.ones(sites)
        d[1::2] = -1.0
        return cls(_frozen(d))

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)

    def odd_projector(self) -> np.ndarray:
        return np.diag((1.0 + self.diagonal) / 2)

    def even_projector(self) -> np.ndarray:
        return np.diag((1.0 - self.diagonal) / 2)

    def expectation(self, psi) -> float:
        psi = np.asarray(psi)
        return float(np.real(np.vdot(psi, self.diagonal * psi)))


def build_ssh(unit_cells: int, j_intra: float, j_inter: float) -> HoppingChain:
    """Alternating chain ``[j_intra, j_inter, ..., j_intra]`` with ``2*unit_cells`` sites."""
    if unit_cells < 1:
        raise ChainError("unit_cells must be >= 1")
    if j_intra < 0 or j_inter < 0:
        raise ChainError("hopping amplitudes must be non-negative")
    c = np.empty(2 * unit_cells - 1)
    c[0::2] = j_intra
    c[1::2] = j_inter
    return HoppingChain(c)


def sample_disorder(strength: float, bond_count: int, seed: int) -> DisorderSpec:
    """Uniform bond offsets in ``[-strength, strength]``, reproducible from ``seed``.

    Offsets are rounded to multiples of ``DISORDER_QUANTUM`` (toward zero, so
    the bound still holds).
    """
    if strength < 0:
        raise ChainError("disorder strength must be >= 0")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(-strength, strength, bond_count)
    return DisorderSpec(strength, np.trunc(raw / DISORDER_QUANTUM) * DISORDER_QUANTUM, seed)


def table_v_disorder(name: str) -> DisorderSpec:
    strength, deltas = TABLE_V[name]
    return DisorderSpec(strength, deltas)


def apply_disorder(chain: HoppingChain, spec: DisorderSpec) -> HoppingChain:
    if spec.deltas.size != chain.couplings.size:
        raise ChainError(f"{spec.deltas.size} offsets for {chain.couplings.size} bonds")
    return HoppingChain(chain.couplings + spec.deltas, seed=spec.seed, deltas=spec.deltas)


def edge_state(sites: int) -> np.ndarray:
    """Excitation of site 1 only."""
    if sites < 1:
        raise ChainError("sites must be >= 1")
    psi = np.zeros(sites, dtype=complex)
    psi[0] = 1.0
    return psi


def bloch_vector(j_intra: float, j_inter: float, k) -> tuple[np.ndarray, np.ndarray]:
    k = np.asarray(k, dtype=float)
    return j_intra + j_inter * np.cos(k), j_inter * np.sin(k)


def winding_number(j_intra: float, j_inter: float, k_samples: int = 1024):
    """Number of turns of d(k) around the origin, or ``BOUNDARY`` at the gap closing.

    The angle swept between consecutive samples of k in [0, 2*pi) is
    accumulated (closing the loop back to k = 0) and divided by 2*pi.
    """
    if k_samples < 8:
        raise ValueError("k_samples must be >= 8")
    if j_intra < 0 or j_inter < 0:
        raise ChainError("hopping amplitudes must be non-negative")
    scale = max(j_intra, j_inter)
    if scale == 0:
        raise ChainError("d(k) vanishes identically when both couplings are zero")
    if abs(j_intra - j_inter) < 1e-9 * scale:
        return BOUNDARY
    k = 2 * np.pi * np.arange(k_samples) / k_samples
    dx, dy = bloch_vector(j_intra, j_inter, k)
    theta = np.arctan2(dy, dx)
    steps = np.diff(np.append(theta, theta[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return int(round(steps.sum() / (2 * np.pi)))
