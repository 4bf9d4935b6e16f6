"""Dynamical phase diagram of edge-state quenches.

A cell (J_A, J_B) is flagged when the Loschmidt amplitude crosses zero
inside the observation window. The window is configured as the
dimensionless product ``J_B * T`` with ``J_B`` the reference intercell
coupling, so the diagram is invariant under a common rescaling of couplings
and inverse time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .quench import QuenchSpec, classify_dpt, edge_initial_state
from .lattice import build_ssh

TARGET_RC = 0.8911
WORKERS_ENV = "SSHDPT_WORKERS"


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    unit_cells: int = 40
    initial_ratio: float = 0.0
    j_inter: float = 60.0
    window: float = 10.0  # J_B * T, dimensionless
    bracket: tuple = (0.5, 1.5)
    half_width: float = 1e-4
    steps_per_window: int = 4000
    root_tol: float = 1e-7
    workers: int = 1

    def __post_init__(self):
        if not 0 <= self.initial_ratio < 1:
            raise ValueError("initial_ratio must lie in [0, 1)")
        if self.unit_cells < 1 or self.window <= 0 or self.j_inter <= 0:
            raise ValueError("unit_cells, window and j_inter must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def duration(self) -> float:
        """Physical window T in seconds."""
        return self.window / self.j_inter


def resolve_workers(requested: int | None = None) -> int:
    """Explicit request, else ``$SSHDPT_WORKERS``, else 1."""
    if requested is not None:
        return max(int(requested), 1)
    env = os.environ.get(WORKERS_ENV)
    return max(int(env), 1) if env else 1


@lru_cache(maxsize=64)
def _initial_state(unit_cells: int, ratio: float) -> np.ndarray:
    psi = edge_initial_state(unit_cells, ratio)
    psi.setflags(write=False)
    return psi


def quench_for(j_intra: float, j_inter: float, duration: float, config: SweepConfig) -> QuenchSpec:
    psi0 = _initial_state(config.unit_cells, config.initial_ratio)
    return QuenchSpec(build_ssh(config.unit_cells, j_intra, j_inter), psi0, duration,
                      duration / config.steps_per_window, config.initial_ratio, config.root_tol)


def first_critical_time(j_intra: float, j_inter: float, duration: float, config: SweepConfig):
    report = classify_dpt(quench_for(j_intra, j_inter, duration, config))
    return report.critical_times[0] if report.critical_times else None


def dpt_at(ratio: float, config: SweepConfig) -> bool:
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    jb = config.j_inter
    return first_critical_time(ratio * jb, jb, config.duration, config) is not None


def boundary(config: SweepConfig) -> tuple[float, float]:
    """Bisected J_A/J_B at which DPTs set in; returns (r_c, half_width)."""
    lo, hi = config.bracket
    if dpt_at(lo, config) or not dpt_at(hi, config):
        raise BracketError(f"bracket {lo}..{hi} does not straddle the dynamical boundary")
    while (hi - lo) / 2 > config.half_width:
        mid = 0.5 * (lo + hi)
        if dpt_at(mid, config):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def boundary_vs_initial(initial_ratios, config: SweepConfig) -> list[tuple[float, float, float]]:
    """(initial_ratio, r_c, half_width) for each initial topological chain."""
    return [(float(ri), *boundary(replace(config, initial_ratio=float(ri)))) for ri in initial_ratios]


def window_ladder(config: SweepConfig, windows) -> list[tuple[float, float, float]]:
    return [(float(w), *boundary(replace(config, window=float(w)))) for w in windows]


def calibrate_window(config: SweepConfig, windows=None, target: float = TARGET_RC):
    """Pick the window whose bisected boundary lies closest to ``target``.

    Returns ``(best_window, r_c, ladder)`` with the full ladder of
    ``(window, r_c, half_width)``.
    """
    if windows is None:
        windows = np.arange(2.0, 20.0 + 1e-9, 2.0)
    ladder = window_ladder(config, windows)
    best = min(ladder, key=lambda row: (abs(row[1] - target), row[0]))
    return best[0], best[1], ladder


@dataclass(frozen=True)
class PhaseDiagram:
    j_intra: np.ndarray
    j_inter: np.ndarray
    dpt: np.ndarray  # bool, shape (len(j_intra), len(j_inter))
    first_tc: np.ndarray  # seconds, nan where no DPT
    duration: float
    monotone_violations: list = field(default_factory=list)

    def rows(self):
        for a, ja in enumerate(self.j_intra):
            for b, jb in enumerate(self.j_inter):
                yield float(ja), float(jb), bool(self.dpt[a, b]), float(self.first_tc[a, b])


def scan_diagram(j_intra_grid, j_inter_grid, config: SweepConfig) -> PhaseDiagram:
    """Evaluate every (J_A, J_B) cell over the physical window ``config.duration``.

    Cells run on a thread pool of ``config.workers``; results are written by
    cell index, so the diagram does not depend on the worker count.
    """
    ja = np.asarray(j_intra_grid, dtype=float)
    jb = np.asarray(j_inter_grid, dtype=float)
    if ja.size == 0 or jb.size == 0:
        raise ValueError("grid must be non-empty")
    cells = [(a, b) for a in range(ja.size) for b in range(jb.size)]
    duration = config.duration

    def work(cell):
        a, b = cell
        return first_critical_time(ja[a], jb[b], duration, config)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(c) for c in cells]
    first = np.full((ja.size, jb.size), np.nan)
    for (a, b), tc in zip(cells, results):
        if tc is not None:
            first[a, b] = tc
    dpt = ~np.isnan(first)
    violations = []
    order = np.argsort(ja, kind="stable")
    for b in range(jb.size):
        flags = dpt[order, b]
        if np.any(flags[:-1] & ~flags[1:]):
            violations.append(float(jb[b]))
    return PhaseDiagram(ja, jb, dpt, first, duration, violations)
