"""Eigen-analysis of hopping chains.

The eigensolver is an implicit-shift QL iteration on the symmetric
tridiagonal matrix, accumulating the Givens rotations into the eigenvector
matrix. Degenerate clusters are rotated onto eigenstates of the chiral
operator so the output does not depend on rotation round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .lattice import PHASE_RATE, ChiralOperator, HoppingChain

ZERO_TOL_REL = 1e-2
CLUSTER_TOL_REL = 1e-9
MIRROR_TOL_REL = 1e-8


class ChiralSymmetryError(ValueError):
    """A spectrum or amplitude violates the chiral (sublattice) symmetry."""


class EigensolverError(RuntimeError):
    pass


@numba.njit(cache=True, nogil=True)
def _tql(d, e, z, max_iter):
    """In-place implicit QL. ``e[i]`` couples ``d[i]`` and ``d[i+1]``; ``e[-1]`` is scratch.

    Returns -1 on success, otherwise the index that failed to converge.
    """
    n = d.size
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                return l
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * f
                    z[k, i] = c * z[k, i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiagonal_eigh(diagonal, offdiagonal, max_iter: int = 60):
    """Eigenpairs of a real symmetric tridiagonal matrix, eigenvalues ascending."""
    d = np.array(diagonal, dtype=float)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = offdiagonal
    z = np.eye(n)
    if n > 1:
        bad = _tql(d, e, z, max_iter)
        if bad >= 0:
            raise EigensolverError(f"QL iteration did not converge for eigenvalue {bad}")
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


@dataclass(frozen=True)
class EigenSystem:
    """Spectrum of a chiral chain.

    ``pairing[m]`` holds the (ascending-order) indices of ``+|E_m|`` and
    ``-|E_m|``, with m running from the smallest magnitude up.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    pairing: tuple
    zero_modes: tuple

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.size else 0.0

    def to_record(self, include_vectors: bool = False) -> dict:
        rec = {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "zero_mode_indices": [int(i) + 1 for i in self.zero_modes],
        }
        if include_vectors:
            rec["eigenvectors"] = [[float(x) for x in col] for col in self.vectors.T]
        return rec


def _fix_clusters(vals, vecs, gamma):
    """Rotate each degenerate cluster onto chirality eigenstates, descending."""
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    tol = CLUSTER_TOL_REL * scale
    n = vals.size
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and vals[stop] - vals[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            block, _ = np.linalg.qr(vecs[:, start:stop])
            chir = block.T @ (gamma[:, None] * block)
            w, u = np.linalg.eigh(chir)
            vecs[:, start:stop] = block @ u[:, ::-1]
            vals[start:stop] = np.mean(vals[start:stop])
        start = stop


def _adapt_pairs(vals, vecs, gamma, couplings):
    """Make every -E eigenvector the exact chiral image of its +E partner.

    The pair straddling zero is rebuilt from the odd and even halves of its
    two-dimensional span as ``(u_odd +- u_even)/sqrt(2)``; this undoes the
    mixing QL leaves between nearly degenerate edge modes and keeps the pair
    in partner form even when it is degenerate to working precision. All
    other pairs get ``v(-E) = Gamma v(+E)``.
    """
    n = vals.size
    if n < 2:
        return
    tol = CLUSTER_TOL_REL * np.max(np.abs(vals))
    lo, hi = n // 2 - 1, n // 2
    isolated = (lo == 0 or vals[lo] - vals[lo - 1] > tol) and (hi == n - 1 or vals[hi + 1] - vals[hi] > tol)
    for k in range(n // 2 - (1 if isolated else 0)):
        if vals[n - 1 - k] - vals[k] > tol:
            vecs[:, k] = gamma * vecs[:, n - 1 - k]
    if not isolated:
        return  # a larger cluster at the centre keeps its chirality-ordered basis
    pair = vecs[:, [hi, lo]]
    odd = (gamma > 0)[:, None]
    u_odd = np.where(odd, pair, 0.0)
    u_even = np.where(odd, 0.0, pair)
    a = u_odd[:, np.argmax(np.linalg.norm(u_odd, axis=0))]
    b = u_even[:, np.argmax(np.linalg.norm(u_even, axis=0))]
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    ha = np.zeros(n)  # H a from the bond list
    ha[:-1] += couplings * a[1:]
    ha[1:] += couplings * a[:-1]
    sign = 1.0 if ha @ b >= 0 else -1.0
    vecs[:, hi] = (a + sign * b) / np.sqrt(2.0)
    vecs[:, lo] = (a - sign * b) / np.sqrt(2.0)


def _fix_signs(vecs):
    """Largest-magnitude component of every eigenvector positive."""
    n = vecs.shape[1]
    idx = np.argmax(np.abs(vecs) > (1 - 1e-9) * np.max(np.abs(vecs), axis=0), axis=0)
    signs = np.sign(vecs[idx, np.arange(n)])
    signs[signs == 0] = 1.0
    vecs *= signs


def classify_chiral(eigenvalues, zero_tol_rel: float = ZERO_TOL_REL):
    """Mirror pairs and zero modes of an ascending spectrum.

    Returns ``(pairing, zero_modes)``; raises :class:`ChiralSymmetryError`
    when a level has no mirror partner.
    """
    if not 0 < zero_tol_rel < 1:
        raise ValueError("zero_tol_rel must lie in (0, 1)")
    vals = np.asarray(eigenvalues, dtype=float)
    n = vals.size
    scale = float(np.max(np.abs(vals))) if n else 0.0
    mismatch = np.abs(vals + vals[::-1])
    if np.any(mismatch > MIRROR_TOL_REL * scale):
        k = int(np.argmax(mismatch))
        raise ChiralSymmetryError(
            f"level {vals[k]:.6g} Hz has no mirror partner (off by {mismatch[k]:.3g} Hz)"
        )
    pairs = [(n - 1 - k, k) for k in range(n // 2)]
    pairs.reverse()  # smallest |E| first
    zero = tuple(int(i) for i in np.flatnonzero(np.abs(vals) < zero_tol_rel * scale)) if scale else tuple(range(n))
    return tuple(pairs), zero


def eigendecompose(chain: HoppingChain, zero_tol_rel: float = ZERO_TOL_REL) -> EigenSystem:
    vals, vecs = tridiagonal_eigh(np.zeros(chain.sites), chain.couplings)
    gamma = ChiralOperator.for_sites(chain.sites).diagonal
    _fix_clusters(vals, vecs, gamma)
    _adapt_pairs(vals, vecs, gamma, chain.couplings)
    _fix_signs(vecs)
    pairing, zero = classify_chiral(vals, zero_tol_rel)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return EigenSystem(vals, vecs, pairing, zero)


def sublattice_support(eig: EigenSystem, gamma: ChiralOperator, index: int) -> float:
    """<psi|Gamma|psi> for eigenvector ``index``: +1 odd-only, -1 even-only, 0 balanced."""
    return gamma.expectation(eig.vectors[:, index])


def occupations(eig: EigenSystem, psi0) -> np.ndarray:
    psi0 = np.asarray(psi0)
    if psi0.shape != (eig.size,):
        raise ValueError(f"state has {psi0.size} amplitudes, chain has {eig.size} sites")
    return np.abs(eig.vectors.T @ psi0) ** 2


def mode_frequencies(eig: EigenSystem) -> np.ndarray:
    """Mode offsets from the carrier in Hz (half the eigenvalue under the split convention)."""
    return eig.eigenvalues * PHASE_RATE / (2 * np.pi)


def lorentzian(x, fwhm):
    return 1.0 / (1.0 + (2.0 * np.asarray(x) / fwhm) ** 2)


def response_spectrum(eig: EigenSystem, psi0, linewidth: float, grid) -> np.ndarray:
    """Occupation-weighted unit-peak Lorentzians at the mode frequencies.

    ``linewidth`` is the full width at half maximum in Hz, ``grid`` the
    frequency offsets (Hz) at which to evaluate.
    """
    if linewidth <= 0:
        raise ValueError("linewidth must be positive")
    w = occupations(eig, psi0)
    f = np.asarray(grid, dtype=float)
    return lorentzian(f[:, None] - mode_frequencies(eig)[None, :], linewidth) @ w
