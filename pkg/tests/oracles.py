"""Independent reference computations used by the tests.

Nothing here calls into the package's eigensolver or spectral machinery:
matrices are assembled element by element and diagonalized or exponentiated
with numpy/scipy, and ODEs are integrated with an adaptive high-order scheme.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import brentq

RATE = np.pi  # rad/s per Hz of coupling


def dense_hamiltonian(couplings):
    c = list(couplings)
    n = len(c) + 1
    h = np.zeros((n, n))
    for j, x in enumerate(c):
        h[j, j + 1] = x
        h[j + 1, j] = x
    return h


def toeplitz_eigenvalues(sites, coupling):
    m = np.arange(1, sites + 1)
    return np.sort(2.0 * coupling * np.cos(m * np.pi / (sites + 1)))


def expm_state(couplings, psi0, t):
    return expm(-1j * RATE * t * dense_hamiltonian(couplings)) @ np.asarray(psi0, dtype=complex)


def ode_state(couplings, psi0, t, rtol=1e-12, atol=1e-13):
    """Integrate i dpsi/dt = RATE * H psi with DOP853 on the real/imag split."""
    h = RATE * dense_hamiltonian(couplings)
    n = h.shape[0]

    def rhs(_, y):
        re, im = y[:n], y[n:]
        return np.concatenate([h @ im, -(h @ re)])

    psi0 = np.asarray(psi0, dtype=complex)
    sol = solve_ivp(rhs, (0.0, t), np.concatenate([psi0.real, psi0.imag]), method="DOP853",
                    rtol=rtol, atol=atol)
    y = sol.y[:, -1]
    return y[:n] + 1j * y[n:]


def loschmidt_dense(couplings, psi0, times):
    vals, vecs = np.linalg.eigh(dense_hamiltonian(couplings))
    c = vecs.T @ np.asarray(psi0, dtype=complex)
    w = np.abs(c) ** 2
    return np.exp(-1j * RATE * np.outer(times, vals)) @ w


def zeros_dense(couplings, psi0, window, n_grid=20000):
    """Sign changes of Re G on a fine grid, refined with brentq (G is real here)."""
    vals, vecs = np.linalg.eigh(dense_hamiltonian(couplings))
    w = np.abs(vecs.T @ np.asarray(psi0, dtype=complex)) ** 2

    def g(t):
        return float(np.sum(w * np.cos(RATE * vals * t)))

    t = np.linspace(0.0, window, n_grid + 1)
    vals_t = np.array([g(x) for x in t])
    roots = []
    for a, b, fa, fb in zip(t[:-1], t[1:], vals_t[:-1], vals_t[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(g, a, b, xtol=1e-12))
    return roots


def dimer_loschmidt(coupling, t):
    return np.cos(RATE * coupling * np.asarray(t))


def dimer_zeros(coupling, window):
    k = np.arange(0, int(window * coupling) + 2)
    z = (2 * k + 1) / (2.0 * coupling)
    return z[z <= window]
