"""Matplotlib renderings of run outputs, written as PNG files.

The Agg backend is selected on import so figures can be produced headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "lines.linewidth": 1.2,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
    "svg.hashsalt": "sshdpt",
}


def _save(fig, path):
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def quench_figure(trace, critical_times, path):
    """Rate function and PGP of one quench, critical times marked."""
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(4.5, 4.0))
        ms = trace.times * 1e3
        rate = np.where(np.isfinite(trace.rate), trace.rate, np.nan)
        ax1.plot(ms, rate, color="k")
        ax2.plot(ms, trace.phi_p, color="C3", drawstyle="steps-post")
        for tc in critical_times:
            for ax in (ax1, ax2):
                ax.axvline(tc * 1e3, color="0.6", ls=":", lw=0.8)
        ax1.set_ylabel(r"$\lambda(t)$")
        ax2.set_ylabel(r"$\phi_P$ (rad)")
        ax2.set_yticks([0, np.pi], ["0", r"$\pi$"])
        ax2.set_xlabel("t (ms)")
        return _save(fig, path)


def pgp_ensemble_figure(times, traces: dict, path):
    """PGP traces of several disordered chains, offset vertically."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, max(2.5, 0.25 * len(traces))))
        for k, (name, phi) in enumerate(traces.items()):
            ax.plot(times * 1e3, phi + 4.0 * k, drawstyle="steps-post", lw=0.9)
            ax.text(times[-1] * 1e3, 4.0 * k, f" {name}", va="bottom", fontsize=6)
        ax.set_xlabel("t (ms)")
        ax.set_ylabel(r"$\phi_P$ + offset (rad)")
        ax.set_yticks([])
        return _save(fig, path)


def diagram_figure(diagram, path, r_c=None):
    """DPT / no-DPT map over (J_A, J_B)."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.0, 3.6))
        ja, jb = diagram.j_intra, diagram.j_inter
        ax.pcolormesh(jb, ja, diagram.dpt.astype(float), shading="nearest", cmap="Blues",
                      vmin=0, vmax=1.5)
        line = np.array([min(jb.min(), ja.min()), max(jb.max(), ja.max())])
        ax.plot(line, line, "k--", lw=0.8, label="$J_A = J_B$")
        if r_c is not None:
            ax.plot(line, r_c * line, "C3-", lw=0.8, label=f"$J_A = {r_c:.4f} J_B$")
        ax.set_xlim(jb.min(), jb.max())
        ax.set_ylim(ja.min(), ja.max())
        ax.set_xlabel("$J_B$ (Hz)")
        ax.set_ylabel("$J_A$ (Hz)")
        ax.legend(loc="lower right", frameon=False)
        return _save(fig, path)


def boundary_figure(rows, path, xlabel):
    """Bisected boundary ratio against a swept parameter, with half-widths."""
    rows = np.asarray(rows, dtype=float)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        ax.errorbar(rows[:, 0], rows[:, 1], yerr=rows[:, 2], marker="o", ms=3, color="k")
        ax.axhline(1.0, color="0.6", ls=":", lw=0.8)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("$r_c$")
        return _save(fig, path)


def envelope_figure(trace, tb_times, tb_psi, path):
    """Normalized lock-in envelopes against tight-binding amplitudes."""
    with plt.rc_context(RC):
        n = trace.psi.shape[1]
        fig, axes = plt.subplots(n, 1, sharex=True, figsize=(4.5, 0.7 * n + 0.8))
        for j, ax in enumerate(np.atleast_1d(axes)):
            ax.plot(tb_times * 1e3, np.abs(tb_psi[:, j]), color="0.5", lw=2.0)
            ax.plot(trace.times * 1e3, np.abs(trace.psi[:, j]), color="C0", lw=0.9)
            ax.set_ylim(0, 1.05)
            ax.set_ylabel(f"$|\\psi_{j + 1}|$", rotation=0, labelpad=14)
        np.atleast_1d(axes)[-1].set_xlabel("t (ms)")
        return _save(fig, path)


def ringdown_figure(times, amplitudes, fitted_q, path):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        for j in range(amplitudes.shape[1]):
            ax.semilogy(times * 1e3, amplitudes[:, j], label=f"{j + 1}: Q={fitted_q[j]:.0f}")
        ax.set_xlabel("t (ms)")
        ax.set_ylabel("envelope")
        ax.legend(ncol=2, frameon=False, fontsize=6)
        return _save(fig, path)


def spectrum_figure(freqs, response, mode_freqs, weights, path):
    """Response spectrum with stems at the mode frequencies."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        ax.plot(freqs, response, color="k")
        ax.vlines(mode_freqs, 0, weights, color="C3", lw=0.8)
        ax.set_xlabel("detuning (Hz)")
        ax.set_ylabel("response (arb.)")
        return _save(fig, path)
