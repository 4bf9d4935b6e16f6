"""Experiment drivers behind the command-line subcommands.

Each ``run_*`` takes a resolved config (see :mod:`sshdpt.config`) and an
output directory, writes its tables, records and optional figures there, and
returns the list of paths written. Tables depend only on the config, never
on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .lattice import (HoppingChain, apply_disorder, build_ssh, edge_state, sample_disorder,
                      table_v_disorder)
from .datasets import TABLE_V
from .mech import (DriveSchedule, OscillatorBank, mech_vs_tb, normalize_instant,
                   simulate_envelopes)
from .phasemap import SweepConfig, boundary, boundary_vs_initial, calibrate_window, scan_diagram
from .quench import QuenchSpec, classify_dpt, edge_initial_state, evolve, loschmidt_trace
from .spectral import eigendecompose, mode_frequencies, occupations, response_spectrum
from .svg import render_svg


def build_chain(section: dict):
    chain = build_ssh(section["unit_cells"], section["j_intra"], section["j_inter"])
    dis = section["disorder"]
    if dis is None:
        return chain
    if dis["table"] is not None:
        spec = table_v_disorder(dis["table"])
    else:
        spec = sample_disorder(dis["strength"], chain.couplings.size, dis["seed"])
    return apply_disorder(chain, spec)


def _pool_map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _write_svg(out: Path, name: str, *args, **kwargs) -> Path:
    path = out / name
    path.write_text(render_svg(*args, **kwargs))
    return path


def _finish(cfg: dict, out: Path, written: list) -> list:
    written.append(io.write_record(out / "config.json", cfg))
    return written


def run_quench(cfg: dict, out) -> list:
    out = Path(out)
    chain = build_chain(cfg["chain"])
    n = chain.unit_cells
    spec = QuenchSpec(chain, edge_initial_state(n, cfg["initial_ratio"]), cfg["window_s"],
                      cfg["step_s"], cfg["initial_ratio"], cfg["root_tol_s"])
    report = classify_dpt(spec, cfg["escalation"])
    trace = loschmidt_trace(eigendecompose(chain), spec.initial_state, spec.times(), n,
                            offset=cfg["pgp_offset_rad"])
    record = report.to_record()
    record["critical_times_ms"] = [1e3 * t for t in report.critical_times]
    record["chain"] = chain.to_record()
    written = [
        io.write_table(out / "trace.csv", trace.COLUMNS, trace.columns()),
        io.write_record(out / "report.json", record),
    ]
    if cfg["svg"]:
        written.append(_write_svg(out, "rate.svg", (trace.times, trace.rate), xlabel="t (s)",
                                  ylabel="lambda(t)", title="rate function"))
        written.append(_write_svg(out, "pgp.svg", (trace.times, trace.phi_p), style="step",
                                  ylim=(-0.1, np.pi + 0.1), xlabel="t (s)", ylabel="phi_P (rad)",
                                  title="geometric phase"))
    if cfg["png"]:
        from .figures import quench_figure
        written.append(quench_figure(trace, report.critical_times, out / "quench.png"))
    return _finish(cfg, out, written)


def disorder_samples(cfg: dict, bond_count: int) -> list[tuple[str, float, object]]:
    """(label, strength, DisorderSpec) for every member of the ensemble.

    Random members draw their seed from ``(seed, strength index, sample
    index)`` so adding strengths or samples leaves existing members unchanged.
    """
    if cfg["rows"] is not None:
        return [(name, TABLE_V[name][0], table_v_disorder(name)) for name in cfg["rows"]]
    members = []
    for i, strength in enumerate(cfg["strengths"]):
        for k in range(cfg["samples"]):
            seed = int(np.random.SeedSequence([cfg["seed"], i, k]).generate_state(1)[0])
            members.append((f"D{strength:g}_s{k}", strength,
                            sample_disorder(strength, bond_count, seed)))
    return members


def _sample_std(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size < 2 or np.all(v == v[0]):
        return 0.0
    return float(np.std(v, ddof=1))


def run_disorder(cfg: dict, out) -> list:
    out = Path(out)
    base = build_chain({**cfg["chain"], "disorder": None})
    n = base.unit_cells
    psi0 = edge_state(base.sites)
    members = disorder_samples(cfg, base.couplings.size)

    def work(member):
        label, strength, spec = member
        chain = apply_disorder(base, spec)
        q = QuenchSpec(chain, psi0, cfg["window_s"], cfg["step_s"], 0.0, cfg["root_tol_s"])
        report = classify_dpt(q)
        trace = loschmidt_trace(eigendecompose(chain), psi0, q.times(), n)
        return report, trace

    results = _pool_map(work, members, cfg["workers"])
    times = results[0][1].times
    names = ["t_s"] + [f"phi_P_rad_{label}" for label, _, _ in members]
    table = np.column_stack([times] + [tr.phi_p for _, tr in results])
    samples = []
    for (label, strength, spec), (report, _) in zip(members, results):
        samples.append({"label": label, "strength_hz": strength, "seed": spec.seed,
                        "pgp_jump": bool(report.pgp_jump_times),
                        "critical_times_s": report.critical_times})
    stats = []
    for strength in dict.fromkeys(s for _, s, _ in members):
        group = [s for s in samples if s["strength_hz"] == strength]
        tc1 = [s["critical_times_s"][0] for s in group if s["critical_times_s"]]
        mean = float(np.mean(tc1)) if tc1 else np.nan
        stats.append([strength, len(group), sum(s["pgp_jump"] for s in group), mean,
                      _sample_std(tc1) if tc1 else np.nan])
    written = [
        io.write_table(out / "pgp_traces.csv", names, table),
        io.write_table(out / "stats.csv",
                       ["strength_hz", "samples", "with_jump", "mean_tc1_s", "std_tc1_s"], stats),
        io.write_record(out / "samples.json", {"samples": samples}),
    ]
    if cfg["svg"]:
        series = [(times, tr.phi_p + 4.0 * k) for k, (_, tr) in enumerate(results)]
        written.append(_write_svg(out, "pgp_traces.svg", series, style="step", xlabel="t (s)",
                                  ylabel="phi_P + offset (rad)",
                                  labels=[label for label, _, _ in members]))
    if cfg["png"]:
        from .figures import pgp_ensemble_figure
        traces = {label: tr.phi_p for (label, _, _), (_, tr) in zip(members, results)}
        written.append(pgp_ensemble_figure(times, traces, out / "pgp_traces.png"))
    return _finish(cfg, out, written)


def sweep_config(cfg: dict) -> SweepConfig:
    return SweepConfig(unit_cells=cfg["unit_cells"], initial_ratio=cfg["initial_ratio"],
                       j_inter=cfg["j_inter"], window=cfg["window"], bracket=tuple(cfg["bracket"]),
                       half_width=cfg["half_width"], steps_per_window=cfg["steps_per_window"],
                       workers=cfg["workers"] or 1)


def _axis(section: dict) -> np.ndarray:
    return np.linspace(section["start"], section["stop"], section["num"])


def run_sweep(cfg: dict, out) -> list:
    out = Path(out)
    config = sweep_config(cfg)
    summary = {"unit_cells": config.unit_cells, "initial_ratio": config.initial_ratio}
    written = []
    if cfg["calibrate_windows"]:
        best, rc, ladder = calibrate_window(config, cfg["calibrate_windows"])
        config = replace(config, window=best)
        summary["calibrated_window"] = best
        summary["window_ladder"] = [{"window": w, "r_c": r, "half_width": h} for w, r, h in ladder]
        written.append(io.write_table(out / "window_ladder.csv",
                                      ["window_JBT", "r_c", "half_width"], ladder))
        if cfg["png"]:
            from .figures import boundary_figure
            written.append(boundary_figure(ladder, out / "window_ladder.png", "$J_B T$"))
    summary["window"] = config.window
    summary["duration_s"] = config.duration
    if cfg["find_boundary"]:
        rc, hw = boundary(config)
        summary["r_c"] = rc
        summary["half_width"] = hw
    if cfg["initial_ratios"]:
        rows = boundary_vs_initial(cfg["initial_ratios"], config)
        summary["boundary_vs_initial"] = [{"initial_ratio": a, "r_c": r, "half_width": h}
                                          for a, r, h in rows]
        written.append(io.write_table(out / "boundary_vs_initial.csv",
                                      ["initial_ratio", "r_c", "half_width"], rows))
        if cfg["svg"]:
            arr = np.asarray(rows)
            written.append(_write_svg(out, "boundary_vs_initial.svg", (arr[:, 0], arr[:, 1]),
                                      xlabel="initial J_A/J_B", ylabel="r_c"))
        if cfg["png"]:
            from .figures import boundary_figure
            written.append(boundary_figure(rows, out / "boundary_vs_initial.png",
                                           "initial $J_A/J_B$"))
    if cfg["grid"] is not None:
        diagram = scan_diagram(_axis(cfg["grid"]["j_intra"]), _axis(cfg["grid"]["j_inter"]), config)
        summary["monotone_violations_j_inter_hz"] = diagram.monotone_violations
        written.append(io.write_table(out / "diagram.csv",
                                      ["j_intra_hz", "j_inter_hz", "dpt", "first_tc_s"],
                                      list(diagram.rows())))
        if cfg["svg"]:
            written.append(_write_svg(out, "diagram.svg", diagram.dpt[::-1], style="heatmap",
                                      xlabel="J_B (Hz)", ylabel="J_A (Hz)", title="DPT map"))
        if cfg["png"]:
            from .figures import diagram_figure
            written.append(diagram_figure(diagram, out / "diagram.png", summary.get("r_c")))
    written.append(io.write_record(out / "summary.json", summary))
    return _finish(cfg, out, written)


def mech_bank(cfg: dict, size: int) -> OscillatorBank:
    bank = OscillatorBank.beams_8()
    if size > bank.size:
        raise ValueError(f"the bank has {bank.size} beams, {size} requested")
    bank = bank.subset(range(size))
    if cfg["uniform_gamma_per_s"] is not None:
        bank = OscillatorBank(bank.freqs_hz, bank.omega / cfg["uniform_gamma_per_s"], bank.masses)
    return bank


def run_mech(cfg: dict, out) -> list:
    out = Path(out)
    times = np.linspace(0.0, cfg["duration_s"], cfg["samples"])
    if cfg["mode"] == "ringdown":
        return _run_ringdown(cfg, out, times)
    if cfg["couplings_hz"] is not None:
        chain = HoppingChain(cfg["couplings_hz"])
    else:
        chain = build_chain(cfg["chain"])
    bank = mech_bank(cfg, chain.sites)
    couplings = chain.couplings
    schedule = DriveSchedule.for_couplings(bank, couplings)
    psi0 = edge_state(chain.sites)
    trace = simulate_envelopes(bank, schedule, psi0, times, cfg["dt_s"], cfg["window_cycles"],
                               cfg["damping"], float(couplings.max()) or None)
    norm = normalize_instant(trace)
    tb = evolve(eigendecompose(chain), psi0, times)
    metrics = mech_vs_tb(norm, times, tb)
    metrics["couplings_hz"] = couplings
    names, data = norm.columns()
    names += [f"tb_abs_psi_{j + 1}" for j in range(chain.sites)]
    data = np.column_stack([data, np.abs(tb)])
    written = [
        io.write_table(out / "envelopes.csv", names, data),
        io.write_record(out / "metrics.json", metrics),
    ]
    if cfg["svg"]:
        series = [(times, np.abs(norm.psi[:, j])) for j in range(chain.sites)]
        written.append(_write_svg(out, "envelopes.svg", series, xlabel="t (s)", ylabel="|psi_j|",
                                  ylim=(0.0, 1.05)))
    if cfg["png"]:
        from .figures import envelope_figure
        written.append(envelope_figure(norm, times, tb, out / "envelopes.png"))
    return _finish(cfg, out, written)


def _run_ringdown(cfg: dict, out: Path, times) -> list:
    size = cfg["chain"]["unit_cells"] * 2
    bank = mech_bank(cfg, size)
    schedule = DriveSchedule.for_couplings(bank, np.zeros(size - 1))
    psi0 = np.full(size, 1.0 / np.sqrt(size), dtype=complex)
    trace = simulate_envelopes(bank, schedule, psi0, times, cfg["dt_s"], cfg["window_cycles"],
                               damping=True)
    amp = trace.amplitudes()
    slopes = np.polyfit(times, np.log(amp), 1)[0]
    fitted_q = bank.omega / (-2.0 * slopes)
    metrics = {
        "nominal_q": bank.quality,
        "fitted_q": fitted_q,
        "max_relative_q_error": float(np.max(np.abs(fitted_q / bank.quality - 1.0))),
    }
    names = ["t_s"] + [f"abs_psi_{j + 1}" for j in range(size)]
    written = [
        io.write_table(out / "ringdown.csv", names, np.column_stack([times, amp])),
        io.write_record(out / "metrics.json", metrics),
    ]
    if cfg["svg"]:
        series = [(times, amp[:, j]) for j in range(size)]
        written.append(_write_svg(out, "ringdown.svg", series, xlabel="t (s)", ylabel="|psi_j|"))
    if cfg["png"]:
        from .figures import ringdown_figure
        written.append(ringdown_figure(times, amp, fitted_q, out / "ringdown.png"))
    return _finish(cfg, out, written)


def run_spectrum(cfg: dict, out) -> list:
    out = Path(out)
    chain = build_chain(cfg["chain"])
    eig = eigendecompose(chain)
    psi0 = edge_initial_state(chain.unit_cells, cfg["initial_ratio"])
    grid = np.linspace(cfg["f_min_hz"], cfg["f_max_hz"], cfg["points"])
    response = response_spectrum(eig, psi0, cfg["linewidth_hz"], grid)
    occ = occupations(eig, psi0)
    record = eig.to_record(include_vectors=True)
    record["mode_frequencies_hz"] = mode_frequencies(eig)
    record["occupations"] = occ
    record["chain"] = chain.to_record()
    written = [
        io.write_table(out / "spectrum.csv", ["f_hz", "response"], np.column_stack([grid, response])),
        io.write_record(out / "eigen.json", record),
    ]
    if cfg["svg"]:
        written.append(_write_svg(out, "spectrum.svg", (grid, response), xlabel="detuning (Hz)",
                                  ylabel="response"))
    if cfg["png"]:
        from .figures import spectrum_figure
        written.append(spectrum_figure(grid, response, mode_frequencies(eig), occ,
                                       out / "spectrum.png"))
    return _finish(cfg, out, written)


RUNNERS = {
    "quench": run_quench,
    "disorder": run_disorder,
    "sweep": run_sweep,
    "mech": run_mech,
    "spectrum": run_spectrum,
}
