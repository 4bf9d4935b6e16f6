"""Parametrically coupled nanomechanical beams at carrier level.

The full Newtonian equations

    m_j z_j'' + m_j g_j z_j' + k_j z_j = L_j(t) (z_{j+1} - z_j) + L_{j-1}(t) (z_{j-1} - z_j),
    L_j(t) = eta_j cos(w_p^j t),   w_p^j = w_j - w_{j+1},

are integrated with fixed-step classical RK4, and the slowly varying
envelopes psi_j defined by ``z_j = A_j Re(psi_j exp(i w_j t))`` are recovered
with a boxcar lock-in over an integer number of carrier periods. In the
rotating-wave limit the envelopes obey the tight-binding Schroedinger
equation with hopping ``eta_j / (4 sqrt(m_j m_{j+1} w_j w_{j+1}))``.

Units: SI throughout; frequencies enter as Hz and are stored as rad/s.
Masses default to 1 kg and hbar to 1, which only fixes the arbitrary
envelope scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.optimize import curve_fit

from .datasets import BEAMS_8, V_DC, VOLTAGE_PRESETS
from .lattice import PHASE_RATE

STEPS_PER_PERIOD = 250
MIN_STEPS_PER_PERIOD = 50
WINDOW_CYCLES = 50
XI_DEFAULT = 0.83


class MechError(ValueError):
    pass


@dataclass(frozen=True)
class OscillatorBank:
    """Beam parameters. ``freqs_hz`` and ``quality`` per oscillator; masses in kg."""

    freqs_hz: np.ndarray
    quality: np.ndarray
    masses: np.ndarray | None = None

    def __post_init__(self):
        f = np.array(self.freqs_hz, dtype=float)
        q = np.array(self.quality, dtype=float)
        m = np.ones_like(f) if self.masses is None else np.array(self.masses, dtype=float)
        if f.shape != q.shape or f.shape != m.shape or f.ndim != 1:
            raise MechError("freqs, quality factors and masses must be equal-length vectors")
        if np.any(f <= 0) or np.any(q <= 0) or np.any(m <= 0):
            raise MechError("frequencies, quality factors and masses must be positive")
        for name, arr in (("freqs_hz", f), ("quality", q), ("masses", m)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def beams_8(cls) -> "OscillatorBank":
        f_khz, q = zip(*BEAMS_8)
        return cls(np.array(f_khz) * 1e3, q)

    def subset(self, indices) -> "OscillatorBank":
        idx = list(indices)
        return OscillatorBank(self.freqs_hz[idx], self.quality[idx], self.masses[idx])

    @property
    def size(self) -> int:
        return self.freqs_hz.size

    @property
    def omega(self) -> np.ndarray:
        return 2 * np.pi * self.freqs_hz

    @property
    def stiffness(self) -> np.ndarray:
        return self.masses * self.omega**2

    @property
    def gamma(self) -> np.ndarray:
        """Energy decay rate w/Q in 1/s; amplitudes decay at half this rate."""
        return self.omega / self.quality

    @property
    def amplitude(self) -> np.ndarray:
        """Zero-point-like scale sqrt(hbar w / 2k), hbar = 1."""
        return np.sqrt(self.omega / (2 * self.stiffness))

    def default_dt(self) -> float:
        return 1.0 / (STEPS_PER_PERIOD * self.freqs_hz.max())


def eta_for_coupling(coupling_hz: float, bank: OscillatorBank, bond: int) -> float:
    """Pump amplitude (N/m) that realizes a ``coupling_hz`` bond between beams ``bond``, ``bond+1``.

    ``bond`` is 1-indexed.
    """
    if coupling_hz < 0:
        raise MechError("coupling must be non-negative")
    j = bond - 1
    m, w = bank.masses, bank.omega
    return 4.0 * PHASE_RATE * coupling_hz * math.sqrt(m[j] * m[j + 1] * w[j] * w[j + 1])


def coupling_from_eta(eta: float, bank: OscillatorBank, bond: int) -> float:
    j = bond - 1
    m, w = bank.masses, bank.omega
    return eta / (4.0 * PHASE_RATE * math.sqrt(m[j] * m[j + 1] * w[j] * w[j + 1]))


@dataclass(frozen=True)
class DriveSchedule:
    """Per bond: pump amplitude (N/m), pump frequency (rad/s) and on/off times (s)."""

    eta: np.ndarray
    omega_p: np.ndarray
    t_on: np.ndarray
    t_off: np.ndarray

    def __post_init__(self):
        arrs = [np.array(x, dtype=float) for x in (self.eta, self.omega_p, self.t_on, self.t_off)]
        if len({a.shape for a in arrs}) != 1:
            raise MechError("drive arrays must have one entry per bond")
        for name, arr in zip(("eta", "omega_p", "t_on", "t_off"), arrs):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def for_couplings(cls, bank: OscillatorBank, couplings_hz, t_on: float = 0.0,
                      t_off: float = np.inf) -> "DriveSchedule":
        c = np.asarray(couplings_hz, dtype=float)
        if c.size != bank.size - 1:
            raise MechError(f"{c.size} couplings for {bank.size} oscillators")
        w = bank.omega
        wp = w[:-1] - w[1:]
        ratio = np.abs(wp) / w[:-1]
        if np.any(ratio > 0.2):
            warnings.warn("pump frequency is not small against the carrier; RWA will be poor")
        eta = [eta_for_coupling(x, bank, j + 1) for j, x in enumerate(c)]
        n = c.size
        return cls(eta, wp, np.full(n, t_on), np.full(n, t_off))

    def couplings_hz(self, bank: OscillatorBank) -> np.ndarray:
        return np.array([coupling_from_eta(e, bank, j + 1) for j, e in enumerate(self.eta)])


@numba.njit(cache=True, nogil=True, inline="always")
def _accel(z, v, t, w2, gam, inv_m, eta, wp, t_on, t_off, out):
    n = z.size
    for j in range(n):
        out[j] = -w2[j] * z[j] - gam[j] * v[j]
    for j in range(n - 1):
        if t_on[j] <= t < t_off[j]:
            f = eta[j] * math.cos(wp[j] * t) * (z[j + 1] - z[j])
            out[j] += f * inv_m[j]
            out[j + 1] -= f * inv_m[j + 1]


@numba.njit(cache=True, nogil=True, inline="always")
def _rk4_step(z, v, t, dt, w2, gam, inv_m, eta, wp, t_on, t_off, buf):
    """One classical RK4 step in place. ``buf`` is (8, n) scratch."""
    n = z.size
    h = 0.5 * dt
    a1, a2, a3, a4, zt, v2, v3, v4 = buf[0], buf[1], buf[2], buf[3], buf[4], buf[5], buf[6], buf[7]
    _accel(z, v, t, w2, gam, inv_m, eta, wp, t_on, t_off, a1)
    for j in range(n):
        zt[j] = z[j] + h * v[j]
        v2[j] = v[j] + h * a1[j]
    _accel(zt, v2, t + h, w2, gam, inv_m, eta, wp, t_on, t_off, a2)
    for j in range(n):
        zt[j] = z[j] + h * v2[j]
        v3[j] = v[j] + h * a2[j]
    _accel(zt, v3, t + h, w2, gam, inv_m, eta, wp, t_on, t_off, a3)
    for j in range(n):
        zt[j] = z[j] + dt * v3[j]
        v4[j] = v[j] + dt * a3[j]
    _accel(zt, v4, t + dt, w2, gam, inv_m, eta, wp, t_on, t_off, a4)
    for j in range(n):
        z[j] += dt / 6.0 * (v[j] + 2.0 * v2[j] + 2.0 * v3[j] + v4[j])
        v[j] += dt / 6.0 * (a1[j] + 2.0 * a2[j] + 2.0 * a3[j] + a4[j])


@numba.njit(cache=True, nogil=True)
def _run_raw(z, v, t0, dt, nsteps, every, w2, gam, inv_m, eta, wp, t_on, t_off, out):
    n = z.size
    buf = np.empty((8, n))
    row = 0
    for s in range(nsteps + 1):
        if s % every == 0:
            for j in range(n):
                out[row, j] = z[j]
            row += 1
        if s == nsteps:
            break
        _rk4_step(z, v, t0 + s * dt, dt, w2, gam, inv_m, eta, wp, t_on, t_off, buf)


@numba.njit(cache=True, nogil=True)
def _run_demod(z, v, t0, dt, nsteps, w, w2, gam, inv_m, eta, wp, t_on, t_off, start, win, acc):
    """Integrate while accumulating sum_s z_j(t_s) exp(-i w_j t_s) over each window.

    ``start[j, k]`` is the first step of window k for oscillator j and
    ``win[j]`` its length in steps; ``acc[j, k]`` receives the window sum.
    """
    n = z.size
    K = start.shape[1]
    buf = np.empty((8, n))
    sre = np.zeros(n); sim = np.zeros(n)
    ps = np.zeros(n, np.int64)
    pe = np.zeros(n, np.int64)
    for s in range(nsteps + 1):
        t = t0 + s * dt
        for j in range(n):
            while ps[j] < K and start[j, ps[j]] == s:
                acc[j, ps[j]] -= complex(sre[j], sim[j])
                ps[j] += 1
            while pe[j] < K and start[j, pe[j]] + win[j] == s:
                acc[j, pe[j]] += complex(sre[j], sim[j])
                pe[j] += 1
            ph = w[j] * t
            sre[j] += z[j] * math.cos(ph)
            sim[j] -= z[j] * math.sin(ph)
        if s == nsteps:
            break
        _rk4_step(z, v, t, dt, w2, gam, inv_m, eta, wp, t_on, t_off, buf)


def _kernel_args(bank: OscillatorBank, schedule: DriveSchedule, damping: bool):
    if schedule.eta.size != bank.size - 1:
        raise MechError("drive schedule does not match the oscillator count")
    gam = bank.gamma if damping else np.zeros(bank.size)
    return (bank.omega**2, np.ascontiguousarray(gam), 1.0 / bank.masses,
            np.ascontiguousarray(schedule.eta), np.ascontiguousarray(schedule.omega_p),
            np.ascontiguousarray(schedule.t_on), np.ascontiguousarray(schedule.t_off))


def _check_dt(bank: OscillatorBank, dt: float):
    if dt <= 0 or dt > 1.0 / (MIN_STEPS_PER_PERIOD * bank.freqs_hz.max()):
        raise MechError(f"dt={dt:g} s is coarser than 1/({MIN_STEPS_PER_PERIOD} f_max)")


@dataclass(frozen=True)
class Trajectory:
    t0: float
    dt: float  # spacing of stored samples
    z: np.ndarray  # (samples, oscillators)
    end_state: tuple | None = field(default=None, repr=False)  # (z, v) after the last step

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.z.shape[0])


def initial_from_envelope(bank: OscillatorBank, psi, t0: float = 0.0):
    """Displacements and velocities at ``t0`` for complex envelopes ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    rot = psi * np.exp(1j * bank.omega * t0)
    a = bank.amplitude
    return a * rot.real, a * (1j * bank.omega * rot).real


def integrate(bank: OscillatorBank, schedule: DriveSchedule, z0, v0, duration: float,
              dt: float | None = None, damping: bool = False, t0: float = 0.0,
              record_every: int = 1) -> Trajectory:
    """Raw displacement trajectories, one row per ``record_every`` steps."""
    dt = bank.default_dt() if dt is None else dt
    _check_dt(bank, dt)
    if duration <= 0:
        raise MechError("duration must be positive")
    nsteps = int(round(duration / dt))
    z = np.array(z0, dtype=float)
    v = np.array(v0, dtype=float)
    out = np.empty((nsteps // record_every + 1, bank.size))
    _run_raw(z, v, float(t0), float(dt), nsteps, int(record_every),
             *_kernel_args(bank, schedule, damping), out)
    return Trajectory(float(t0), dt * record_every, out, (z, v))


@dataclass(frozen=True)
class EnvelopeTrace:
    times: np.ndarray
    psi: np.ndarray  # (samples, oscillators), complex
    normalized: bool = False
    norm: np.ndarray | None = field(default=None, repr=False)

    def amplitudes(self) -> np.ndarray:
        return np.abs(self.psi)

    def columns(self) -> tuple[list[str], np.ndarray]:
        n = self.psi.shape[1]
        names = ["t_s"] + [f"abs_psi_{j + 1}" for j in range(n)] + ["arg_psi_1_rad"]
        data = np.column_stack([self.times, np.abs(self.psi), np.angle(self.psi[:, 0])])
        return names, data


def _window_steps(bank: OscillatorBank, dt: float, window_cycles: int) -> np.ndarray:
    return np.rint(window_cycles / (bank.freqs_hz * dt)).astype(np.int64)


def _check_window(bank, window_cycles, max_coupling_hz):
    if window_cycles < 10:
        raise MechError("window_cycles must be >= 10")
    if max_coupling_hz:
        span = window_cycles / bank.freqs_hz.min()
        if span > 0.1 / max_coupling_hz:
            raise MechError(
                f"lock-in window {span * 1e3:.3g} ms exceeds 10% of 1/J = {1e3 / max_coupling_hz:.3g} ms"
            )


def demodulate(traj: Trajectory, bank: OscillatorBank, window_cycles: int = WINDOW_CYCLES,
               max_coupling_hz: float | None = None, stride: int = 1) -> EnvelopeTrace:
    """Complex envelopes ``(2/A_j) <z_j exp(-i w_j t)>`` over ``window_cycles`` periods.

    Outputs are placed every ``stride`` samples wherever every oscillator's
    window fits inside the trajectory.
    """
    _check_window(bank, window_cycles, max_coupling_hz)
    if traj.dt > 0.25 / bank.freqs_hz.max():
        raise MechError("trajectory is sampled too coarsely to resolve the carrier")
    t = traj.times
    win = _window_steps(bank, traj.dt, window_cycles)
    half = win // 2
    lo = int(half.max())
    hi = traj.z.shape[0] - int((win - half).max())
    if hi < lo:
        raise MechError("trajectory shorter than the lock-in window")
    centers = np.arange(lo, hi + 1, stride)
    psi = np.empty((centers.size, bank.size), dtype=complex)
    for j in range(bank.size):
        mixed = traj.z[:, j] * np.exp(-1j * bank.omega[j] * t)
        csum = np.concatenate([[0.0], np.cumsum(mixed)])
        s = centers - half[j]
        psi[:, j] = (csum[s + win[j]] - csum[s]) / win[j] * (2.0 / bank.amplitude[j])
    return EnvelopeTrace(t[centers], psi)


def simulate_envelopes(bank: OscillatorBank, schedule: DriveSchedule, psi0, times,
                       dt: float | None = None, window_cycles: int = WINDOW_CYCLES,
                       damping: bool = False, max_coupling_hz: float | None = None) -> EnvelopeTrace:
    """Integrate and lock-in in one pass, without storing the carrier-level samples.

    The bank rings freely with envelopes ``psi0`` before t = 0 (drives are
    off there unless the schedule says otherwise); ``times`` are the output
    instants, t >= 0.
    """
    dt = bank.default_dt() if dt is None else dt
    _check_dt(bank, dt)
    _check_window(bank, window_cycles, max_coupling_hz)
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise MechError("output times must be non-negative and ascending")
    win = _window_steps(bank, dt, window_cycles)
    half = win // 2
    pre = int(half.max()) + 1
    t0 = -pre * dt
    centers = np.rint((times - t0) / dt).astype(np.int64)
    start = np.ascontiguousarray((centers[None, :] - half[:, None]).astype(np.int64))
    nsteps = int(centers[-1] + (win - half).max() + 1)
    z, v = initial_from_envelope(bank, psi0, t0)
    acc = np.zeros((bank.size, times.size), dtype=complex)
    _run_demod(z, v, t0, float(dt), nsteps, bank.omega, *_kernel_args(bank, schedule, damping),
               start, win, acc)
    psi = (acc / win[:, None] * (2.0 / bank.amplitude)[:, None]).T
    return EnvelopeTrace(times, psi)


def normalize_instant(trace: EnvelopeTrace) -> EnvelopeTrace:
    """Divide every sample by its 2-norm across oscillators."""
    norm = np.linalg.norm(trace.psi, axis=1)
    if np.any(norm == 0):
        raise MechError(f"all envelopes vanish at t = {trace.times[np.argmax(norm == 0)]:g} s")
    return EnvelopeTrace(trace.times, trace.psi / norm[:, None], True, norm)


def mech_vs_tb(trace: EnvelopeTrace, tb_times, tb_psi, phase_floor: float = 0.05) -> dict:
    """Amplitude and edge-phase discrepancies between a lock-in trace and TB evolution.

    The TB run is interpolated onto the trace's times. Edge phases are
    compared modulo pi and only where the TB edge amplitude exceeds
    ``phase_floor`` (the phase is undefined at its zeros).
    """
    tb_psi = np.asarray(tb_psi, dtype=complex)
    tb_times = np.asarray(tb_times, dtype=float)
    if tb_psi.ndim != 2 or tb_psi.shape[1] != trace.psi.shape[1]:
        raise MechError("trace and TB run describe different chains")
    if tb_times.shape != trace.times.shape or not np.allclose(tb_times, trace.times, rtol=0, atol=1e-12):
        tb_psi = np.column_stack([
            np.interp(trace.times, tb_times, tb_psi[:, j].real)
            + 1j * np.interp(trace.times, tb_times, tb_psi[:, j].imag)
            for j in range(tb_psi.shape[1])
        ])
    damp = np.abs(np.abs(trace.psi) - np.abs(tb_psi))
    mask = np.abs(tb_psi[:, 0]) > phase_floor
    dphi = np.angle(trace.psi[mask, 0] * np.conj(tb_psi[mask, 0]))
    dphi = (dphi + np.pi / 2) % np.pi - np.pi / 2
    return {
        "linf_amplitude": float(damp.max()),
        "rms_amplitude": float(np.sqrt(np.mean(damp**2))),
        "linf_edge_phase": float(np.abs(dphi).max()) if dphi.size else 0.0,
        "rms_edge_phase": float(np.sqrt(np.mean(dphi**2))) if dphi.size else 0.0,
    }


def fit_rabi_coupling(times, population) -> float:
    """Coupling (Hz) from a dimer population ``cos^2(pi J t)`` by least squares.

    The fit is seeded from the first half-population crossing, or from the
    last sample when the population never drops that far.
    """
    t = np.asarray(times, dtype=float)
    p = np.clip(np.asarray(population, dtype=float), 0.0, 1.0)
    below = np.flatnonzero(p < 0.5)
    k = int(below[0]) if below.size else t.size - 1
    if t[k] <= 0:
        raise MechError("need samples after t = 0 to fit a coupling")
    guess = np.arccos(np.sqrt(p[k])) / (PHASE_RATE * t[k])
    (j,), _ = curve_fit(lambda s, jj: np.cos(PHASE_RATE * jj * s) ** 2, t, p, p0=[guess])
    return float(abs(j))


@dataclass(frozen=True)
class CalibrationModel:
    """Linear coupling-vs-voltage law J = slope * V_AC at fixed V_DC."""

    slope: float  # Hz per volt
    v_dc: float = V_DC
    curvature: float | None = None  # d^2C/dz^2 in F/m^2

    @classmethod
    def from_curvature(cls, curvature: float, bank: OscillatorBank, bond: int,
                       v_dc: float = V_DC) -> "CalibrationModel":
        return cls(coupling_from_eta(curvature * v_dc, bank, bond), v_dc, curvature)

    def eta(self, v_ac: float) -> float:
        """Pump amplitude L_j = C'' V_AC V_DC; needs ``curvature``."""
        if self.curvature is None:
            raise MechError("calibration has no capacitance curvature")
        return self.curvature * v_ac * self.v_dc


def coupling_from_voltage(cal: CalibrationModel, v_ac: float) -> float:
    if v_ac < 0:
        raise MechError("V_AC must be non-negative")
    if v_ac > 0.1 * cal.v_dc:
        warnings.warn(f"V_AC = {v_ac:g} V is not small against V_DC = {cal.v_dc:g} V")
    return cal.slope * v_ac


def fit_calibration(voltages, couplings_hz, v_dc: float = V_DC) -> CalibrationModel:
    """Least-squares slope through the origin."""
    v = np.asarray(voltages, dtype=float)
    j = np.asarray(couplings_hz, dtype=float)
    return CalibrationModel(float(v @ j / (v @ v)), v_dc)


def preset_calibration() -> CalibrationModel:
    """Slope fitted to both voltage tables against their 20/60 Hz targets."""
    vs, js = [], []
    for preset in VOLTAGE_PRESETS.values():
        for circuit in ("odd_circuit", "even_circuit"):
            vs.extend(preset[circuit])
            js.extend(preset["target_hz"])
    return fit_calibration(vs, js)


@dataclass(frozen=True)
class TransductionParams:
    b_field: float  # tesla
    beam_length: float = 200e-6  # metres
    xi: float = XI_DEFAULT

    def __post_init__(self):
        if not 0 < self.xi <= 1:
            raise MechError("shape factor must lie in (0, 1]")
        if self.b_field <= 0 or self.beam_length <= 0:
            raise MechError("field and beam length must be positive")


def displacement_from_voltage(voltage: float, params: TransductionParams, omega: float) -> float:
    """Magnetomotive readout inversion |z| = |V| / (xi B L w)."""
    if omega <= 0:
        raise MechError("omega must be positive")
    return abs(voltage) / (params.xi * params.b_field * params.beam_length * omega)
