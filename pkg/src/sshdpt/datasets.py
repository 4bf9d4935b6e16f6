"""Measured device data bundled with the package.

Beam parameters of the eight-oscillator sample, the AC coupling voltages of
the two measurement circuits, and the fixed disorder realizations used for
the robustness runs.
"""

# (frequency in kHz, quality factor) of the first out-of-plane mode, beams 1..8
BEAMS_8 = (
    (907.184, 106300),
    (905.980, 91700),
    (923.843, 101000),
    (893.665, 77400),
    (922.695, 105100),
    (905.627, 71400),
    (918.246, 119600),
    (873.976, 84000),
)

V_DC = 4.0  # volts, common to every bond

# V_AC per bond j = 1..7, for the circuit reading odd (resp. even) oscillators
VOLTAGE_PRESETS = {
    "topological": {
        "odd_circuit": (0.082, 0.222, 0.069, 0.207, 0.072, 0.208, 0.072),
        "even_circuit": (0.160, 0.240, 0.079, 0.214, 0.073, 0.220, 0.085),
        "target_hz": (20.0, 60.0, 20.0, 60.0, 20.0, 60.0, 20.0),
    },
    "trivial": {
        "odd_circuit": (0.250, 0.075, 0.205, 0.070, 0.210, 0.072, 0.230),
        "even_circuit": (0.495, 0.079, 0.232, 0.073, 0.222, 0.074, 0.245),
        "target_hz": (60.0, 20.0, 60.0, 20.0, 60.0, 20.0, 60.0),
    },
}

# name -> (disorder strength in Hz, per-bond offsets in Hz)
TABLE_V = {
    "d1": (5.0, (-5, 1, 1, 5, 3, -2, 0)),
    "d2": (5.0, (0, -5, 4, 2, -3, 5, -3)),
    "d3": (5.0, (0, 5, -3, -5, 4, 2, 0)),
    "d4": (5.0, (-4, -4, -1, -3, -2, -3, -1)),
    "d5": (5.0, (-1, 2, -1, -4, -1, 1, -2)),
    "d6": (10.0, (-1, -4, -8, -8, 6, 1, 9)),
    "d7": (10.0, (-5, -8, -2, 0, -4, 4, -1)),
    "d8": (10.0, (-8, -2, 9, 6, 10, 3, -10)),
    "d9": (10.0, (7, 5, 5, 10, -1, 6, -2)),
    "d10": (10.0, (3, 9, -10, 5, 6, 9, 10)),
    "d11": (15.0, (-10, -4, 4, 9, -13, 13, 9)),
    "d12": (15.0, (10, -2, 10, 9, -7, -13, -14)),
    "d13": (15.0, (-3, -7, 11, 14, -4, -13, -10)),
    "d14": (15.0, (-15, 5, -11, 9, -3, -5, 8)),
    "d15": (15.0, (-8, -15, 5, 13, 2, -11, 0)),
}
