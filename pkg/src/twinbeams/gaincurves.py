"""Empirical probe/conjugate gain versus two-photon detuning for the
nonamplifying regime.

The probe gain is a logistic roll-off from a high-detuning plateau; the
conjugate gain is a skewed peak (a split Gaussian, broader on the
low-detuning side so it falls off only slightly below its maximum). Default
parameters are calibrated so that, across the modeled range, the probe
plateau sits at 0.85, the probe reaches 0.27 at -50 MHz, the conjugate
peaks at 0.27 near -42 MHz, the total gain tops out just below one around
-20 MHz, and the total stays above 0.95 throughout [-25, -5] MHz.
scripts/calibrate_gain_curve.py re-derives the frozen numbers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .channels import GainPair

DELTA_MIN_MHZ = -50.0
DELTA_MAX_MHZ = 16.0


class ExtrapolationWarning(UserWarning):
    """Gain curves evaluated outside the detuning range they were calibrated on."""


@dataclass(frozen=True)
class GainCurveModel:
    probe_plateau: float = 0.850405317708981
    probe_floor: float = 0.2296714354175134
    probe_center_mhz: float = -34.0
    probe_width_mhz: float = 6.0
    conj_amplitude: float = 0.27
    conj_peak_mhz: float = -42.0
    conj_width_right_mhz: float = 28.0
    conj_width_left_mhz: float = 40.0

    def __post_init__(self):
        if self.probe_width_mhz <= 0.0:
            raise ValueError("probe_width_mhz must be positive")
        if self.conj_width_right_mhz <= 0.0 or self.conj_width_left_mhz <= 0.0:
            raise ValueError("conjugate widths must be positive")
        if self.conj_amplitude < 0.0:
            raise ValueError("conj_amplitude must be >= 0")
        if self.probe_floor < 0.0 or self.probe_plateau < self.probe_floor:
            raise ValueError("need 0 <= probe_floor <= probe_plateau")

    def probe_gain(self, delta_mhz):
        x = (np.asarray(delta_mhz, dtype=float) - self.probe_center_mhz) / self.probe_width_mhz
        return self.probe_floor + (self.probe_plateau - self.probe_floor) / (1.0 + np.exp(-x))

    def conj_gain(self, delta_mhz):
        d = np.asarray(delta_mhz, dtype=float)
        width = np.where(d >= self.conj_peak_mhz,
                         self.conj_width_right_mhz, self.conj_width_left_mhz)
        return self.conj_amplitude * np.exp(-((d - self.conj_peak_mhz) ** 2)
                                            / (2.0 * width**2))

    def total_gain(self, delta_mhz):
        return self.probe_gain(delta_mhz) + self.conj_gain(delta_mhz)


def gain_curves(model: GainCurveModel, delta_mhz: float) -> GainPair:
    """Evaluate the gain pair at one detuning (MHz). Values outside the
    calibrated range are still returned but flagged with a warning."""
    if not DELTA_MIN_MHZ <= delta_mhz <= DELTA_MAX_MHZ:
        warnings.warn(
            f"detuning {delta_mhz} MHz is outside the calibrated range "
            f"[{DELTA_MIN_MHZ}, {DELTA_MAX_MHZ}] MHz",
            ExtrapolationWarning, stacklevel=2)
    return GainPair(float(model.probe_gain(delta_mhz)),
                    float(model.conj_gain(delta_mhz)))


def nonamplifying_window(model: GainCurveModel,
                         resolution_mhz: float = 0.1) -> tuple[float, float] | None:
    """Maximal contiguous detuning interval where the total gain lies in
    [0.95, 1 + 1e-6], from a dense scan of the calibrated range.
    Returns None when no point qualifies."""
    n = int(round((DELTA_MAX_MHZ - DELTA_MIN_MHZ) / resolution_mhz)) + 1
    deltas = np.linspace(DELTA_MIN_MHZ, DELTA_MAX_MHZ, n)
    total = model.total_gain(deltas)
    ok = (total >= 0.95) & (total <= 1.0 + 1e-6)
    if not ok.any():
        return None
    idx = np.flatnonzero(ok)
    runs = np.split(idx, np.flatnonzero(np.diff(idx) != 1) + 1)
    best = max(runs, key=len)
    return float(deltas[best[0]]), float(deltas[best[-1]])
