"""Balanced-photodetection model: SNL-normalized noise measurements, dB
conversion, and the probe-attenuation optimizer.

Transimpedance gain, analysis frequency, and the analyzer bandwidths are
carried as metadata only; every result is a noise factor relative to the
shot-noise limit of the detected (post-efficiency) power, so absolute
calibrations drop out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    GaussianState,
    ModeLabel,
    beamsplit_loss,
    intensity_difference_nsf,
    single_beam_nsf,
)

MEASURANDS = ("probe", "conjugate", "difference")

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DetectionChain:
    """Balanced photodetector plus spectrum-analyzer settings.

    Only ``quantum_efficiency`` (and the optional additive electronic-noise
    floor) affect computed noise factors.
    """

    quantum_efficiency: float = 0.98
    transimpedance_v_per_a: float = 1e5
    analysis_frequency_mhz: float = 1.2
    rbw_khz: float = 30.0
    vbw_hz: float = 100.0
    electronic_noise_floor: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.quantum_efficiency <= 1.0:
            raise ValueError(
                f"quantum_efficiency must be in [0, 1], got {self.quantum_efficiency}")
        if self.electronic_noise_floor < 0.0:
            raise ValueError("electronic_noise_floor must be >= 0")


@dataclass(frozen=True)
class NoiseMeasurement:
    nsf_linear: float
    nsf_db: float
    which: str

    def __post_init__(self):
        if self.which not in MEASURANDS:
            raise ValueError(f"which must be one of {MEASURANDS}, got {self.which!r}")
        if abs(self.nsf_db - to_decibel(self.nsf_linear)) > 1e-12:
            raise ValueError("nsf_db does not match 10*log10(nsf_linear)")

    @classmethod
    def from_linear(cls, nsf_linear: float, which: str) -> "NoiseMeasurement":
        return cls(nsf_linear, to_decibel(nsf_linear), which)


def to_decibel(nsf_linear: float) -> float:
    if not nsf_linear > 0.0:
        raise ValueError(f"linear noise factor must be positive, got {nsf_linear}")
    return 10.0 * math.log10(nsf_linear)


def from_decibel(nsf_db: float) -> float:
    return 10.0 ** (nsf_db / 10.0)


def measure_noise(state: GaussianState, probe: ModeLabel, conj: ModeLabel,
                  chain: DetectionChain, which: str) -> NoiseMeasurement:
    """Noise of one beam or of the twin-beam intensity difference, relative
    to the SNL of the detected power. Detector efficiency acts as beamsplitter
    loss on each detected beam before the noise factor is formed."""
    if which not in MEASURANDS:
        raise ValueError(f"which must be one of {MEASURANDS}, got {which!r}")
    detected = beamsplit_loss(state, probe, chain.quantum_efficiency)
    detected = beamsplit_loss(detected, conj, chain.quantum_efficiency)
    if which == "probe":
        nsf = single_beam_nsf(detected, probe)
    elif which == "conjugate":
        nsf = single_beam_nsf(detected, conj)
    else:
        nsf = intensity_difference_nsf(detected, probe, conj)
    return NoiseMeasurement.from_linear(nsf + chain.electronic_noise_floor, which)


def _golden_section(f, lo: float, hi: float, tol: float = 1e-4) -> float:
    c = hi - (hi - lo) * _INV_GOLDEN
    d = lo + (hi - lo) * _INV_GOLDEN
    fc, fd = f(c), f(d)
    while abs(c - d) > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - (hi - lo) * _INV_GOLDEN
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + (hi - lo) * _INV_GOLDEN
            fd = f(d)
    return 0.5 * (lo + hi)


def _is_unimodal(values: np.ndarray) -> bool:
    """True when the coarse scan decreases (weakly) then increases (weakly)."""
    d = np.diff(values)
    falling = True
    for step in d:
        if falling:
            if step > 1e-12:
                falling = False
        elif step < -1e-12:
            return False
    return True


def optimize_probe_attenuation(state: GaussianState, probe: ModeLabel,
                               conj: ModeLabel, chain: DetectionChain,
                               t_range: tuple[float, float] = (0.01, 1.0),
                               ) -> tuple[float, float]:
    """Find the probe transmission t minimizing the detected
    intensity-difference NSF; returns (t_star, nsf_star).

    Golden-section search under a unimodality assumption that is always
    checked on a coarse scan first (the lumped-model NSF(t) is a ratio of a
    quadratic to a linear form with a single interior minimum); if the scan
    is not unimodal the minimizer falls back to a dense scan at dt = 0.005.
    The result never loses to no attenuation: nsf_star <= NSF(t=1).
    """
    lo, hi = t_range
    if not 0.0 < lo < hi <= 1.0:
        raise ValueError(f"need 0 < t_min < t_max <= 1, got {t_range}")

    def nsf(t: float) -> float:
        attenuated = beamsplit_loss(state, probe, t)
        return measure_noise(attenuated, probe, conj, chain, "difference").nsf_linear

    coarse_t = np.linspace(lo, hi, 41)
    coarse = np.array([nsf(t) for t in coarse_t])
    if _is_unimodal(coarse):
        t_star = _golden_section(nsf, lo, hi)
    else:
        dense_t = np.arange(lo, hi + 2.5e-3, 5e-3)
        dense_t[-1] = min(dense_t[-1], hi)
        dense = np.array([nsf(t) for t in dense_t])
        i = int(dense.argmin())
        # polish inside the winning bracket, where the function is unimodal
        a = dense_t[max(i - 1, 0)]
        b = dense_t[min(i + 1, len(dense_t) - 1)]
        t_star = _golden_section(nsf, a, b)

    candidates = [t_star, 1.0] if hi == 1.0 else [t_star, hi]
    best_t = candidates[0]
    best_v = nsf(best_t)
    for t in candidates[1:]:
        v = nsf(t)
        if v <= best_v + 1e-12:
            best_t, best_v = t, v
    return float(best_t), float(best_v)
