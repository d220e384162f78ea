"""Monte-Carlo oracle for the twin-beam intensity-difference noise factor.

Deliberately independent of the covariance-matrix propagation in
:mod:`twinbeams.gaussian`: input quadrature fluctuations (and one fresh
vacuum pair per loss event) are sampled from unit-variance Gaussians and
pushed through the channel's linear amplitude maps sample by sample, then
the sample variance of the linearized photocurrent difference is formed.
Used by the test suite to cross-check every analytic noise law.
"""

from __future__ import annotations

import numpy as np

from .channels import CascadeSpec, ChannelSpec, LumpedChannelSpec, LOSS_BEFORE_GAIN
from .gaussian import MIN_BRIGHT_FLUX, DarkBeamError

MIN_SAMPLES = 10_000
_CHUNK = 1 << 16


def _channel_ops(spec: ChannelSpec, probe_attenuation: float,
                 detector_efficiency: float) -> list[tuple]:
    """Flatten the scenario into primitive ('squeeze', G) / ('loss', mode, eta)
    events. Unit transmissions are dropped."""
    ops: list[tuple] = []

    def loss(mode, eta):
        if eta != 1.0:
            ops.append(("loss", mode, eta))

    if isinstance(spec, LumpedChannelSpec):
        if spec.placement == LOSS_BEFORE_GAIN:
            loss("p", spec.eta_probe)
            loss("c", spec.eta_conj)
            ops.append(("squeeze", spec.gain))
        else:
            ops.append(("squeeze", spec.gain))
            loss("p", spec.eta_probe)
            loss("c", spec.eta_conj)
    elif isinstance(spec, CascadeSpec):
        r = spec.gamma_total / spec.steps
        g_step = np.cosh(r) ** 2
        t_p = np.exp(-spec.alpha_probe_total / (2.0 * spec.steps))
        t_c = np.exp(-spec.alpha_conj_total / (2.0 * spec.steps))
        for _ in range(spec.steps):
            loss("p", t_p)
            loss("c", t_c)
            ops.append(("squeeze", g_step))
            loss("p", t_p)
            loss("c", t_c)
    else:
        raise TypeError(f"unsupported channel spec {type(spec).__name__}")
    loss("p", probe_attenuation)
    loss("p", detector_efficiency)
    loss("c", detector_efficiency)
    return ops


def _propagate_means(ops, seed_amplitude: complex) -> tuple[complex, complex]:
    a_p, a_c = complex(seed_amplitude), 0.0 + 0.0j
    for op in ops:
        if op[0] == "squeeze":
            u, v = np.sqrt(op[1]), np.sqrt(op[1] - 1.0)
            a_p, a_c = u * a_p + v * np.conj(a_c), u * a_c + v * np.conj(a_p)
        else:
            _, mode, eta = op
            if mode == "p":
                a_p *= np.sqrt(eta)
            else:
                a_c *= np.sqrt(eta)
    return a_p, a_c


def _propagate_fluct(ops, rng: np.random.Generator, n: int):
    xp = rng.standard_normal(n)
    pp = rng.standard_normal(n)
    xc = rng.standard_normal(n)
    pc = rng.standard_normal(n)
    for op in ops:
        if op[0] == "squeeze":
            u, v = np.sqrt(op[1]), np.sqrt(op[1] - 1.0)
            xp, xc = u * xp + v * xc, u * xc + v * xp
            pp, pc = u * pp - v * pc, u * pc - v * pp
        else:
            _, mode, eta = op
            t, rfl = np.sqrt(eta), np.sqrt(1.0 - eta)
            if mode == "p":
                xp = t * xp + rfl * rng.standard_normal(n)
                pp = t * pp + rfl * rng.standard_normal(n)
            else:
                xc = t * xc + rfl * rng.standard_normal(n)
                pc = t * pc + rfl * rng.standard_normal(n)
    return xp, pp, xc, pc


def mc_nsf_oracle(spec: ChannelSpec, seed_amplitude: complex, samples: int,
                  rng_seed: int, probe_attenuation: float = 1.0,
                  detector_efficiency: float = 1.0) -> float:
    """Sample estimate of the intensity-difference NSF of a coherent-seeded
    channel. Deterministic for a fixed ``rng_seed``: samples are drawn in
    fixed-size chunks whose generators come from spawning one master
    SeedSequence, so chunks stay decorrelated and the result does not depend
    on how the chunks might be scheduled.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    if not 0.0 <= probe_attenuation <= 1.0:
        raise ValueError(f"probe_attenuation must be in [0, 1], got {probe_attenuation}")
    if not 0.0 <= detector_efficiency <= 1.0:
        raise ValueError(f"detector_efficiency must be in [0, 1], got {detector_efficiency}")

    ops = _channel_ops(spec, probe_attenuation, detector_efficiency)
    a_p, a_c = _propagate_means(ops, seed_amplitude)
    # a dark conjugate simply enters the difference with (near-)zero weight,
    # which is exact for the identity channel; a dark probe means there is no
    # bright scenario to linearize at all
    if abs(a_p) ** 2 < MIN_BRIGHT_FLUX:
        raise DarkBeamError(
            f"output probe flux {abs(a_p) ** 2:.3g} is too dark for the "
            f"linearized photocurrent model (need >= {MIN_BRIGHT_FLUX})"
        )
    th_p, th_c = np.angle(a_p), np.angle(a_c)
    w_p = abs(a_p) / np.sqrt(abs(a_p) ** 2 + abs(a_c) ** 2)
    w_c = abs(a_c) / np.sqrt(abs(a_p) ** 2 + abs(a_c) ** 2)

    n_chunks = (samples + _CHUNK - 1) // _CHUNK
    children = np.random.SeedSequence(rng_seed).spawn(n_chunks)
    total = 0.0
    total_sq = 0.0
    done = 0
    for child in children:
        n = min(_CHUNK, samples - done)
        rng = np.random.default_rng(child)
        xp, pp, xc, pc = _propagate_fluct(ops, rng, n)
        d = (w_p * (np.cos(th_p) * xp + np.sin(th_p) * pp)
             - w_c * (np.cos(th_c) * xc + np.sin(th_c) * pc))
        total += float(d.sum())
        total_sq += float((d * d).sum())
        done += n
    return (total_sq - total * total / samples) / (samples - 1)
