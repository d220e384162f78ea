"""Vapor-cell channel models: ideal amplifier, lumped gain + loss, and a
distributed gain/loss cascade, plus inversion of those models from measured
gain pairs.

Gains are defined strictly as output power over seed power, so an ideal
amplifier of gain G has the pair (G, G - 1) and their difference is exactly
one photon per seed photon.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .gaussian import (
    GaussianState,
    ModeLabel,
    SqueezerSpec,
    beamsplit_loss,
    displace,
    intensity_difference_nsf,
    two_mode_squeeze,
    vacuum_state,
)

LOSS_BEFORE_GAIN = "loss_before_gain"
LOSS_AFTER_GAIN = "loss_after_gain"

FAMILIES = ("ideal", "lumped_before", "lumped_after", "cascade")

# Seed flux used when a fit needs a noise figure; the linearized NSF of any
# channel here is independent of the seed brightness.
_FIT_SEED = 200.0


@dataclass(frozen=True)
class GainPair:
    """Measured or modeled power gains of the twin beams."""

    g_p: float
    g_c: float

    def __post_init__(self):
        if self.g_p < 0.0 or self.g_c < 0.0:
            raise ValueError(f"gains must be non-negative, got {self}")

    @property
    def total(self) -> float:
        return self.g_p + self.g_c

    @property
    def difference(self) -> float:
        return self.g_p - self.g_c


@dataclass(frozen=True)
class LumpedChannelSpec:
    """FWM medium as one squeezer with lumped per-beam transmissions.

    ``loss_before_gain`` attenuates the seeded probe ahead of the squeezer
    (loss on the still-vacuum conjugate is a no-op); ``loss_after_gain``
    attenuates both outputs.
    """

    gain: float
    eta_probe: float = 1.0
    eta_conj: float = 1.0
    placement: str = LOSS_AFTER_GAIN

    def __post_init__(self):
        if not self.gain >= 1.0:
            raise ValueError(f"gain must be >= 1, got {self.gain}")
        for name in ("eta_probe", "eta_conj"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {eta}")
        if self.placement not in (LOSS_BEFORE_GAIN, LOSS_AFTER_GAIN):
            raise ValueError(f"unknown placement {self.placement!r}")


@dataclass(frozen=True)
class CascadeSpec:
    """Distributed medium: ``steps`` slices, each an infinitesimal two-mode
    squeezer interleaved with infinitesimal per-beam absorption.

    ``gamma_total`` is the integrated gain exponent (the squeeze parameter of
    the zero-loss limit, total gain cosh(gamma)^2); the alphas are integrated
    absorption exponents (zero-gain transmissions exp(-alpha)). Slices use a
    symmetric split (half loss, squeeze, half loss) so refining ``steps``
    converges at second order.
    """

    gamma_total: float
    alpha_probe_total: float = 0.0
    alpha_conj_total: float = 0.0
    steps: int = 800

    def __post_init__(self):
        if self.gamma_total < 0.0:
            raise ValueError(f"gamma_total must be >= 0, got {self.gamma_total}")
        if self.alpha_probe_total < 0.0 or self.alpha_conj_total < 0.0:
            raise ValueError("absorption exponents must be >= 0")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")


ChannelSpec = LumpedChannelSpec | CascadeSpec


@dataclass(frozen=True)
class FitResult:
    """Outcome of a channel fit. ``converged`` is False when the target lies
    outside the family's reachable set; the spec and residual are still the
    best found, never silently discarded."""

    spec: ChannelSpec
    residual: float
    converged: bool
    family: str


def apply_lumped_channel(state: GaussianState, probe: ModeLabel, conj: ModeLabel,
                         spec: LumpedChannelSpec) -> GaussianState:
    if spec.placement == LOSS_BEFORE_GAIN:
        state = beamsplit_loss(state, probe, spec.eta_probe)
        state = beamsplit_loss(state, conj, spec.eta_conj)
        return two_mode_squeeze(state, probe, conj, SqueezerSpec(spec.gain))
    state = two_mode_squeeze(state, probe, conj, SqueezerSpec(spec.gain))
    state = beamsplit_loss(state, probe, spec.eta_probe)
    return beamsplit_loss(state, conj, spec.eta_conj)


def _cascade_step_maps(state: GaussianState, probe: ModeLabel, conj: ModeLabel,
                       spec: CascadeSpec):
    """Per-slice maps: symplectic of the slice squeezer plus the transmission
    matrix and additive noise of a half-slice of absorption."""
    n = state.n_modes
    r = spec.gamma_total / spec.steps
    u, v = np.cosh(r), np.sinh(r)
    p = 2 * state.position(probe)
    c = 2 * state.position(conj)
    s = np.eye(2 * n)
    s[p, p] = s[p + 1, p + 1] = u
    s[c, c] = s[c + 1, c + 1] = u
    s[p, c] = s[c, p] = v
    s[p + 1, c + 1] = s[c + 1, p + 1] = -v
    t_p = np.exp(-spec.alpha_probe_total / (2.0 * spec.steps))
    t_c = np.exp(-spec.alpha_conj_total / (2.0 * spec.steps))
    t_half = np.eye(2 * n)
    t_half[p, p] = t_half[p + 1, p + 1] = np.sqrt(t_p)
    t_half[c, c] = t_half[c + 1, c + 1] = np.sqrt(t_c)
    add_half = np.zeros(2 * n)
    add_half[p] = add_half[p + 1] = 1.0 - t_p
    add_half[c] = add_half[c + 1] = 1.0 - t_c
    return s, t_half, np.diag(add_half)


def apply_cascade(state: GaussianState, probe: ModeLabel, conj: ModeLabel,
                  spec: CascadeSpec) -> GaussianState:
    s, t_half, add_half = _cascade_step_maps(state, probe, conj, spec)
    # one slice maps (means, cov) -> (E m, E V E^T + N); slices compose as
    # (E2 E1, E2 Q1 E2^T + Q2), so `steps` slices follow by binary doubling
    step_e = t_half @ s @ t_half
    step_n = t_half @ s @ add_half @ s.T @ t_half + add_half
    total_e = np.eye(2 * state.n_modes)
    total_n = np.zeros_like(total_e)
    m = spec.steps
    while m:
        if m & 1:
            total_e = step_e @ total_e
            total_n = step_e @ total_n @ step_e.T + step_n
        m >>= 1
        if m:
            step_e, step_n = step_e @ step_e, step_e @ step_n @ step_e.T + step_n
    means = total_e @ state.means
    cov = total_e @ state.cov @ total_e.T + total_n
    return GaussianState(means, cov, state.modes)


def apply_channel(state: GaussianState, probe: ModeLabel, conj: ModeLabel,
                  spec: ChannelSpec) -> GaussianState:
    if isinstance(spec, LumpedChannelSpec):
        return apply_lumped_channel(state, probe, conj, spec)
    if isinstance(spec, CascadeSpec):
        return apply_cascade(state, probe, conj, spec)
    raise TypeError(f"unsupported channel spec {type(spec).__name__}")


def channel_gains(spec: ChannelSpec) -> GainPair:
    """Power gains of a unit coherent seed through the channel means."""
    if isinstance(spec, LumpedChannelSpec):
        if spec.placement == LOSS_BEFORE_GAIN:
            return GainPair(spec.eta_probe * spec.gain,
                            spec.eta_probe * (spec.gain - 1.0))
        return GainPair(spec.eta_probe * spec.gain,
                        spec.eta_conj * (spec.gain - 1.0))
    if isinstance(spec, CascadeSpec):
        # amplitude map per slice on (A_p, A_c*) is constant, so the whole
        # cascade is a matrix power
        r = spec.gamma_total / spec.steps
        sq = np.array([[np.cosh(r), np.sinh(r)], [np.sinh(r), np.cosh(r)]])
        half = np.diag([np.exp(-spec.alpha_probe_total / (4.0 * spec.steps)),
                        np.exp(-spec.alpha_conj_total / (4.0 * spec.steps))])
        step = half @ sq @ half
        total = np.linalg.matrix_power(step, spec.steps)
        a_p, a_c = total @ np.array([1.0, 0.0])
        return GainPair(a_p**2, a_c**2)
    raise TypeError(f"unsupported channel spec {type(spec).__name__}")


def _twin_labels() -> tuple[ModeLabel, ModeLabel]:
    return ModeLabel(0, "probe"), ModeLabel(1, "conjugate")


def channel_nsf(spec: ChannelSpec, seed_amplitude: complex = _FIT_SEED) -> float:
    """Intensity-difference NSF of a coherent-seeded run through the channel."""
    probe, conj = _twin_labels()
    state = displace(vacuum_state(2, [probe, conj]), probe, seed_amplitude)
    out = apply_channel(state, probe, conj, spec)
    return intensity_difference_nsf(out, probe, conj)


def fit_balanced_efficiency(gain: float, target_nsf: float) -> float:
    """Transmission eta of equal loss on both beams that maps the ideal
    squeezing 1/(2G-1) onto ``target_nsf`` (both in linear units)."""
    if not gain > 1.0:
        raise ValueError(f"need gain > 1, got {gain}")
    ideal = 1.0 / (2.0 * gain - 1.0)
    if not ideal < target_nsf < 1.0:
        raise ValueError(
            f"target NSF {target_nsf} not reachable by balanced loss on an "
            f"ideal G={gain} channel (ideal NSF {ideal:.4g})"
        )
    return (1.0 - target_nsf) / (1.0 - ideal)


def _relative_residual(achieved: float, target: float) -> float:
    scale = abs(target) if abs(target) > 1e-12 else 1.0
    return (achieved - target) / scale


def _gain_residual(spec: ChannelSpec, target: GainPair,
                   target_nsf: float | None) -> float:
    got = channel_gains(spec)
    res = (_relative_residual(got.g_p, target.g_p) ** 2
           + _relative_residual(got.g_c, target.g_c) ** 2)
    if target_nsf is not None:
        res += _relative_residual(channel_nsf(spec), target_nsf) ** 2
    return res


def _simplex(objective, x0: np.ndarray):
    return minimize(objective, x0, method="Nelder-Mead",
                    options=dict(xatol=1e-12, fatol=1e-18,
                                 maxiter=6000, maxfev=6000))


def _fit_ideal(target: GainPair, target_nsf: float | None) -> FitResult:
    # least squares over G of the two relative gain residuals is quadratic
    wp, wc = 1.0 / max(target.g_p, 1e-12) ** 2, 1.0 / max(target.g_c, 1e-12) ** 2
    g = (wp * target.g_p + wc * (1.0 + target.g_c)) / (wp + wc)
    g = max(g, 1.0)
    spec = LumpedChannelSpec(g)
    res = _gain_residual(spec, target, target_nsf)
    return FitResult(spec, res, res < 1e-6, "ideal")


def _lumped_before_closed_form(target: GainPair) -> tuple[float, float]:
    """Invert g_p = eta*G, g_c = eta*(G-1): G = g_p/(g_p-g_c), eta = g_p-g_c."""
    diff = target.difference
    if diff <= 0.0:
        return 1.0, min(1.0, max(target.g_p, 1e-6))
    g = target.g_p / diff
    eta = diff
    return max(g, 1.0), min(eta, 1.0)


def _fit_lumped_before(target: GainPair, target_nsf: float | None) -> FitResult:
    g0, eta0 = _lumped_before_closed_form(target)
    spec = LumpedChannelSpec(g0, eta_probe=eta0, placement=LOSS_BEFORE_GAIN)
    res = _gain_residual(spec, target, target_nsf)
    if res >= 1e-6:
        # target outside the closed-form image (or an NSF target this
        # two-parameter family cannot move independently): polish by simplex
        def objective(x):
            gain = 1.0 + np.exp(x[0])
            eta = 1.0 / (1.0 + np.exp(-x[1]))
            return _gain_residual(
                LumpedChannelSpec(gain, eta_probe=eta, placement=LOSS_BEFORE_GAIN),
                target, target_nsf)

        x0 = np.array([np.log(max(g0 - 1.0, 1e-6)),
                       np.log(eta0 / max(1.0 - eta0, 1e-9))])
        opt = _simplex(objective, x0)
        gain = 1.0 + np.exp(opt.x[0])
        eta = 1.0 / (1.0 + np.exp(-opt.x[1]))
        cand = LumpedChannelSpec(gain, eta_probe=eta, placement=LOSS_BEFORE_GAIN)
        if opt.fun < res:
            spec, res = cand, float(opt.fun)
    return FitResult(spec, res, res < 1e-6, "lumped_before")


def _fit_lumped_after(target: GainPair, target_nsf: float | None) -> FitResult:
    # with no NSF target the family is underdetermined; fix eta_conj = 1
    g0 = max(1.0 + target.g_c, 1.0 + 1e-9)
    eta_p0 = min(target.g_p / g0, 1.0)
    if target_nsf is None:
        spec = LumpedChannelSpec(g0, eta_probe=eta_p0, eta_conj=1.0)
        res = _gain_residual(spec, target, None)
        return FitResult(spec, res, res < 1e-6, "lumped_after")

    def objective(x):
        gain = 1.0 + np.exp(x[0])
        eta_p = 1.0 / (1.0 + np.exp(-x[1]))
        eta_c = 1.0 / (1.0 + np.exp(-x[2]))
        return _gain_residual(LumpedChannelSpec(gain, eta_p, eta_c),
                              target, target_nsf)

    x0 = np.array([np.log(max(g0 - 1.0, 1e-6)),
                   np.log(max(eta_p0, 1e-6) / max(1.0 - eta_p0, 1e-6)),
                   np.log(0.9 / 0.1)])
    opt = _simplex(objective, x0)
    spec = LumpedChannelSpec(1.0 + np.exp(opt.x[0]),
                             1.0 / (1.0 + np.exp(-opt.x[1])),
                             1.0 / (1.0 + np.exp(-opt.x[2])))
    return FitResult(spec, float(opt.fun), opt.fun < 1e-6, "lumped_after")


def _fit_cascade(target: GainPair, target_nsf: float | None, steps: int) -> FitResult:
    g0, eta0 = _lumped_before_closed_form(target)
    gamma0 = float(np.arccosh(np.sqrt(g0)))
    alpha0 = float(-np.log(max(eta0, 1e-9)))

    if target_nsf is None:
        # underdetermined with three parameters and two targets: pin the
        # conjugate absorption to zero
        def objective(x):
            spec = CascadeSpec(np.exp(x[0]), np.exp(x[1]), 0.0, steps)
            return _gain_residual(spec, target, None)

        x0 = np.array([np.log(max(gamma0, 1e-4)), np.log(max(alpha0, 1e-4))])
        opt = _simplex(objective, x0)
        spec = CascadeSpec(float(np.exp(opt.x[0])), float(np.exp(opt.x[1])),
                           0.0, steps)
        return FitResult(spec, float(opt.fun), opt.fun < 1e-6, "cascade")

    def objective(x):
        spec = CascadeSpec(np.exp(x[0]), np.exp(x[1]), np.exp(x[2]), steps)
        return _gain_residual(spec, target, target_nsf)

    best = None
    # a couple of deterministic starts; ties broken by smaller total absorption
    for ac0 in (0.05, 1.0):
        x0 = np.array([np.log(max(gamma0, 1e-4)), np.log(max(alpha0, 1e-4)),
                       np.log(ac0)])
        opt = _simplex(objective, x0)
        key = (round(float(opt.fun), 12), float(np.exp(opt.x[1]) + np.exp(opt.x[2])))
        if best is None or key < best[0]:
            best = (key, opt)
    opt = best[1]
    spec = CascadeSpec(float(np.exp(opt.x[0])), float(np.exp(opt.x[1])),
                       float(np.exp(opt.x[2])), steps)
    return FitResult(spec, float(opt.fun), opt.fun < 1e-6, "cascade")


def fit_channel(target: GainPair, family: str, target_nsf: float | None = None,
                steps: int = 800) -> FitResult:
    """Invert a channel family from a measured gain pair.

    Initialization is the closed-form lumped inversion, refined by a
    derivative-free simplex search on squared relative residuals, so the
    result is deterministic. ``target_nsf`` (linear) resolves the extra
    degree of freedom of the underdetermined families; without it the
    cascade pins alpha_conj = 0 and the lumped loss-after family pins
    eta_conj = 1. Unreachable targets come back flagged
    (``converged=False``), never silently.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    if family == "ideal":
        return _fit_ideal(target, target_nsf)
    if family == "lumped_before":
        return _fit_lumped_before(target, target_nsf)
    if family == "lumped_after":
        return _fit_lumped_after(target, target_nsf)
    return _fit_cascade(target, target_nsf, steps)


def refined(spec: CascadeSpec, factor: int = 2) -> CascadeSpec:
    """Same cascade with ``factor`` times more slices (convergence checks)."""
    return replace(spec, steps=spec.steps * factor)
