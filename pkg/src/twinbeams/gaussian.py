"""Gaussian (covariance-matrix) representation of multimode optical beams.

Quadrature convention: X = a + a*, P = -i(a - a*), so the vacuum has unit
variance in both quadratures and a coherent state of amplitude alpha has
mean quadratures (2 Re alpha, 2 Im alpha). Mode k occupies slots
(2k, 2k + 1) of the means vector and covariance matrix (xpxp ordering).

All operations are pure: they return new states and never mutate inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Below this mean-field photon flux the bright-beam linearization of
# photocurrent noise is meaningless and noise-factor ops refuse to run.
MIN_BRIGHT_FLUX = 10.0

_ROLES = ("probe", "conjugate", "auxiliary")


class DarkBeamError(ValueError):
    """Raised when a noise factor is requested for a beam with too little
    mean-field power for the linearized photodetection model."""


@dataclass(frozen=True)
class ModeLabel:
    """Identifies one optical mode.

    ``topological_charge`` is bookkeeping for the OAM carried by the beam;
    it never enters the Gaussian dynamics.
    """

    index: int
    role: str = "auxiliary"
    topological_charge: int = 0

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"mode index must be non-negative, got {self.index}")
        if self.role not in _ROLES:
            raise ValueError(f"role must be one of {_ROLES}, got {self.role!r}")


@dataclass(frozen=True)
class SqueezerSpec:
    """Two-mode squeezer parameterized by the probe intensity gain G >= 1."""

    gain: float

    def __post_init__(self):
        if not self.gain >= 1.0:
            raise ValueError(f"squeezer gain must be >= 1, got {self.gain}")


def symplectic_form(n_modes: int) -> np.ndarray:
    """Standard symplectic form in xpxp ordering: blocks [[0, 1], [-1, 0]]."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean quadrature vector plus symmetric covariance matrix over labeled modes.

    Construction validates symmetry and the uncertainty relation
    cov + i*Omega >= 0 (eigenvalues above -1e-9), so any state that exists
    is physical.
    """

    means: np.ndarray
    cov: np.ndarray
    modes: tuple[ModeLabel, ...] = field(default=())

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        cov = np.array(self.cov, dtype=float)
        modes = tuple(self.modes)
        n = len(modes)
        if n == 0:
            raise ValueError("state must contain at least one mode")
        if means.shape != (2 * n,) or cov.shape != (2 * n, 2 * n):
            raise ValueError(
                f"shape mismatch: {n} modes need means (2n,) and cov (2n, 2n), "
                f"got {means.shape} and {cov.shape}"
            )
        indices = [m.index for m in modes]
        if len(set(indices)) != n:
            raise ValueError(f"duplicate mode indices: {indices}")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise ValueError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        herm = cov + 1j * symplectic_form(n)
        lam = np.linalg.eigvalsh(herm)
        if lam.min() < -1e-9:
            raise ValueError(
                f"covariance violates the uncertainty relation "
                f"(min eigenvalue of cov + i*Omega is {lam.min():.3e})"
            )
        means.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "modes", modes)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def position(self, mode: ModeLabel) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise ValueError(f"mode {mode} not present in state") from None

    def mode_slice(self, mode: ModeLabel) -> slice:
        k = self.position(mode)
        return slice(2 * k, 2 * k + 2)


def vacuum_state(n_modes: int, labels: list[ModeLabel] | tuple[ModeLabel, ...]) -> GaussianState:
    """Vacuum of ``n_modes`` modes: zero means, identity covariance."""
    if n_modes < 1:
        raise ValueError(f"need at least one mode, got {n_modes}")
    labels = tuple(labels)
    if len(labels) != n_modes:
        raise ValueError(f"{n_modes} modes but {len(labels)} labels")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes), labels)


def displace(state: GaussianState, mode: ModeLabel, amplitude: complex) -> GaussianState:
    """Displace one mode by a coherent amplitude (units sqrt(photon flux)).

    Shifts the means by (2 Re alpha, 2 Im alpha); covariance unchanged.
    """
    sl = state.mode_slice(mode)
    alpha = complex(amplitude)
    means = state.means.copy()
    means[sl.start] += 2.0 * alpha.real
    means[sl.start + 1] += 2.0 * alpha.imag
    return GaussianState(means, state.cov, state.modes)


def _tms_symplectic(state: GaussianState, probe: ModeLabel, conj: ModeLabel,
                    u: float, v: float) -> np.ndarray:
    n = state.n_modes
    p = 2 * state.position(probe)
    c = 2 * state.position(conj)
    s = np.eye(2 * n)
    s[p, p] = s[p + 1, p + 1] = u
    s[c, c] = s[c + 1, c + 1] = u
    s[p, c] = s[c, p] = v
    s[p + 1, c + 1] = s[c + 1, p + 1] = -v
    return s


def two_mode_squeeze(state: GaussianState, probe: ModeLabel, conj: ModeLabel,
                     spec: SqueezerSpec) -> GaussianState:
    """Apply the two-mode squeezer a_p -> sqrt(G) a_p + sqrt(G-1) a_c*,
    a_c -> sqrt(G) a_c + sqrt(G-1) a_p*.

    Phase convention: both Bogoliubov coefficients real and positive, which
    puts the twin-beam correlation in the amplitude quadratures
    (Cov(X_p, X_c) > 0) and anti-correlation in the phase quadratures.
    """
    if probe == conj:
        raise ValueError("probe and conjugate must be distinct modes")
    g = spec.gain
    s = _tms_symplectic(state, probe, conj, np.sqrt(g), np.sqrt(g - 1.0))
    return GaussianState(s @ state.means, s @ state.cov @ s.T, state.modes)


def beamsplit_loss(state: GaussianState, mode: ModeLabel, eta: float) -> GaussianState:
    """Mix one mode with fresh vacuum at transmissivity eta and trace the
    vacuum out: means *= sqrt(eta), mode block -> eta*block + (1-eta)*I,
    cross blocks *= sqrt(eta)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {eta}")
    sl = state.mode_slice(mode)
    n = state.n_modes
    t = np.eye(2 * n)
    t[sl.start, sl.start] = t[sl.start + 1, sl.start + 1] = np.sqrt(eta)
    cov = t @ state.cov @ t.T
    cov[sl.start, sl.start] += 1.0 - eta
    cov[sl.start + 1, sl.start + 1] += 1.0 - eta
    return GaussianState(t @ state.means, cov, state.modes)


def second_moments(state: GaussianState, mode_i: ModeLabel, mode_j: ModeLabel) -> np.ndarray:
    """2x2 covariance block between two modes (the mode's own block if equal)."""
    si = state.mode_slice(mode_i)
    sj = state.mode_slice(mode_j)
    return np.array(state.cov[si, sj])


def mean_amplitude(state: GaussianState, mode: ModeLabel) -> complex:
    """Coherent amplitude <a> of one mode."""
    sl = state.mode_slice(mode)
    return complex(state.means[sl.start], state.means[sl.start + 1]) / 2.0


def mean_photon_flux(state: GaussianState, mode: ModeLabel) -> float:
    """Mean photon flux <a* a>; exact for Gaussian states."""
    sl = state.mode_slice(mode)
    m = state.means[sl]
    block = state.cov[sl, sl]
    return float(m @ m) / 4.0 + (float(np.trace(block)) - 2.0) / 4.0


def single_beam_nsf(state: GaussianState, mode: ModeLabel) -> float:
    """Amplitude-quadrature noise of one beam relative to its own shot-noise
    limit (1 = SNL). Equals Var(N)/<N> in the linearized model. An empty beam
    reports exactly 1: vacuum is a zero-amplitude coherent state."""
    _, c = _beam_weight_and_direction(state, mode)
    sl = state.mode_slice(mode)
    return float(c @ state.cov[sl, sl] @ c)


def _beam_weight_and_direction(state: GaussianState, mode: ModeLabel):
    """Mean amplitude and phase direction for the linearized photocurrent.

    An exactly empty beam (no mean field and no noise photons, e.g. the
    conjugate of a unit-gain channel) is admitted with zero weight, which is
    exact: the photon number of vacuum does not fluctuate. A beam that is
    dim but carries noise photons has no valid linearization and errors.
    """
    alpha = mean_amplitude(state, mode)
    if abs(alpha) ** 2 >= MIN_BRIGHT_FLUX:
        theta = np.angle(alpha)
        return abs(alpha), np.array([np.cos(theta), np.sin(theta)])
    if mean_photon_flux(state, mode) < 1e-9:
        return 0.0, np.array([1.0, 0.0])
    raise DarkBeamError(
        f"mode {mode.index} has mean-field flux {abs(alpha) ** 2:.3g} < "
        f"{MIN_BRIGHT_FLUX} but is not empty; bright-beam linearization is invalid"
    )


def intensity_difference_nsf(state: GaussianState, probe: ModeLabel,
                             conj: ModeLabel) -> float:
    """Noise scaling factor Var(N_p - N_c) / (<N_p> + <N_c>) of the twin-beam
    intensity difference, via the bright-beam linearization
    dN = |<a>| dX_amp. 1 = shot-noise limit; < 1 means squeezing.
    """
    a_p, c_p = _beam_weight_and_direction(state, probe)
    a_c, c_c = _beam_weight_and_direction(state, conj)
    if a_p == 0.0 and a_c == 0.0:
        raise DarkBeamError("both beams are empty; there is no photocurrent")
    sp = state.mode_slice(probe)
    sc = state.mode_slice(conj)
    v_p = float(c_p @ state.cov[sp, sp] @ c_p)
    v_c = float(c_c @ state.cov[sc, sc] @ c_c)
    cross = float(c_p @ state.cov[sp, sc] @ c_c)
    var = a_p**2 * v_p + a_c**2 * v_c - 2.0 * a_p * a_c * cross
    return var / (a_p**2 + a_c**2)
