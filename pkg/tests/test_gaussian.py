import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeams.gaussian import (
    DarkBeamError,
    GaussianState,
    ModeLabel,
    SqueezerSpec,
    beamsplit_loss,
    displace,
    intensity_difference_nsf,
    mean_amplitude,
    mean_photon_flux,
    second_moments,
    single_beam_nsf,
    symplectic_form,
    two_mode_squeeze,
    vacuum_state,
)

PROBE = ModeLabel(0, "probe", topological_charge=-1)
CONJ = ModeLabel(1, "conjugate", topological_charge=+1)

gains = st.floats(min_value=1.0, max_value=50.0, allow_nan=False)
etas = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
amplitudes = st.complex_numbers(max_magnitude=50.0, allow_nan=False, allow_infinity=False)


def twin_vacuum():
    return vacuum_state(2, [PROBE, CONJ])


def seeded(amplitude=30.0, gain=None):
    state = displace(twin_vacuum(), PROBE, amplitude)
    if gain is not None:
        state = two_mode_squeeze(state, PROBE, CONJ, SqueezerSpec(gain))
    return state


class TestConstruction:
    def test_vacuum_single_mode(self):
        s = vacuum_state(1, [PROBE])
        np.testing.assert_array_equal(s.means, [0.0, 0.0])
        np.testing.assert_array_equal(s.cov, np.eye(2))

    def test_vacuum_two_modes(self):
        s = twin_vacuum()
        np.testing.assert_array_equal(s.cov, np.eye(4))

    def test_zero_modes_rejected(self):
        with pytest.raises(ValueError):
            vacuum_state(0, [])

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            vacuum_state(2, [PROBE, PROBE])

    def test_label_count_mismatch(self):
        with pytest.raises(ValueError):
            vacuum_state(2, [PROBE])

    def test_asymmetric_cov_rejected(self):
        cov = np.eye(2)
        cov[0, 1] = 1e-3
        with pytest.raises(ValueError, match="symmetric"):
            GaussianState(np.zeros(2), cov, (PROBE,))

    def test_unphysical_cov_rejected(self):
        with pytest.raises(ValueError, match="uncertainty"):
            GaussianState(np.zeros(2), 0.25 * np.eye(2), (PROBE,))

    def test_states_are_immutable(self):
        s = twin_vacuum()
        with pytest.raises(ValueError):
            s.means[0] = 1.0

    def test_bad_role_rejected(self):
        with pytest.raises(ValueError):
            ModeLabel(0, "pump")

    def test_squeezer_gain_below_one_rejected(self):
        with pytest.raises(ValueError):
            SqueezerSpec(0.99)


class TestDisplace:
    def test_zero_is_identity(self):
        s = twin_vacuum()
        d = displace(s, PROBE, 0.0)
        np.testing.assert_array_equal(d.means, s.means)

    def test_unit_amplitude_convention(self):
        d = displace(vacuum_state(1, [PROBE]), PROBE, 1.0)
        np.testing.assert_allclose(d.means, [2.0, 0.0])
        np.testing.assert_array_equal(d.cov, np.eye(2))

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="not present"):
            displace(vacuum_state(1, [PROBE]), CONJ, 1.0)

    @given(a=amplitudes, b=amplitudes)
    def test_displacements_compose_additively(self, a, b):
        one = displace(displace(twin_vacuum(), PROBE, a), PROBE, b)
        both = displace(twin_vacuum(), PROBE, a + b)
        np.testing.assert_allclose(one.means, both.means, atol=1e-9)


class TestTwoModeSqueeze:
    def test_unit_gain_is_identity(self):
        s = seeded(5.0)
        out = two_mode_squeeze(s, PROBE, CONJ, SqueezerSpec(1.0))
        np.testing.assert_allclose(out.means, s.means)
        np.testing.assert_allclose(out.cov, s.cov)

    def test_vacuum_variance_2g_minus_1(self):
        out = two_mode_squeeze(twin_vacuum(), PROBE, CONJ, SqueezerSpec(2.0))
        np.testing.assert_allclose(np.diag(out.cov), [3.0, 3.0, 3.0, 3.0])

    def test_mean_propagation(self):
        alpha = 3.0 + 4.0j
        out = two_mode_squeeze(displace(twin_vacuum(), PROBE, alpha),
                               PROBE, CONJ, SqueezerSpec(2.0))
        assert mean_amplitude(out, PROBE) == pytest.approx(np.sqrt(2.0) * alpha)
        assert mean_amplitude(out, CONJ) == pytest.approx(np.conj(alpha))

    def test_same_mode_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            two_mode_squeeze(twin_vacuum(), PROBE, PROBE, SqueezerSpec(2.0))

    @given(g=gains)
    @settings(max_examples=50)
    def test_symplectic_preservation(self, g):
        from twinbeams.gaussian import _tms_symplectic

        s = _tms_symplectic(twin_vacuum(), PROBE, CONJ, np.sqrt(g), np.sqrt(g - 1))
        omega = symplectic_form(2)
        np.testing.assert_allclose(s @ omega @ s.T, omega, atol=1e-12)


class TestBeamsplitLoss:
    def test_full_transmission_is_identity(self):
        s = seeded(4.0, gain=2.0)
        out = beamsplit_loss(s, PROBE, 1.0)
        np.testing.assert_allclose(out.cov, s.cov)
        np.testing.assert_allclose(out.means, s.means)

    def test_zero_transmission_resets_to_vacuum(self):
        s = seeded(4.0, gain=2.0)
        out = beamsplit_loss(s, PROBE, 0.0)
        np.testing.assert_allclose(out.means[:2], [0.0, 0.0])
        np.testing.assert_allclose(second_moments(out, PROBE, PROBE), np.eye(2))

    def test_coherent_stays_coherent(self):
        out = beamsplit_loss(seeded(10.0), PROBE, 0.33)
        assert mean_photon_flux(out, PROBE) == pytest.approx(0.33 * 100.0)
        np.testing.assert_allclose(second_moments(out, PROBE, PROBE), np.eye(2),
                                   atol=1e-12)

    def test_out_of_range_rejected(self):
        for eta in (-0.1, 1.1):
            with pytest.raises(ValueError):
                beamsplit_loss(twin_vacuum(), PROBE, eta)

    @given(g=gains, eta=etas)
    @settings(max_examples=50)
    def test_uncertainty_preserved_by_op_sequences(self, g, eta):
        s = seeded(12.0, gain=g)
        s = beamsplit_loss(s, PROBE, eta)
        s = two_mode_squeeze(s, PROBE, CONJ, SqueezerSpec(1.0 + 0.5 * (g - 1.0)))
        herm = s.cov + 1j * symplectic_form(2)
        assert np.linalg.eigvalsh(herm).min() >= -1e-9


class TestMoments:
    def test_vacuum_flux_zero(self):
        assert mean_photon_flux(twin_vacuum(), PROBE) == pytest.approx(0.0)

    def test_coherent_flux(self):
        s = displace(twin_vacuum(), PROBE, 3.0 - 1.0j)
        assert mean_photon_flux(s, PROBE) == pytest.approx(10.0)

    def test_squeezed_vacuum_flux_g_minus_1(self):
        out = two_mode_squeeze(twin_vacuum(), PROBE, CONJ, SqueezerSpec(2.0))
        assert mean_photon_flux(out, PROBE) == pytest.approx(1.0)
        assert mean_photon_flux(out, CONJ) == pytest.approx(1.0)

    def test_cross_block_of_squeezer(self):
        g = 2.0
        out = two_mode_squeeze(twin_vacuum(), PROBE, CONJ, SqueezerSpec(g))
        expected = 2.0 * np.sqrt(g * (g - 1.0)) * np.diag([1.0, -1.0])
        np.testing.assert_allclose(second_moments(out, PROBE, CONJ), expected)


class TestIntensityDifferenceNSF:
    @pytest.mark.parametrize("g", [1.0, 1.5, 2.0, 5.0, 57.6 / 9.2])
    def test_squeezing_law(self, g):
        nsf = intensity_difference_nsf(seeded(30.0, gain=g), PROBE, CONJ)
        assert nsf == pytest.approx(1.0 / (2.0 * g - 1.0), abs=1e-9)

    def test_ideal_g2_value(self):
        # frozen from the Monte-Carlo fluctuation oracle (test_montecarlo)
        nsf = intensity_difference_nsf(seeded(30.0, gain=2.0), PROBE, CONJ)
        assert nsf == pytest.approx(1.0 / 3.0, abs=1e-9)

    def test_paper_gain_value(self):
        g = 57.6 / 9.2
        nsf = intensity_difference_nsf(seeded(30.0, gain=g), PROBE, CONJ)
        assert nsf == pytest.approx(1.0 / 11.52173913, abs=1e-8)
        assert 10 * np.log10(nsf) == pytest.approx(-10.615, abs=2e-3)

    def test_two_independent_coherent_beams_at_snl(self):
        s = displace(displace(twin_vacuum(), PROBE, 20.0), CONJ, 10.0)
        assert intensity_difference_nsf(s, PROBE, CONJ) == pytest.approx(1.0)

    def test_dim_noisy_beam_rejected(self):
        # conjugate carries spontaneous photons but almost no mean field
        s = two_mode_squeeze(displace(twin_vacuum(), PROBE, 1.0),
                             PROBE, CONJ, SqueezerSpec(5.0))
        s = displace(s, PROBE, 30.0)
        with pytest.raises(DarkBeamError):
            intensity_difference_nsf(s, PROBE, CONJ)

    def test_fully_dark_pair_rejected(self):
        with pytest.raises(DarkBeamError):
            intensity_difference_nsf(twin_vacuum(), PROBE, CONJ)

    def test_empty_conjugate_allowed_at_unit_gain(self):
        s = seeded(30.0, gain=1.0)
        assert intensity_difference_nsf(s, PROBE, CONJ) == pytest.approx(1.0)

    @given(phase=st.floats(min_value=-np.pi, max_value=np.pi, allow_nan=False),
           g=gains)
    @settings(max_examples=40)
    def test_law_is_seed_phase_invariant(self, phase, g):
        alpha = 30.0 * np.exp(1j * phase)
        nsf = intensity_difference_nsf(seeded(alpha, gain=g), PROBE, CONJ)
        assert nsf == pytest.approx(1.0 / (2.0 * g - 1.0), abs=1e-9)


class TestNoiseLaws:
    @pytest.mark.parametrize("g", [1.5, 2.0, 6.26])
    def test_individual_beam_noise_lossless(self, g):
        s = seeded(30.0, gain=g)
        assert single_beam_nsf(s, PROBE) == pytest.approx(2.0 * g - 1.0, abs=1e-9)
        assert single_beam_nsf(s, CONJ) == pytest.approx(2.0 * g - 1.0, abs=1e-9)

    @pytest.mark.parametrize("g,eta", [(2.0, 0.3), (5.0, 0.9), (6.26, 0.741)])
    def test_individual_beam_noise_after_loss(self, g, eta):
        s = beamsplit_loss(seeded(30.0, gain=g), PROBE, eta)
        expected = eta * (2.0 * g - 1.0) + (1.0 - eta)
        assert single_beam_nsf(s, PROBE) == pytest.approx(expected, abs=1e-9)

    @given(g=st.floats(min_value=1.05, max_value=30.0),
           eta=st.floats(min_value=0.05, max_value=1.0))
    @settings(max_examples=50)
    def test_balanced_loss_law(self, g, eta):
        s = seeded(500.0, gain=g)
        s = beamsplit_loss(s, PROBE, eta)
        s = beamsplit_loss(s, CONJ, eta)
        law = eta / (2.0 * g - 1.0) + (1.0 - eta)
        assert intensity_difference_nsf(s, PROBE, CONJ) == pytest.approx(law, abs=1e-9)

    @given(g=gains)
    @settings(max_examples=50)
    def test_lossless_photon_number_difference_conserved(self, g):
        s = seeded(30.0, gain=g)
        g_p = mean_photon_flux(s, PROBE) / 900.0
        g_c = mean_photon_flux(s, CONJ) / 900.0
        # spontaneous flux contributes G-1 to each beam equally
        assert g_p - g_c == pytest.approx(1.0, abs=1e-9)
