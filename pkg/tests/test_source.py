"""SPDC source tests: pump spectrum, JSA scale, pair probability, baseline state.

Frozen references (pair probability, calibrated power, windowed Schmidt
sums) come from standalone oracle scripts run before the module was
implemented.
"""

import numpy as np
import pytest

from sfgswap import dispersion as dp
from sfgswap import quantum_state as qs
from sfgswap import source as src
from sfgswap.errors import ConfigurationError
from sfgswap.phasematch import CrystalParams

MODELS = dp.load_sellmeier()
CRYSTAL = CrystalParams(length_um=500.0, poling_period_um=8.33)
PUMP = src.PumpParams(
    p_avg_w=1.380, rep_rate_hz=1e9, sigma_p_rad_per_ps=7.7245, omega_p_rad_per_fs=4.651
)
CONSTS = src.SourceConstants()

OMEGA_S, OMEGA_I = 3.090, 1.561

# frozen oracle anchors
PAIR_PROBABILITY_DESIGN = 0.100921      # at 1.380 W, +-1.0 rad/fs (validity-capped window)
POWER_FOR_TENTH = 1.3674                # W giving pair probability 0.100 on that window
SCHMIDT_SQ_NARROW_TABLE = 46.303        # (sum s)^2, +-0.2272 rad/fs, 4.544e-3 spacing
SCHMIDT_SQ_NARROW_FINE = 46.111         # same window, 1.515e-3 spacing
RIDGE_SIGNAL = 3.086363                 # slowness-matched central pair [rad/fs]
RIDGE_IDLER = 1.564637
CAPPED_HALF_EXTENT = 1.031532           # dispersion-validity cap at the ridge center
CAPPED_HALF_EXTENT_TABLE = 1.027895     # same cap at the nominal (1.561, 3.090) centers


def wide_grids(half=1.0, spacing=1.5e-3):
    gi = src.FrequencyGrid.centered(OMEGA_I, half, 2 * int(half / spacing) + 1)
    gs = src.FrequencyGrid.centered(OMEGA_S, half, 2 * int(half / spacing) + 1)
    return gi, gs


def small_grids(half=0.02, count=13):
    gi = src.FrequencyGrid.centered(OMEGA_I, half, count)
    gs = src.FrequencyGrid.centered(OMEGA_S, half, count)
    return gi, gs


class TestPumpAmplitude:
    def test_peak_value(self):
        w = PUMP.omega_p_rad_per_fs
        sig = PUMP.sigma_p_rad_per_fs
        expected = np.sqrt(
            1.380e-15 / (1.054571817e-19 * w * sig * np.sqrt(np.pi) * 1e-6)
        )
        assert src.pump_amplitude(PUMP, w) == pytest.approx(expected, rel=1e-12)

    def test_tail_is_negligible_at_six_sigma(self):
        w = PUMP.omega_p_rad_per_fs
        sig = PUMP.sigma_p_rad_per_fs
        ratio = (
            src.pump_amplitude(PUMP, w + 6 * sig) / src.pump_amplitude(PUMP, w)
        ) ** 2
        assert ratio < 1e-15

    def test_modulus_squared_integrates_to_photon_number(self):
        # photons per pulse = P_avg / (hbar wbar R_R) up to O(sigma^2/w^2)
        w = PUMP.omega_p_rad_per_fs
        sig = PUMP.sigma_p_rad_per_fs
        grid = np.linspace(w - 8 * sig, w + 8 * sig, 20001)
        number = np.trapezoid(np.abs(src.pump_amplitude(PUMP, grid)) ** 2, grid)
        expected = 1.380e-15 / (1.054571817e-19 * w * 1e-6)
        assert number == pytest.approx(expected, rel=1e-5)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            src.pump_amplitude(PUMP, 0.0)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            src.PumpParams(p_avg_w=-1.0, rep_rate_hz=1e9, sigma_p_rad_per_ps=7.7, omega_p_rad_per_fs=4.6)
        with pytest.raises(ValueError):
            src.PumpParams(p_avg_w=1.0, rep_rate_hz=0.0, sigma_p_rad_per_ps=7.7, omega_p_rad_per_fs=4.6)


class TestSourceJsa:
    def test_ridge_top_is_flat_near_central_frequencies(self):
        # the intensity ridge is nearly flat: the argmax sits slightly
        # toward degeneracy (field scales grow like sqrt(w_s w_i)) but
        # exceeds the central-cell intensity by only ~1%
        gi = src.FrequencyGrid.centered(OMEGA_I, 0.2, 801)
        gs = src.FrequencyGrid.centered(OMEGA_S, 0.2, 801)
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        intensity = np.abs(jsa.amplitude) ** 2
        j, k = np.unravel_index(np.argmax(intensity), intensity.shape)
        assert gi.values[j] == pytest.approx(1.62050, abs=2 * gi.spacing)
        assert gs.values[k] == pytest.approx(3.03100, abs=2 * gs.spacing)
        central = intensity[400, 400]
        assert intensity[j, k] / central == pytest.approx(1.0126, abs=0.005)

    def test_pump_band_tails_are_exactly_zero(self):
        gi, gs = small_grids(half=0.06, count=25)
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        w_p = gi.values[:, None] + gs.values[None, :]
        outside = np.abs(w_p - PUMP.omega_p_rad_per_fs) > 6 * PUMP.sigma_p_rad_per_fs
        assert outside.any()
        assert np.all(jsa.amplitude[outside] == 0)
        assert np.any(jsa.amplitude[~outside] != 0)

    def test_energy_anticorrelation(self):
        # pump envelope suppresses cells far from the energy-conserving ridge
        gi, gs = small_grids(half=0.06, count=25)
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        mags = np.abs(jsa.amplitude)
        corner = mags[-1, -1]  # both detuned up: sum detuning 0.12 >> sigma_p
        assert corner < 1e-6 * mags.max()

    def test_zero_power_gives_zero_amplitude(self):
        quiet = src.PumpParams(
            p_avg_w=0.0, rep_rate_hz=1e9, sigma_p_rad_per_ps=7.7245, omega_p_rad_per_fs=4.651
        )
        gi, gs = small_grids()
        jsa = src.source_jsa(CRYSTAL, quiet, CONSTS, gi, gs, models=MODELS)
        assert np.all(jsa.amplitude == 0)

    def test_coarse_grid_rejected(self):
        gi = src.FrequencyGrid.centered(OMEGA_I, 0.5, 5)   # spacing 0.25 >> bandwidth
        gs = src.FrequencyGrid.centered(OMEGA_S, 0.02, 41)
        with pytest.raises(ConfigurationError, match="spacing"):
            src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)

    def test_amplitude_linear_in_field_scale(self):
        # pair probability scales linearly with average power
        gi, gs = small_grids()
        double = src.PumpParams(
            p_avg_w=2.760, rep_rate_hz=1e9, sigma_p_rad_per_ps=7.7245, omega_p_rad_per_fs=4.651
        )
        a1 = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS).amplitude
        a2 = src.source_jsa(CRYSTAL, double, CONSTS, gi, gs, models=MODELS).amplitude
        assert np.allclose(a2, np.sqrt(2) * a1, rtol=1e-12)


class TestPairProbability:
    def test_design_point_value(self):
        gi, gs = wide_grids()
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        assert src.pair_probability(jsa) == pytest.approx(PAIR_PROBABILITY_DESIGN, rel=2e-3)

    def test_calibration_hits_target(self):
        gi, gs = wide_grids(half=1.0, spacing=3e-3)
        power = src.calibrate_pump_power(0.1, CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        assert power == pytest.approx(POWER_FOR_TENTH, rel=5e-3)
        assert power == pytest.approx(1.380, rel=0.20)  # design value within 20%
        tuned = src.PumpParams(
            p_avg_w=power, rep_rate_hz=1e9, sigma_p_rad_per_ps=7.7245, omega_p_rad_per_fs=4.651
        )
        jsa = src.source_jsa(CRYSTAL, tuned, CONSTS, gi, gs, models=MODELS)
        assert src.pair_probability(jsa) == pytest.approx(0.1, rel=1e-10)

    def test_calibration_domain(self):
        gi, gs = small_grids()
        with pytest.raises(ValueError):
            src.calibrate_pump_power(1.5, CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        assert src.calibrate_pump_power(0.0, CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS) == 0.0


class TestSchmidtStructure:
    def test_windowed_schmidt_sum_table_spacing(self):
        gi = src.FrequencyGrid.centered(OMEGA_I, 0.2272, 101)
        gs = src.FrequencyGrid.centered(OMEGA_S, 0.2272, 101)
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        s2 = float(src.schmidt_coefficients(jsa).sum() ** 2)
        assert s2 == pytest.approx(SCHMIDT_SQ_NARROW_TABLE, rel=1e-3)

    def test_windowed_schmidt_sum_fine_spacing(self):
        gi = src.FrequencyGrid.centered(OMEGA_I, 0.2272, 301)
        gs = src.FrequencyGrid.centered(OMEGA_S, 0.2272, 301)
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        s2 = float(src.schmidt_coefficients(jsa).sum() ** 2)
        assert s2 == pytest.approx(SCHMIDT_SQ_NARROW_FINE, rel=2e-3)

    def test_schmidt_sum_grows_with_window(self):
        sums = []
        for half, count in ((0.15, 67), (0.2272, 101), (0.30, 133)):
            gi = src.FrequencyGrid.centered(OMEGA_I, half, count)
            gs = src.FrequencyGrid.centered(OMEGA_S, half, count)
            jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
            sums.append(src.schmidt_coefficients(jsa).sum())
        assert sums[0] < sums[1] < sums[2]


class TestBaselineState:
    def test_incoherent_purity_closed_form(self):
        gi, gs = small_grids()
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        for eta in (0.1, 0.5, 1.0):
            metrics = src.source_baseline_metrics(jsa, eta)
            assert metrics["purity"] == pytest.approx((1 - eta) ** 2 + eta**2, abs=0)

    def test_metrics_match_materialized_matrix(self):
        """Closed-form Schmidt route vs explicit matrix + generic negativity."""
        gi, gs = small_grids(half=0.03, count=10)
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        for eta, coherent in ((0.1, False), (0.6, False), (0.1, True), (0.6, True)):
            metrics = src.source_baseline_metrics(jsa, eta, coherent=coherent)
            rho = src.source_density_matrix(jsa, eta, coherent=coherent)
            assert rho.trace == pytest.approx(1.0, abs=1e-12)
            assert qs.negativity(rho) == pytest.approx(metrics["negativity"], abs=1e-9)
            assert qs.purity(rho) == pytest.approx(metrics["purity"], abs=1e-12)

    def test_eta_domain(self):
        gi, gs = small_grids()
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        with pytest.raises(ValueError):
            src.source_baseline_metrics(jsa, 1.5)

    def test_coherent_baseline_is_pure(self):
        gi, gs = small_grids()
        jsa = src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)
        rho = src.source_density_matrix(jsa, 0.3, coherent=True)
        assert qs.purity(rho) == pytest.approx(1.0, abs=1e-12)


class TestSupportProbe:
    def test_default_extent_hits_validity_cap(self):
        # the 1e-4-of-peak support still exceeds the dispersion-data
        # window, so the returned extent is the validity cap
        half_i, half_s = src.intensity_extent(
            CRYSTAL, PUMP, CONSTS, threshold=1e-4, centers=(OMEGA_I, OMEGA_S), models=MODELS
        )
        assert half_i == pytest.approx(CAPPED_HALF_EXTENT_TABLE, abs=2e-3)
        assert half_i == half_s
        # grids built from the extent evaluate without range errors
        gi = src.FrequencyGrid.centered(OMEGA_I, half_i, 459)
        gs = src.FrequencyGrid.centered(OMEGA_S, half_i, 459)
        src.source_jsa(CRYSTAL, PUMP, CONSTS, gi, gs, models=MODELS)

    def test_extent_shrinks_with_threshold(self):
        wide, _ = src.intensity_extent(CRYSTAL, PUMP, CONSTS, threshold=1e-4, models=MODELS)
        mid, _ = src.intensity_extent(CRYSTAL, PUMP, CONSTS, threshold=1e-2, models=MODELS)
        narrow, _ = src.intensity_extent(CRYSTAL, PUMP, CONSTS, threshold=0.5, models=MODELS)
        assert narrow < mid < wide

    def test_validity_cap_value(self):
        cap = src.validity_capped_half_extent(RIDGE_IDLER, RIDGE_SIGNAL, MODELS)
        assert cap == pytest.approx(CAPPED_HALF_EXTENT, abs=1e-6)

    def test_design_pair_is_slowness_matched_near_table_values(self):
        ws, wi = src._design_pair(CRYSTAL, 4.651, MODELS)
        assert ws == pytest.approx(RIDGE_SIGNAL, abs=1e-5)
        assert wi == pytest.approx(RIDGE_IDLER, abs=1e-5)
        # within half a percent of the nominal operating pair
        assert ws == pytest.approx(OMEGA_S, rel=2e-3)
        assert wi == pytest.approx(OMEGA_I, rel=3e-3)
        gap = dp.group_slowness(MODELS["y"], ws) - dp.group_slowness(MODELS["z"], wi)
        assert abs(gap) < 1e-9


class TestFrequencyGrid:
    def test_centered_constructor(self):
        g = src.FrequencyGrid.centered(2.0, 0.5, 11)
        assert g.values[0] == pytest.approx(1.5)
        assert g.values[-1] == pytest.approx(2.5)
        assert g.center == pytest.approx(2.0)

    def test_contains(self):
        g = src.FrequencyGrid.centered(2.0, 0.5, 11)
        assert g.contains(1.6, 2.4)
        assert not g.contains(1.4, 2.4)

    def test_validation(self):
        with pytest.raises(ValueError):
            src.FrequencyGrid(start=1.0, spacing=0.0, count=5)
        with pytest.raises(ValueError):
            src.FrequencyGrid(start=1.0, spacing=0.1, count=1)

    def test_jsa_shape_checked(self):
        gi, gs = small_grids()
        with pytest.raises(ValueError):
            src.Jsa(grid_i=gi, grid_s=gs, amplitude=np.zeros((3, 3), dtype=complex))
