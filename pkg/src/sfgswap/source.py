"""SPDC source model: pump spectrum, joint spectral amplitude, pair probability.

The source is a periodically poled KTP waveguide pumped by a pulsed
Gaussian pump.  The joint spectral amplitude (JSA) carries all physical
constants, so the squared quadrature of the amplitude is directly the
photon-pair creation probability per pulse.  The vacuum-mixed source
density matrix used for baseline purity/negativity figures is built in
:mod:`sfgswap.quantum_state`; the analytic Schmidt-based shortcut for
large grids lives here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import (
    C_UM_PER_FS,
    EPS0_C_PER_V_UM,
    HBAR_J_FS,
    TWO_PI,
    ghz_to_per_fs,
    pm_per_volt_to_um_per_volt,
    rad_per_ps_to_rad_per_fs,
    watt_to_joule_per_fs,
)
from . import dispersion
from .errors import ConfigurationError
from .phasematch import KAPPA_DESIGN, delta_k, pm_sinc, sigma_pi

# composite vertex constant b = eps0 / (2 hbar (2 pi)^3)
B_VERTEX = EPS0_C_PER_V_UM / (2 * HBAR_J_FS * TWO_PI**3)

# default effective nonlinearity: first-order QPM reduction of d24
D24_PM_PER_V = 3.92

# The JSA is evaluated only where the Gaussian pump envelope is
# non-negligible: |w_i + w_s - wbar_p| <= PUMP_BAND_SIGMAS * sigma_p.
# At the 6-sigma cutoff the amplitude is exp(-18) ~ 1.5e-8 of peak
# (intensity ~2e-16), far below any export threshold or quadrature
# tolerance.  Setting the tails identically to zero both sparsifies wide
# grids and keeps every sum-frequency dispersion lookup inside the
# Sellmeier data validity window.
PUMP_BAND_SIGMAS = 6.0


@dataclass(frozen=True)
class PumpParams:
    """Pulsed pump description (boundary units, converted on access).

    Parameters
    ----------
    p_avg_w : float
        Average power [W].
    rep_rate_hz : float
        Pulse repetition rate [Hz].
    sigma_p_rad_per_ps : float
        Gaussian amplitude bandwidth [rad/ps].
    omega_p_rad_per_fs : float
        Central angular frequency [rad/fs].
    """

    p_avg_w: float
    rep_rate_hz: float
    sigma_p_rad_per_ps: float
    omega_p_rad_per_fs: float

    def __post_init__(self):
        if self.p_avg_w < 0:
            raise ValueError(f"average power must be >= 0, got {self.p_avg_w}")
        for name in ("rep_rate_hz", "sigma_p_rad_per_ps", "omega_p_rad_per_fs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def power_j_per_fs(self):
        return watt_to_joule_per_fs(self.p_avg_w)

    @property
    def rep_rate_per_fs(self):
        return ghz_to_per_fs(self.rep_rate_hz * 1e-9)

    @property
    def sigma_p_rad_per_fs(self):
        return rad_per_ps_to_rad_per_fs(self.sigma_p_rad_per_ps)


@dataclass(frozen=True)
class SourceConstants:
    """Nonlinear interaction constants shared by the SPDC and SFG stages.

    d_pm_per_v defaults to the first-order quasi-phase-matched effective
    nonlinearity 2 d24 / pi; a_i_um2 is the interaction (mode overlap)
    area.
    """

    d_pm_per_v: float = 2 * D24_PM_PER_V / np.pi
    a_i_um2: float = 15.0

    def __post_init__(self):
        if self.d_pm_per_v <= 0:
            raise ValueError(f"effective nonlinearity must be positive, got {self.d_pm_per_v}")
        if self.a_i_um2 <= 0:
            raise ValueError(f"interaction area must be positive, got {self.a_i_um2}")

    @property
    def d_um_per_v(self):
        return pm_per_volt_to_um_per_volt(self.d_pm_per_v)

    @property
    def b_vertex(self):
        return B_VERTEX


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency samples for one field.

    Parameters
    ----------
    start : float
        First sample [rad/fs].
    spacing : float
        Sample spacing [rad/fs].
    count : int
        Number of samples (>= 2).
    """

    start: float
    spacing: float
    count: int

    def __post_init__(self):
        if self.spacing <= 0:
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")

    @classmethod
    def centered(cls, center, half_extent, count):
        """Symmetric grid of `count` points covering center +- half_extent."""
        if count < 2:
            raise ValueError(f"grid needs at least 2 points, got {count}")
        spacing = 2 * half_extent / (count - 1)
        return cls(start=center - half_extent, spacing=spacing, count=count)

    @property
    def values(self):
        return self.start + self.spacing * np.arange(self.count)

    @property
    def stop(self):
        return self.start + self.spacing * (self.count - 1)

    @property
    def center(self):
        return 0.5 * (self.start + self.stop)

    def contains(self, lo, hi):
        """Whether [lo, hi] lies inside the sampled range."""
        return (lo >= self.start - 1e-12) and (hi <= self.stop + 1e-12)


@dataclass(frozen=True)
class Jsa:
    """Complex joint spectral amplitude Phi(omega_i, omega_s) on its grids.

    amplitude[j, k] = Phi(grid_i.values[j], grid_s.values[k]).  With all
    physical constants included, the trapezoidal quadrature of
    |amplitude|^2 over both axes is the pair-creation probability per
    pulse (dimensionless).
    """

    grid_i: FrequencyGrid
    grid_s: FrequencyGrid
    amplitude: np.ndarray

    def __post_init__(self):
        if self.amplitude.shape != (self.grid_i.count, self.grid_s.count):
            raise ValueError(
                f"amplitude shape {self.amplitude.shape} does not match grids "
                f"({self.grid_i.count}, {self.grid_s.count})"
            )
        if not np.all(np.isfinite(self.amplitude)):
            raise ValueError("JSA amplitude contains non-finite entries")


def field_scale(model, omega):
    """Per-mode vacuum field normalization sqrt(hbar w / (2 eps0 n(w) c))."""
    n = dispersion.refractive_index(model, omega)
    return np.sqrt(HBAR_J_FS * np.asarray(omega, dtype=float) / (2 * EPS0_C_PER_V_UM * n * C_UM_PER_FS))


def pump_amplitude(pump, omega_p):
    """Pump spectral amplitude alpha(omega_p) [per sqrt(rad/fs)].

    Gaussian centered at the pump carrier with amplitude-squared
    exponent exp(-(w - wbar)^2 / sigma_p^2); the peak value is
    sqrt(P_avg / (hbar w sigma_p sqrt(pi) R_R)) with the running
    frequency in the photon energy.  Integrates (in modulus squared) to
    the photons-per-pulse count P_avg / (hbar wbar R_R) up to
    O(sigma_p^2 / wbar^2) corrections.
    """
    omega_p = np.asarray(omega_p, dtype=float)
    if np.any(omega_p <= 0):
        raise ValueError("pump frequency must be positive")
    sig = pump.sigma_p_rad_per_fs
    peak = np.sqrt(
        pump.power_j_per_fs
        / (HBAR_J_FS * omega_p * sig * np.sqrt(np.pi) * pump.rep_rate_per_fs)
    )
    detune = omega_p - pump.omega_p_rad_per_fs
    return peak * np.exp(-(detune * detune) / (2 * sig * sig))


def _jsa_values(crystal, pump, consts, w_i, w_s, models):
    """Pointwise JSA evaluation on broadcast frequency arrays.

    The full product of field scales, phase matching, and pump envelope
    is evaluated only inside the pump band (see PUMP_BAND_SIGMAS); the
    amplitude is identically zero elsewhere.  Within the band, every
    dispersion lookup (idler on z, signal and sum on y) must fall inside
    the Sellmeier validity window or a ValueError propagates from the
    dispersion layer.
    """
    w_i, w_s = np.broadcast_arrays(np.asarray(w_i, dtype=float), np.asarray(w_s, dtype=float))
    w_p = w_i + w_s
    amp = np.zeros(w_p.shape, dtype=complex)
    band = np.abs(w_p - pump.omega_p_rad_per_fs) <= PUMP_BAND_SIGMAS * pump.sigma_p_rad_per_fs
    if pump.p_avg_w == 0.0 or not band.any():
        return amp
    wi, ws, wp = w_i[band], w_s[band], w_p[band]
    pref = consts.b_vertex * consts.d_um_per_v * TWO_PI**2 / np.sqrt(consts.a_i_um2)
    ells = field_scale(models["y"], wp) * field_scale(models["y"], ws) * field_scale(models["z"], wi)
    pi_pm = pm_sinc(crystal, delta_k(crystal, wp, ws, wi, models=models))
    amp[band] = pref * ells * pi_pm * pump_amplitude(pump, wp)
    return amp


def source_jsa(crystal, pump, consts, grid_i, grid_s, models=None):
    """Sample the full-constant JSA of one SPDC source.

    Phi(w_i, w_s) = b d (2 pi)^2 / sqrt(A_I)
                    * l_y(w_i + w_s) l_y(w_s) l_z(w_i)
                    * Pi(dk(w_i + w_s, w_s, w_i)) * alpha(w_i + w_s)

    Signal rides the crystallographic y axis, idler the z axis (type-II).
    Cells outside the pump band are exactly zero (see PUMP_BAND_SIGMAS).

    Raises
    ------
    ValueError
        If a grid spacing exceeds the phase-matching bandwidth
        sigma_pi = kappa c / L (the sinc main lobe would be unresolved),
        or if in-band frequencies leave the dispersion validity range.
    """
    if models is None:
        models = dispersion.load_sellmeier()
    pm_bandwidth = sigma_pi(KAPPA_DESIGN, crystal.length_um)
    for name, grid in (("idler", grid_i), ("signal", grid_s)):
        if grid.spacing > pm_bandwidth:
            raise ConfigurationError(
                f"configuration error: {name} grid spacing {grid.spacing:.3e} rad/fs "
                f"exceeds the phase-matching bandwidth {pm_bandwidth:.3e} rad/fs"
            )
    amp = _jsa_values(
        crystal, pump, consts, grid_i.values[:, None], grid_s.values[None, :], models
    )
    return Jsa(grid_i=grid_i, grid_s=grid_s, amplitude=np.ascontiguousarray(amp))


def pair_probability(jsa):
    """Pair-creation probability per pulse: 2-D trapezoid of |Phi|^2."""
    intensity = np.abs(jsa.amplitude) ** 2
    inner = np.trapezoid(intensity, dx=jsa.grid_s.spacing, axis=1)
    return float(np.trapezoid(inner, dx=jsa.grid_i.spacing))


def calibrate_pump_power(target_pair_probability, crystal, pump, consts, grid_i, grid_s, models=None):
    """Average pump power [W] for a requested pair probability.

    The pair probability is exactly linear in P_avg, so a single probe
    evaluation inverts the relation.
    """
    if not 0 <= target_pair_probability < 1:
        raise ValueError(
            f"target pair probability must be in [0, 1), got {target_pair_probability}"
        )
    if target_pair_probability == 0:
        return 0.0
    probe_w = pump.p_avg_w if pump.p_avg_w > 0 else 1.0
    probe = PumpParams(
        p_avg_w=probe_w,
        rep_rate_hz=pump.rep_rate_hz,
        sigma_p_rad_per_ps=pump.sigma_p_rad_per_ps,
        omega_p_rad_per_fs=pump.omega_p_rad_per_fs,
    )
    xi2_probe = pair_probability(source_jsa(crystal, probe, consts, grid_i, grid_s, models=models))
    if xi2_probe <= 0:
        raise ValueError("probe JSA has zero pair probability; cannot calibrate")
    return probe_w * target_pair_probability / xi2_probe


def normalized_amplitude(jsa):
    """Unit-Frobenius-norm discretized amplitude (for state embedding)."""
    norm = np.linalg.norm(jsa.amplitude)
    if norm == 0:
        raise ValueError("cannot normalize an identically zero JSA")
    return jsa.amplitude / norm


def schmidt_coefficients(jsa):
    """Singular values of the unit-normalized discretized JSA (descending)."""
    return np.linalg.svd(normalized_amplitude(jsa), compute_uv=False)


def source_baseline_metrics(jsa, eta, coherent=False):
    """Purity and negativity of the vacuum-mixed single-source state.

    The state is (1 - eta) |vac><vac| + eta |psi_pair><psi_pair| with the
    pair amplitude given by the normalized JSA; the coherent variant
    keeps the vacuum-biphoton coherences (pure superposition state).
    Works directly from the Schmidt spectrum {s_a}: the partial
    transpose of the vacuum-slotted state decomposes into the vacuum
    entry, the biphoton block with eigenvalues +- eta s_a s_b, and (for
    the coherent variant) +- sqrt(eta (1 - eta)) s_a pairs from the
    coherence block, giving

        negativity = eta ((sum_a s_a)^2 - 1) / 2                (incoherent)
        negativity = eta ((sum_a s_a)^2 - 1) / 2
                     + sqrt(eta (1 - eta)) sum_a s_a            (coherent)

    This avoids materializing the (N_i N_s + 1)-dimensional matrix and is
    exact; the same numbers are reproduced by the generic density-matrix
    route on small grids (see tests).

    Note: the Schmidt sum of a sinc-kernel JSA depends on the analysis
    window, because phase-matching side lobes keep contributing weakly
    occupied anticorrelated modes as the window grows.  Quote baseline
    figures together with the window used (see the config defaults).

    Returns
    -------
    dict with keys "purity", "negativity", "schmidt_sum_sq".
    """
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    sv = schmidt_coefficients(jsa)
    ssum = float(sv.sum())
    neg = eta * (ssum**2 - 1.0) / 2.0
    if coherent:
        neg += np.sqrt(eta * (1.0 - eta)) * ssum
        pur = 1.0
    else:
        pur = (1.0 - eta) ** 2 + eta**2
    return {"purity": pur, "negativity": float(neg), "schmidt_sum_sq": ssum**2}


def source_density_matrix(jsa, eta, coherent=False, phase=0.0):
    """Vacuum-mixed source density matrix over {vacuum} + biphoton bins.

    Returns a (N_i N_s + 1)-dimensional DensityMatrix with index 0 the
    vacuum slot and m = 1 + j * N_s + k the biphoton bin (j idler, k
    signal).  With the coherent flag the vacuum-biphoton coherences of a
    pure superposition sqrt(1-eta)|vac> + sqrt(eta) e^{i phase}|pair>
    are retained; otherwise they are zeroed (pump phase unresolved).

    Intended for modest grids; see source_baseline_metrics for the
    closed-form route used at production grid sizes.
    """
    from .quantum_state import DensityMatrix  # local import to avoid cycle

    if not 0 <= eta <= 1:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    psi = normalized_amplitude(jsa).reshape(-1)
    dim = psi.size + 1
    entries = np.zeros((dim, dim), dtype=complex)
    entries[0, 0] = 1.0 - eta
    entries[1:, 1:] = eta * np.outer(psi, psi.conj())
    if coherent:
        coh = np.sqrt(eta * (1.0 - eta)) * np.exp(1j * phase) * psi
        entries[1:, 0] = coh
        entries[0, 1:] = coh.conj()
    return DensityMatrix(
        entries=entries,
        dim_b1=jsa.grid_i.count,
        dim_b2=jsa.grid_s.count,
        vacuum_slot=True,
    )


# clearance [rad/fs] kept between capped grid edges and the dispersion
# data boundary, so edge cells never sit exactly on the boundary
VALIDITY_MARGIN = 1e-3


def validity_capped_half_extent(w_i0, w_s0, models, margin=VALIDITY_MARGIN):
    """Largest symmetric half-extent keeping both grids inside dispersion data.

    The idler grid (z axis) and signal grid (y axis) each span their
    center +- half; the binding constraint at the design point is the
    idler's long-wavelength edge.  Sum-frequency lookups are bounded
    separately by the pump band and are not capped here.
    """
    lo_y, hi_y = dispersion.frequency_validity_range(models["y"])
    lo_z, hi_z = dispersion.frequency_validity_range(models["z"])
    cap = min(w_i0 - lo_z, hi_z - w_i0, w_s0 - lo_y, hi_y - w_s0) - margin
    if cap <= 0:
        raise ConfigurationError(
            f"configuration error: design pair ({w_i0:.4f}, {w_s0:.4f}) rad/fs "
            "leaves no room inside the dispersion validity window"
        )
    return float(cap)


def intensity_extent(crystal, pump, consts, threshold=1e-4, probe_half=3.0, probe_points=6001, centers=None, models=None):
    """Half-extents (idler, signal) where the JSI exceeds `threshold` of peak.

    Scans the anti-diagonal (difference-frequency) and diagonal
    (sum-frequency) profiles of |Phi|^2 around `centers = (w_i0, w_s0)`
    (default: the slowness-matched pair on the phase-matching ridge) and
    returns the symmetric half-extent per axis that covers every point
    above threshold.  The probe range (and therefore the returned
    extent) is capped by validity_capped_half_extent at the same
    centers, so grids built from it always evaluate inside the
    dispersion data; weak side lobes beyond the cap (below ~1e-3 of
    peak at the default design) are deliberately truncated.  This is
    the reproducible truncation rule for default export grids; the
    result is reported in output metadata.
    """
    if models is None:
        models = dispersion.load_sellmeier()
    w_p0 = pump.omega_p_rad_per_fs
    if centers is None:
        w_s0, w_i0 = _design_pair(crystal, w_p0, models)
    else:
        w_i0, w_s0 = centers
    half_probe = min(probe_half, validity_capped_half_extent(w_i0, w_s0, models))
    delta = np.linspace(-half_probe, half_probe, probe_points)
    pump_probe = PumpParams(
        p_avg_w=max(pump.p_avg_w, 1.0),
        rep_rate_hz=pump.rep_rate_hz,
        sigma_p_rad_per_ps=pump.sigma_p_rad_per_ps,
        omega_p_rad_per_fs=pump.omega_p_rad_per_fs,
    )
    anti = np.abs(_jsa_values(crystal, pump_probe, consts, w_i0 - delta, w_s0 + delta, models)) ** 2
    diag = np.abs(_jsa_values(crystal, pump_probe, consts, w_i0 + delta / 2, w_s0 + delta / 2, models)) ** 2
    peak = max(anti.max(), diag.max())
    if peak == 0:
        raise ValueError("probe JSI is identically zero; cannot locate an extent")
    half = 0.0
    for prof in (anti, diag):
        above = np.abs(delta[prof >= threshold * peak])
        if above.size:
            half = max(half, float(above.max()))
    return half, half


def _design_pair(crystal, omega_p, models):
    """Central signal/idler pair on the phase-matching ridge.

    Along the energy-conserving line (omega_s, omega_p - omega_s) the
    momentum mismatch is convex with a shallow minimum where the signal
    (y) and idler (z) group slownesses coincide — the anticorrelated
    design regime.  The minimizer is located as the root of the slowness
    difference, which brackets robustly even when delta_k itself never
    crosses zero (or crosses twice) near the band center.
    """
    from scipy.optimize import brentq

    def slowness_gap(ws):
        return dispersion.group_slowness(models["y"], ws) - dispersion.group_slowness(
            models["z"], omega_p - ws
        )

    # search the branch where signal is the higher-frequency photon
    ws = brentq(slowness_gap, 0.55 * omega_p, 0.75 * omega_p, xtol=1e-12)
    return ws, omega_p - ws
