"""Sum-frequency entanglement-swapping stage.

Two independently generated photon pairs feed the swap: each source
keeps one bystander photon (b1 from source 1's idler axis, b2 from
source 2's signal axis) and sends the partner (a1, a2) into a
sum-frequency crystal.  Detection of the SFG photon heralds the swap.
The central object is the three-frequency amplitude
psi(w_b1, w_b2, w_SFG), obtained from the two source amplitudes by an
energy-conserving convolution over the hidden active frequency w_a2
(with w_a1 = w_SFG - w_a2 enforced exactly) against the SFG
phase-matching kernel.

All physical constants ride along, so the grid sum of |psi|^2 times the
(2 pi)^3 grid measure is the per-pulse swap success probability.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .constants import TWO_PI
from .errors import ConfigurationError, MemoryBudgetError
from . import dispersion
from .phasematch import delta_k, pm_sinc
from .source import FrequencyGrid, field_scale

QUADRATURE_FLOOR = 50


@dataclass(frozen=True)
class ThreeFreqJsa:
    """psi(w_b1, w_b2, w_SFG) sampled on its three grids.

    amplitude[j, k, l] = psi(grid_b1[j], grid_b2[k], grid_sfg[l]);
    (2 pi)^3 * product of spacings * sum |amplitude|^2 is the swap
    success probability (see sfg_probability).
    """

    grid_b1: FrequencyGrid
    grid_b2: FrequencyGrid
    grid_sfg: FrequencyGrid
    amplitude: np.ndarray
    quadrature_points: int

    def __post_init__(self):
        expected = (self.grid_b1.count, self.grid_b2.count, self.grid_sfg.count)
        if self.amplitude.shape != expected:
            raise ValueError(f"amplitude shape {self.amplitude.shape} != grids {expected}")
        if not np.all(np.isfinite(self.amplitude)):
            raise ValueError("three-frequency amplitude contains non-finite entries")


def _complex_interpolator(grid_a, grid_b, values):
    """Bilinear interpolator for a complex field sampled on two grids.

    Real and imaginary parts are interpolated separately; points outside
    the sampled rectangle evaluate to zero (the amplitude is negligible
    there by construction of the source grids, which must be validated
    by the caller before accepting out-of-range evaluation points).
    """
    re = RegularGridInterpolator(
        (grid_a.values, grid_b.values), values.real, method="linear", bounds_error=False, fill_value=0.0
    )
    im = RegularGridInterpolator(
        (grid_a.values, grid_b.values), values.imag, method="linear", bounds_error=False, fill_value=0.0
    )

    def evaluate(points):
        return re(points) + 1j * im(points)

    return evaluate


def _require_within(name, lo, hi, grid, grid_name):
    if not grid.contains(lo, hi):
        raise ConfigurationError(
            f"configuration error: required {name} range [{lo:.6f}, {hi:.6f}] rad/fs is not "
            f"covered by {grid_name} [{grid.start:.6f}, {grid.stop:.6f}] rad/fs"
        )


def _slice_evaluator(phi1, phi2, sfg, consts, grid_b1, grid_b2, grid_sfg, quadrature_points, models):
    """Shared core: returns a function computing one SFG slice of psi."""
    if quadrature_points < QUADRATURE_FLOOR:
        raise ConfigurationError(
            f"configuration error: quadrature_points = {quadrature_points} below the "
            f"floor of {QUADRATURE_FLOOR}"
        )
    if models is None:
        models = dispersion.load_sellmeier()
    # active integration variable: full sampled support of source 2's idler axis
    a2 = np.linspace(phi2.grid_i.start, phi2.grid_i.stop, quadrature_points)
    da2 = a2[1] - a2[0]
    weights = np.full(quadrature_points, da2)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    a1_lo = grid_sfg.start - a2[-1]
    a1_hi = grid_sfg.stop - a2[0]
    _require_within("bystander 1", grid_b1.start, grid_b1.stop, phi1.grid_i, "source 1 idler grid")
    _require_within("bystander 2", grid_b2.start, grid_b2.stop, phi2.grid_s, "source 2 signal grid")
    _require_within("active 1 (w_SFG - w_a2)", a1_lo, a1_hi, phi1.grid_s, "source 1 signal grid")

    interp1 = _complex_interpolator(phi1.grid_i, phi1.grid_s, phi1.amplitude)
    interp2 = _complex_interpolator(phi2.grid_i, phi2.grid_s, phi2.amplitude)

    b1 = grid_b1.values
    b2 = grid_b2.values
    # source 2 amplitude on (a2 nodes) x (b2 nodes): SFG-slice independent
    pts2 = np.stack(np.meshgrid(a2, b2, indexing="ij"), axis=-1).reshape(-1, 2)
    phi2_mat = interp2(pts2).reshape(quadrature_points, b2.size)

    model_y, model_z = models["y"], models["z"]
    ell_z_a2 = field_scale(model_z, a2)
    pref = consts.b_vertex * consts.d_um_per_v * TWO_PI**3 / np.sqrt(consts.a_i_um2)

    def compute_slice(l):
        w_m = grid_sfg.values[l]
        a1 = w_m - a2
        kern = (
            field_scale(model_y, w_m)
            * field_scale(model_y, a1)
            * ell_z_a2
            * pm_sinc(sfg, delta_k(sfg, w_m, a1, a2, models=models))
        )
        pts1 = np.stack(np.meshgrid(b1, a1, indexing="ij"), axis=-1).reshape(-1, 2)
        phi1_mat = interp1(pts1).reshape(b1.size, quadrature_points)
        return pref * (phi1_mat * (kern * weights)[None, :]) @ phi2_mat

    return compute_slice


def three_freq_jsa(
    phi1,
    phi2,
    sfg,
    consts,
    grid_b1,
    grid_b2,
    grid_sfg,
    quadrature_points=300,
    models=None,
    threads=1,
    max_elements=None,
):
    """Materialize psi(w_b1, w_b2, w_SFG) on the requested grids.

    The inner w_a2 integral uses a trapezoidal rule with
    quadrature_points samples over source 2's idler support; source
    amplitudes are interpolated bilinearly when evaluation points fall
    off their sample nodes.  SFG slices are independent and may be
    computed on a thread pool; results are merged in fixed slice order,
    so outputs are identical for any thread count.

    Raises MemoryBudgetError if the amplitude array would exceed
    max_elements entries (use iter_three_freq_slices for streaming).
    """
    n_total = grid_b1.count * grid_b2.count * grid_sfg.count
    if max_elements is not None and n_total > max_elements:
        raise MemoryBudgetError(
            f"three-frequency amplitude would contain {n_total} elements "
            f"({grid_b1.count} x {grid_b2.count} x {grid_sfg.count}); "
            f"raise the budget or consume it slice-by-slice"
        )
    compute_slice = _slice_evaluator(
        phi1, phi2, sfg, consts, grid_b1, grid_b2, grid_sfg, quadrature_points, models
    )
    amp = np.empty((grid_b1.count, grid_b2.count, grid_sfg.count), dtype=complex)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for l, s in enumerate(pool.map(compute_slice, range(grid_sfg.count))):
                amp[:, :, l] = s
    else:
        for l in range(grid_sfg.count):
            amp[:, :, l] = compute_slice(l)
    return ThreeFreqJsa(
        grid_b1=grid_b1,
        grid_b2=grid_b2,
        grid_sfg=grid_sfg,
        amplitude=amp,
        quadrature_points=quadrature_points,
    )


def iter_three_freq_slices(
    phi1, phi2, sfg, consts, grid_b1, grid_b2, grid_sfg, quadrature_points=300, models=None
):
    """Yield psi slices one SFG frequency at a time (streaming mode).

    Same numerical content as three_freq_jsa without materializing the
    3-D array; intended for grids above the memory budget.
    """
    compute_slice = _slice_evaluator(
        phi1, phi2, sfg, consts, grid_b1, grid_b2, grid_sfg, quadrature_points, models
    )
    for l in range(grid_sfg.count):
        yield compute_slice(l)


def sfg_probability(psi):
    """Per-pulse swap success probability |Xi|^2.

    (2 pi)^3 times the grid-measure-weighted sum of |psi|^2 over all
    three axes.  The plain grid sum (rather than an edge-halved rule) is
    used so that the herald-bin probabilities partition this value
    exactly; the grids are sized so the amplitude is negligible at the
    boundary, where the two conventions differ.
    """
    meas = TWO_PI**3 * psi.grid_b1.spacing * psi.grid_b2.spacing * psi.grid_sfg.spacing
    return float(meas * np.sum(np.abs(psi.amplitude) ** 2))


def sfg_marginal(psi):
    """Marginal probability distribution over the SFG grid (sums to |Xi|^2)."""
    meas = TWO_PI**3 * psi.grid_b1.spacing * psi.grid_b2.spacing * psi.grid_sfg.spacing
    return meas * np.sum(np.abs(psi.amplitude) ** 2, axis=(0, 1))


def sfg_marginal_std(psi):
    """Standard deviation of the SFG marginal [rad/fs] (conversion bandwidth)."""
    p = sfg_marginal(psi)
    total = p.sum()
    if total <= 0:
        raise ValueError("zero-probability amplitude has no marginal width")
    w = psi.grid_sfg.values
    mean = float((p * w).sum() / total)
    var = float((p * (w - mean) ** 2).sum() / total)
    return float(np.sqrt(var))


def herald_rate(xi2, rep_rate_hz):
    """Expected herald (successful swap) rate in events/s: |Xi|^2 R_R."""
    if xi2 < 0:
        raise ValueError(f"success probability must be >= 0, got {xi2}")
    return float(xi2 * rep_rate_hz)


def false_event_rate(xi2, rep_rate_hz):
    """Leading-order false-herald rate |Xi|^4 R_R in events/s.

    Both sources must succeed and both SFG photons go undetected save
    one; the leading term is quartic in Xi."""
    if xi2 < 0:
        raise ValueError(f"success probability must be >= 0, got {xi2}")
    return float(xi2**2 * rep_rate_hz)


def multi_pair_probability(gamma, xi2):
    """Probability of an undetected extra pair after a herald: (1 - gamma) |xi|^2.

    gamma is the fail-detector quantum efficiency; xi2 the single-source
    pair probability.
    """
    if not 0 <= gamma <= 1:
        raise ValueError(f"detector efficiency must be in [0, 1], got {gamma}")
    if not 0 <= xi2 < 1:
        raise ValueError(f"pair probability must be in [0, 1), got {xi2}")
    return float((1.0 - gamma) * xi2)
