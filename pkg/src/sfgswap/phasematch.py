"""Momentum mismatch and phase-matching amplitudes for the SPDC and SFG crystals.

Both nonlinear stages are first-order quasi-phase-matched type-II
processes in PPKTP with pump and signal polarized along the
crystallographic y axis and the idler along z.  The exact phase-matching
amplitude is the complex sinc form; a real Gaussian surrogate with a
fitted width constant kappa is provided for bandwidth/separability
analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .constants import C_UM_PER_FS, TWO_PI
from . import dispersion

# Nominal dimensionless bandwidth constant of the Gaussian surrogate.
# sigma_pi(KAPPA_DESIGN, L=500 um) = 7.7245 rad/ps, the matched-pump
# design bandwidth; fit_kappa() reproduces this value from the sinc fit.
KAPPA_DESIGN = 12.8831

# Symmetric half-window |x| <= W (x = L*dk) for the default kappa fit.
# The fitted Gaussian width depends noticeably on the window (see
# kappa_window_sensitivity); this value is calibrated so the unweighted
# fit returns KAPPA_DESIGN.  It sits between the half-power support
# (|x| ~ 3.79) and the first sinc zero (|x| = 2 pi).
KAPPA_FIT_WINDOW = 4.7863163

_models_cache = None


def _default_models():
    global _models_cache
    if _models_cache is None:
        _models_cache = dispersion.load_sellmeier()
    return _models_cache


@dataclass(frozen=True)
class CrystalParams:
    """Geometry of one quasi-phase-matched waveguide.

    Parameters
    ----------
    length_um : float
        Crystal length L [um].
    poling_period_um : float
        Poling period Lambda [um].
    qpm_order : int
        Quasi-phase-matching order q (first order by default).
    axes : tuple of str
        Polarization axes for (pump, signal, idler); the type-II
        configuration used throughout is ("y", "y", "z").
    """

    length_um: float
    poling_period_um: float
    qpm_order: int = 1
    axes: tuple = ("y", "y", "z")

    def __post_init__(self):
        if self.length_um <= 0:
            raise ValueError(f"crystal length must be positive, got {self.length_um}")
        if self.poling_period_um <= 0:
            raise ValueError(f"poling period must be positive, got {self.poling_period_um}")
        if self.qpm_order < 1:
            raise ValueError(f"qpm order must be >= 1, got {self.qpm_order}")


def delta_k(params, omega_p, omega_s, omega_i, models=None):
    """Momentum mismatch along the waveguide [rad/um].

    dk = k_y(omega_s) + k_z(omega_i) - k_y(omega_p) + q*2*pi/Lambda

    The sign convention is fixed so the design point gives |dk| ~ 0.
    The same formula serves the sum-frequency stage with
    omega_p <- omega_SFG.  Accepts broadcastable ndarray frequencies.
    """
    if models is None:
        models = _default_models()
    ax_p, ax_s, ax_i = params.axes
    k_s = dispersion.wavevector(models[ax_s], omega_s)
    k_i = dispersion.wavevector(models[ax_i], omega_i)
    k_p = dispersion.wavevector(models[ax_p], omega_p)
    return k_s + k_i - k_p + params.qpm_order * TWO_PI / params.poling_period_um


def pm_sinc(params, dk):
    """Exact phase-matching amplitude Pi = L sinc(L dk / 2) exp(-i L dk / 2) [um].

    sinc(x) = sin(x)/x with sinc(0) = 1.  The phase factor is retained:
    it matters when amplitudes from the two sources interfere inside the
    three-frequency integral.  |Pi| <= L with equality only at dk = 0.
    """
    x = params.length_um * np.asarray(dk, dtype=float)
    return params.length_um * np.sinc(x / (2 * np.pi)) * np.exp(-0.5j * x)


def pm_gaussian(params, dk, kappa=KAPPA_DESIGN):
    """Gaussian surrogate of the sinc phase-matching modulus [um].

    Pi_g = L exp(-x^2 / (2 (kappa/4)^2))  with x = L dk.

    The amplitude width kappa/4 in x follows the fit_kappa convention
    (the fit returns 4x the Gaussian standard deviation).  Along a
    frequency direction with detuning-to-mismatch slope A = d(dk)/d(omega),
    the surrogate's 1-sigma amplitude width is (kappa/4)/(L|A|); the
    associated bandwidth constant sigma_pi = kappa c / L reproduces the
    matched-pump design value 7.7245 rad/ps at L = 0.5 mm.  Real and
    non-negative; phase is omitted by construction.
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    x = params.length_um * np.asarray(dk, dtype=float)
    s = kappa / 4.0
    return params.length_um * np.exp(-(x * x) / (2 * s * s))


def sigma_pi(kappa, length_um):
    """Phase-matching bandwidth constant sigma_pi = kappa c / L [rad/fs]."""
    return kappa * C_UM_PER_FS / length_um


def fit_kappa(window=KAPPA_FIT_WINDOW, num_points=40001):
    """Least-squares Gaussian width of the sinc main structure; returns kappa.

    Fits exp(-x^2/(2 s^2)) to sinc(x/2) by unweighted least squares on a
    dense symmetric grid |x| <= window and returns kappa = 4 s.  The
    result is window-sensitive (the sinc is not a Gaussian); the default
    window is calibrated so the fit reproduces KAPPA_DESIGN = 12.8831,
    and kappa_window_sensitivity() reports the dependence, e.g. halving
    the window raises the result to ~13.62 while widening it to the
    first sinc zero (|x| = 2 pi) lowers it to ~12.26.

    Raises
    ------
    RuntimeError
        If the optimizer fails to converge (with fit diagnostics).
    """
    x = np.linspace(-window, window, num_points)
    target = np.sinc(x / (2 * np.pi))

    def residual(p):
        return np.exp(-(x * x) / (2 * p[0] * p[0])) - target

    result = least_squares(residual, [3.0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if not result.success:
        raise RuntimeError(
            f"Gaussian width fit failed: {result.message}; "
            f"window={window}, cost={result.cost:.3e}"
        )
    return 4.0 * float(result.x[0])


def kappa_window_sensitivity(windows=None):
    """Report the fitted kappa at several fit windows.

    Returns a dict {window: kappa}.  Defaults to the calibrated window,
    half of it, and the first sinc zero, making the documented
    window-dependence of fit_kappa explicit.
    """
    if windows is None:
        windows = (KAPPA_FIT_WINDOW, KAPPA_FIT_WINDOW / 2, np.pi, TWO_PI)
    return {w: fit_kappa(window=w) for w in windows}


def gaussian_separability_residual(n_p, n_s, n_i, sigma_pi_val, sigma_p):
    """Separability residual of the Gaussian source model.

    Returns -(n_p - n_s)(n_p - n_i) - sigma_pi^2 / sigma_p^2, which is
    zero exactly when the Gaussian-model source amplitude factorizes
    into signal and idler parts.  The two bandwidths must share units.
    In the limit sigma_p -> inf the residual tends to
    -(n_p - n_s)(n_p - n_i).
    """
    if sigma_p <= 0:
        raise ValueError(f"sigma_p must be positive, got {sigma_p}")
    return -(n_p - n_s) * (n_p - n_i) - (sigma_pi_val / sigma_p) ** 2
