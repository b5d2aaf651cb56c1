"""Refractive index, wavevector, and group slowness for periodically poled KTP.

The crystal is described by two-pole Sellmeier fits along the
crystallographic y and z axes, loaded from a plain-text data file shipped
with the package.  All functions accept scalar or ndarray angular
frequencies in rad/fs and are pure; they can be called concurrently
without restriction.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

from .constants import C_UM_PER_FS, TWO_PI, wavelength_um

_DATA_RESOURCE = "ktp_sellmeier.txt"

# default central finite-difference step for group_slowness [rad/fs];
# small enough to sit well inside the smooth Sellmeier regime, large
# enough to stay clear of cancellation noise
DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class SellmeierModel:
    """Two-pole Sellmeier model n^2 = A + B/(lam^2 - C) + D/(lam^2 - E).

    Parameters
    ----------
    axis : str
        Crystallographic axis label, "y" or "z".
    coefficients : tuple of float
        (A, B, C, D, E) with lam in um.
    valid_range_um : tuple of float
        (min, max) vacuum wavelength in um accepted by the model.
    """

    axis: str
    coefficients: tuple
    valid_range_um: tuple

    def __post_init__(self):
        if self.axis not in ("y", "z"):
            raise ValueError(f"axis must be 'y' or 'z', got {self.axis!r}")
        if len(self.coefficients) != 5:
            raise ValueError("expected 5 Sellmeier coefficients (A, B, C, D, E)")
        if self.coefficients[0] < 1.0:
            raise ValueError(
                f"leading Sellmeier coefficient must be >= 1 (it is the mid-band n^2), "
                f"got {self.coefficients[0]}"
            )
        lo, hi = self.valid_range_um
        if not 0 < lo < hi:
            raise ValueError(f"invalid wavelength range {self.valid_range_um}")


def _parse_keyvalue(text):
    entries = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        entries[key.strip()] = float(value.strip())
    return entries


def load_sellmeier(path=None):
    """Load the KTP Sellmeier models from a key-value text file.

    Parameters
    ----------
    path : str or Path, optional
        File to read; defaults to the data file shipped with the package.

    Returns
    -------
    dict
        {"y": SellmeierModel, "z": SellmeierModel}
    """
    if path is None:
        text = (
            importlib.resources.files("sfgswap.data")
            .joinpath(_DATA_RESOURCE)
            .read_text()
        )
    else:
        with open(path) as fh:
            text = fh.read()
    entries = _parse_keyvalue(text)
    models = {}
    for axis in ("y", "z"):
        coeffs = tuple(entries[f"{axis}.{c}"] for c in ("A", "B", "C", "D", "E"))
        rng = (entries[f"{axis}.valid_min_um"], entries[f"{axis}.valid_max_um"])
        models[axis] = SellmeierModel(axis=axis, coefficients=coeffs, valid_range_um=rng)
    return models


def frequency_validity_range(model):
    """Angular-frequency window [rad/fs] covered by the model's data range.

    Wavelength and angular frequency are inversely related, so the lower
    frequency bound comes from the long-wavelength edge and vice versa.
    Grid-construction helpers use this to cap extents so no evaluation
    ever leaves the fitted dispersion data.
    """
    lo_um, hi_um = model.valid_range_um
    return TWO_PI * C_UM_PER_FS / hi_um, TWO_PI * C_UM_PER_FS / lo_um


def _check_range(model, lam):
    lo, hi = model.valid_range_um
    lam = np.asarray(lam)
    bad = (lam < lo) | (lam > hi)
    if np.any(bad):
        offending = np.atleast_1d(lam)[np.atleast_1d(bad)][0]
        raise ValueError(
            f"wavelength {float(offending):.6f} um outside the valid range "
            f"[{lo}, {hi}] um of the {model.axis}-axis Sellmeier model"
        )


def refractive_index(model, omega):
    """Refractive index n(omega) from the Sellmeier expansion.

    Parameters
    ----------
    model : SellmeierModel
    omega : float or ndarray
        Angular frequency [rad/fs]; the corresponding vacuum wavelength
        must lie inside the model's valid range.

    Returns
    -------
    float or ndarray
        n(omega), dimensionless.
    """
    lam = wavelength_um(np.asarray(omega, dtype=float))
    _check_range(model, lam)
    a, bb, cc, dd, ee = model.coefficients
    lam2 = lam * lam
    n2 = a + bb / (lam2 - cc) + dd / (lam2 - ee)
    n = np.sqrt(n2)
    if n.ndim == 0:
        return float(n)
    return n


def wavevector(model, omega):
    """Wavevector k = n(omega) * omega / c  [rad/um]."""
    omega = np.asarray(omega, dtype=float)
    k = refractive_index(model, omega) * omega / C_UM_PER_FS
    if np.ndim(k) == 0:
        return float(k)
    return k


def group_slowness(model, omega, step=DEFAULT_FD_STEP):
    """Inverse group velocity k'(omega) by central finite difference [fs/um].

    Used as a design diagnostic (the anticorrelated phase-matching regime
    has nearly equal slowness for the two photons entering the
    sum-frequency stage); it is never asserted equal between axes.

    Parameters
    ----------
    model : SellmeierModel
    omega : float or ndarray
        Angular frequency [rad/fs]; omega +- step must stay in range.
    step : float
        Finite-difference half-step [rad/fs].
    """
    if step <= 0 or step < 1e-12:
        raise ValueError(f"finite-difference step {step} underflows")
    omega = np.asarray(omega, dtype=float)
    kp = (wavevector(model, omega + step) - wavevector(model, omega - step)) / (2 * step)
    if np.ndim(kp) == 0:
        return float(kp)
    return kp
