"""Physical constants in the internal unit system.

Internal convention used throughout the package: length in micrometres,
time in femtoseconds, angular frequency in rad/fs, energy in joules,
charge in coulombs.  All user-facing inputs (rad/ps, mm, nm, W, GHz,
pm/V) are converted to these units at the boundary.
"""

# speed of light [um/fs]
C_UM_PER_FS = 0.299792458

# reduced Planck constant [J fs]  (1.054571817e-34 J s * 1e15 fs/s)
HBAR_J_FS = 1.054571817e-19

# vacuum permittivity [C/(V um)]  (8.8541878128e-12 F/m * 1e-6 m/um)
EPS0_C_PER_V_UM = 8.8541878128e-18

TWO_PI = 6.283185307179586


def rad_per_ps_to_rad_per_fs(x):
    """Convert an angular frequency or bandwidth from rad/ps to rad/fs."""
    return x * 1e-3


def mm_to_um(x):
    """Convert a crystal length from mm to um."""
    return x * 1e3


def watt_to_joule_per_fs(x):
    """Convert average power from W (J/s) to J/fs."""
    return x * 1e-15


def ghz_to_per_fs(x):
    """Convert a repetition rate from GHz to 1/fs."""
    return x * 1e-6


def pm_per_volt_to_um_per_volt(x):
    """Convert a nonlinear coefficient from pm/V to um/V."""
    return x * 1e-6


def wavelength_um(omega_rad_per_fs):
    """Vacuum wavelength [um] for an angular frequency [rad/fs]."""
    return TWO_PI * C_UM_PER_FS / omega_rad_per_fs
