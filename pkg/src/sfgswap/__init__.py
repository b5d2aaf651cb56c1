"""Spectral-temporal entanglement swapping of photon pairs via sum-frequency generation.

Simulates a pair of pulsed SPDC sources whose active photons meet in an
SFG crystal; detection of the up-converted photon, frequency-resolved
into bins, heralds entanglement between the two surviving bystander
photons.  The package computes joint spectral amplitudes, swap success
and false-herald rates, and the purity and partial-transpose negativity
of the heralded two-photon states.
"""

__version__ = "0.1.0"

from .constants import C_UM_PER_FS, HBAR_J_FS, EPS0_C_PER_V_UM
from .dispersion import SellmeierModel, load_sellmeier, refractive_index, wavevector, group_slowness
from .phasematch import (
    CrystalParams,
    KAPPA_DESIGN,
    delta_k,
    fit_kappa,
    pm_gaussian,
    pm_sinc,
    sigma_pi,
)
from .source import (
    FrequencyGrid,
    Jsa,
    PumpParams,
    SourceConstants,
    calibrate_pump_power,
    pair_probability,
    pump_amplitude,
    source_baseline_metrics,
    source_density_matrix,
    source_jsa,
)
from .swap import (
    ThreeFreqJsa,
    false_event_rate,
    herald_rate,
    iter_three_freq_slices,
    multi_pair_probability,
    sfg_probability,
    three_freq_jsa,
)
from .quantum_state import (
    BinMetrics,
    DensityMatrix,
    MeasurementBinning,
    bin_metrics,
    conditional_density_matrix,
    herald_spectrum,
    negativity,
    partial_transpose,
    purity,
    reduced_density_matrix,
    toy_state_negativity,
    unresolved_metrics,
    weighted_average,
)
from .errors import (
    ConfigurationError,
    HeraldImpossibleError,
    MemoryBudgetError,
    NumericalConsistencyError,
    SfgSwapError,
)
from .config import SimConfig, load_config, parse_config_text
from .pipeline import (
    build_three_freq,
    run_rates,
    run_source_jsi,
    run_swap,
    run_toy,
)
