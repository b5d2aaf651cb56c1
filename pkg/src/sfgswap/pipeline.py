"""Experiment orchestration: source runs, swap sweeps, toy curves, exports.

Every writer stamps a metadata header (config hash, grid extents, unit
convention, schema version) and uses fixed summation orders so outputs
are byte-identical across thread budgets.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import dispersion
from . import quantum_state as qs
from . import source as src
from . import swap as sw
from .errors import ConfigurationError

SCHEMA_VERSION = 1
UNITS_NOTE = "angular frequency rad/fs; length um; time fs; power W; rates 1/s"
CSV_FLOAT = "{:.15e}"
PSI_PRINT_THRESHOLD = 1e-6  # of peak |psi|^2, for 3-D amplitude export


def _header_lines(config, grids=None):
    lines = [
        f"# schema_version = {SCHEMA_VERSION}",
        f"# package_version = {__version__}",
        f"# config_hash = {config.config_hash()}",
        f"# units = {UNITS_NOTE}",
    ]
    for name, grid in (grids or {}).items():
        lines.append(
            f"# grid_{name} = start {CSV_FLOAT.format(grid.start)}"
            f" spacing {CSV_FLOAT.format(grid.spacing)} count {grid.count}"
        )
    return lines


def _write_csv(path, config, columns, rows, grids=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    out = _header_lines(config, grids)
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(CSV_FLOAT.format(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(out) + "\n")
    return path


def _write_json(path, config, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    record = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config_hash": config.config_hash(),
        "units": UNITS_NOTE,
    }
    record.update(payload)
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return path


def _source_grids(config, models):
    """Source JSI grids: intensity-threshold extent, validity capped,
    rounded up to whole bystander steps."""
    crystal = config.crystal()
    pump = config.pump()
    consts = config.constants()
    centers = (config.idler_center_rad_per_fs, config.signal_center_rad_per_fs)
    half_i, half_s = src.intensity_extent(
        crystal,
        pump,
        consts,
        threshold=config.grid_intensity_threshold,
        centers=centers,
        models=models,
    )
    spacing = config.bystander_spacing_rad_per_fs
    steps_i = max(1, int(half_i / spacing))
    steps_s = max(1, int(half_s / spacing))
    grid_i = src.FrequencyGrid.centered(centers[0], steps_i * spacing, 2 * steps_i + 1)
    grid_s = src.FrequencyGrid.centered(centers[1], steps_s * spacing, 2 * steps_s + 1)
    return grid_i, grid_s


def run_source_jsi(config, calibrate=False):
    """Source JSI dataset plus pair-probability / calibration report."""
    models = dispersion.load_sellmeier()
    crystal = config.crystal()
    pump = config.pump()
    consts = config.constants()
    out_dir = Path(config.output_dir)

    if pump.p_avg_w == 0.0:
        warnings.warn("p_avg_w = 0: the source amplitude is identically zero", stacklevel=2)
        spacing = config.bystander_spacing_rad_per_fs
        grid_i = src.FrequencyGrid.centered(config.idler_center_rad_per_fs, spacing, 3)
        grid_s = src.FrequencyGrid.centered(config.signal_center_rad_per_fs, spacing, 3)
    else:
        grid_i, grid_s = _source_grids(config, models)
    jsa = src.source_jsa(crystal, pump, consts, grid_i, grid_s, models=models)
    intensity = np.abs(jsa.amplitude) ** 2

    rows = []
    for j, w_i in enumerate(grid_i.values):
        for k, w_s in enumerate(grid_s.values):
            rows.append((float(w_i), float(w_s), float(intensity[j, k])))
    csv_path = _write_csv(
        out_dir / "source_jsi.csv",
        config,
        ("omega_i_rad_per_fs", "omega_s_rad_per_fs", "jsi"),
        rows,
        grids={"idler": grid_i, "signal": grid_s},
    )

    xi2 = src.pair_probability(jsa)
    peak_flat = int(np.argmax(intensity))
    peak_j, peak_k = divmod(peak_flat, grid_s.count)
    report = {
        "p_avg_w": pump.p_avg_w,
        "pair_probability": xi2,
        "peak_omega_i_rad_per_fs": float(grid_i.values[peak_j]),
        "peak_omega_s_rad_per_fs": float(grid_s.values[peak_k]),
        "grid_half_extent_i_rad_per_fs": float(grid_i.center - grid_i.start),
        "grid_half_extent_s_rad_per_fs": float(grid_s.center - grid_s.start),
    }
    if calibrate:
        power = src.calibrate_pump_power(
            0.1, crystal, pump, consts, grid_i, grid_s, models=models
        )
        report["calibrated_p_avg_w_for_xi2_0p1"] = power
    json_path = _write_json(out_dir / "source_report.json", config, report)
    return [csv_path, json_path]


def _conditional_jsi(psi, bins, n, probability):
    """Diagonal of the heralded state in the bystander frequency basis."""
    meas = (
        sw.TWO_PI**3 * psi.grid_b1.spacing * psi.grid_b2.spacing * psi.grid_sfg.spacing
    )
    total = np.zeros((psi.grid_b1.count, psi.grid_b2.count))
    for l in bins.slice_indices(n):
        total += np.abs(psi.amplitude[:, :, l]) ** 2
    return meas * total / probability


def _swap_outputs(config, psi, sfg_length_mm, out_dir):
    """Everything derived from one materialized three-frequency amplitude."""
    xi2 = sw.sfg_probability(psi)
    rep_rate_hz = config.rep_rate_ghz * 1e9
    bins = qs.MeasurementBinning.from_grid(psi.grid_sfg, config.n_bins, config.points_per_bin)
    spectrum = qs.herald_spectrum(psi, bins)

    metrics = []
    for n in range(bins.n_bins):
        metrics.append(
            qs.bin_metrics(psi, bins, n, rank_rtol=config.rank_rtol, rank_cap=config.rank_cap)
        )
    unresolved = qs.unresolved_metrics(
        psi, rank_rtol=config.rank_rtol, rank_cap=config.rank_cap
    )

    weights = [m.probability for m in metrics]
    averages = {
        "negativity": qs.weighted_average([m.negativity for m in metrics], weights),
        "purity": qs.weighted_average([m.purity for m in metrics], weights),
    }
    tag = f"swap_L{sfg_length_mm:g}mm"
    run_dir = Path(out_dir) / tag
    files = []

    rows = [
        (float(c), float(p)) for c, p in zip(bins.centers, spectrum)
    ]
    files.append(
        _write_csv(
            run_dir / "herald_spectrum.csv",
            config,
            ("bin_center_rad_per_fs", "probability"),
            rows,
            grids={"sfg": psi.grid_sfg},
        )
    )

    for n, m in enumerate(metrics):
        jsi = _conditional_jsi(psi, bins, n, m.probability)
        keep = jsi >= PSI_PRINT_THRESHOLD * jsi.max()
        rows = [
            (float(psi.grid_b1.values[j]), float(psi.grid_b2.values[k]), float(jsi[j, k]))
            for j, k in zip(*np.nonzero(keep))
        ]
        files.append(
            _write_csv(
                run_dir / f"conditional_jsi_bin{n}.csv",
                config,
                ("omega_b1_rad_per_fs", "omega_b2_rad_per_fs", "probability"),
                rows,
                grids={"b1": psi.grid_b1, "b2": psi.grid_b2},
            )
        )

    payload = {
        "length_mm": config.length_mm,
        "sfg_length_mm": sfg_length_mm,
        "xi2": xi2,
        "herald_rate_per_s": sw.herald_rate(xi2, rep_rate_hz),
        "false_event_rate_per_s": sw.false_event_rate(xi2, rep_rate_hz),
        "multi_pair_probability": sw.multi_pair_probability(config.gamma, xi2),
        "sfg_marginal_std_rad_per_fs": sw.sfg_marginal_std(psi),
        "bins": [
            {
                "center_rad_per_fs": float(c),
                "probability": m.probability,
                "purity": m.purity,
                "negativity": m.negativity,
                "rank_b1": m.rank_b1,
                "rank_b2": m.rank_b2,
                "compression_residual": m.compression_residual,
            }
            for c, m in zip(bins.centers, metrics)
        ],
        "unresolved": {
            "probability": unresolved.probability,
            "purity": unresolved.purity,
            "negativity": unresolved.negativity,
        },
        "averages": averages,
    }
    files.append(_write_json(run_dir / "metrics.json", config, payload))
    return payload, files


def export_psi(config, psi, path):
    """3-D amplitude dataset: entries above a printable threshold plus a
    sidecar with grids and quadrature metadata."""
    intensity = np.abs(psi.amplitude) ** 2
    peak = intensity.max()
    rows = []
    if peak > 0:
        keep = np.argwhere(intensity >= PSI_PRINT_THRESHOLD * peak)
        for j, k, l in keep:
            rows.append(
                (
                    float(psi.grid_b1.values[j]),
                    float(psi.grid_b2.values[k]),
                    float(psi.grid_sfg.values[l]),
                    float(intensity[j, k, l]),
                )
            )
    path = Path(path)
    csv_path = _write_csv(
        path,
        config,
        (
            "omega_b1_rad_per_fs",
            "omega_b2_rad_per_fs",
            "omega_sfg_rad_per_fs",
            "psi_squared",
        ),
        rows,
        grids={"b1": psi.grid_b1, "b2": psi.grid_b2, "sfg": psi.grid_sfg},
    )
    sidecar = _write_json(
        path.with_suffix(".json"),
        config,
        {
            "xi2": sw.sfg_probability(psi),
            "quadrature_points": psi.quadrature_points,
            "print_threshold": PSI_PRINT_THRESHOLD,
            "rows": len(rows),
        },
    )
    return [csv_path, sidecar]


def _build_sources(config, models):
    crystal = config.crystal()
    pump = config.pump()
    consts = config.constants()
    phi1 = src.source_jsa(crystal, pump, consts, *config.phi1_grids(), models=models)
    phi2 = src.source_jsa(crystal, pump, consts, *config.phi2_grids(), models=models)
    return phi1, phi2


def build_three_freq(config, sfg_length_mm, models=None, phis=None):
    models = models if models is not None else dispersion.load_sellmeier()
    phi1, phi2 = phis if phis is not None else _build_sources(config, models)
    return sw.three_freq_jsa(
        phi1,
        phi2,
        config.sfg_crystal(sfg_length_mm),
        config.constants(),
        config.bystander_grid(config.idler_center_rad_per_fs),
        config.bystander_grid(config.signal_center_rad_per_fs),
        config.sfg_grid(),
        quadrature_points=config.integration_points,
        models=models,
        threads=config.threads,
        max_elements=config.max_elements,
    )


def run_swap(config, sweep=None, export_amplitude=False):
    """Swap pipeline over the configured L_SFG values.

    Per value: three-frequency amplitude, herald spectrum, per-bin
    metrics, conditional JSIs, rates.  A sweep summary CSV keyed by
    L_SFG is written at the end."""
    models = dispersion.load_sellmeier()
    phis = _build_sources(config, models)
    lengths = tuple(sweep) if sweep is not None else config.sfg_sweep_mm
    out_dir = Path(config.output_dir)
    files = []
    summary = []
    for length in lengths:
        psi = build_three_freq(config, length, models=models, phis=phis)
        if export_amplitude:
            files.extend(
                export_psi(config, psi, out_dir / f"swap_L{length:g}mm" / "psi.csv")
            )
        payload, run_files = _swap_outputs(config, psi, length, out_dir)
        files.extend(run_files)
        summary.append(payload)
        del psi

    rows = [
        (
            float(p["sfg_length_mm"]),
            float(p["xi2"]),
            float(p["herald_rate_per_s"]),
            float(p["false_event_rate_per_s"]),
            float(p["sfg_marginal_std_rad_per_fs"]),
            float(p["averages"]["negativity"]),
            float(p["averages"]["purity"]),
            float(p["unresolved"]["negativity"]),
            float(p["unresolved"]["purity"]),
        )
        for p in summary
    ]
    files.append(
        _write_csv(
            out_dir / "sweep_summary.csv",
            config,
            (
                "sfg_length_mm",
                "xi2",
                "herald_rate_per_s",
                "false_event_rate_per_s",
                "sfg_marginal_std_rad_per_fs",
                "weighted_negativity",
                "weighted_purity",
                "unresolved_negativity",
                "unresolved_purity",
            ),
            rows,
        )
    )
    return summary, files


def run_rates(config, sweep=None):
    """Success/false/multi-pair rates per L_SFG without state metrics."""
    models = dispersion.load_sellmeier()
    phis = _build_sources(config, models)
    lengths = tuple(sweep) if sweep is not None else config.sfg_sweep_mm
    rep_rate_hz = config.rep_rate_ghz * 1e9
    rows = []
    for length in lengths:
        psi = build_three_freq(config, length, models=models, phis=phis)
        xi2 = sw.sfg_probability(psi)
        rows.append(
            (
                float(length),
                float(xi2),
                float(sw.herald_rate(xi2, rep_rate_hz)),
                float(sw.false_event_rate(xi2, rep_rate_hz)),
                float(sw.multi_pair_probability(config.gamma, xi2)),
                float(sw.sfg_marginal_std(psi)),
            )
        )
        del psi
    path = _write_csv(
        Path(config.output_dir) / "rates.csv",
        config,
        (
            "sfg_length_mm",
            "xi2",
            "herald_rate_per_s",
            "false_event_rate_per_s",
            "multi_pair_probability",
            "sfg_marginal_std_rad_per_fs",
        ),
        rows,
    )
    return rows, [path]


def run_toy(config, n_modes=None, etas=None, include_coherent=True):
    """Few-mode reference-state negativity surfaces."""
    n_list = tuple(n_modes) if n_modes is not None else tuple(range(2, 18))
    eta_list = (
        tuple(etas) if etas is not None else tuple(round(0.05 * k, 2) for k in range(1, 21))
    )
    if any(n < 2 for n in n_list):
        raise ConfigurationError(f"toy n_modes must be >= 2: {n_list}")
    if any(not 0 <= e <= 1 for e in eta_list):
        raise ConfigurationError(f"toy eta values must be in [0, 1]: {eta_list}")
    rows = []
    variants = ("incoherent", "coherent") if include_coherent else ("incoherent",)
    for variant in variants:
        for n in n_list:
            for eta in eta_list:
                neg = qs.toy_state_negativity(n, eta, coherent=(variant == "coherent"))
                rows.append((variant, n, float(eta), float(neg)))
    path = _write_csv(
        Path(config.output_dir) / "toy_negativity.csv",
        config,
        ("model", "n_modes", "eta", "negativity"),
        rows,
    )
    return rows, [path]
