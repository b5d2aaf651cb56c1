"""Command-line front end: config loading, overrides, and subcommands.

Subcommands map one-to-one onto the pipeline entry points plus a fast
`validate` self-check.  Flags override config-file keys; every run
prints the files it wrote and exits nonzero if any output failed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from . import dispersion
from . import phasematch as pm
from . import pipeline as pl
from . import quantum_state as qs
from . import swap as sw
from .config import load_config
from .errors import SfgSwapError
from .source import FrequencyGrid


def _float_list(text):
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sfgswap",
        description="Frequency-binned entanglement-swap simulator for SPDC photon pairs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", metavar="PATH", help="flat key = value configuration file")
    parser.add_argument(
        "--set",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        dest="overrides",
        help="override one configuration key (repeatable)",
    )
    parser.add_argument("--output-dir", metavar="DIR", help="directory for generated files")
    parser.add_argument("--threads", type=int, metavar="N", help="worker thread budget")

    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("source-jsi", help="source joint spectral intensity and pair probability")
    p.add_argument(
        "--calibrate",
        action="store_true",
        help="also report the pump power that gives pair probability 0.1",
    )

    p = commands.add_parser("swap", help="herald-bin purities and negativities over upconverter lengths")
    p.add_argument(
        "--sfg-length-mm",
        type=_float_list,
        metavar="L[,L...]",
        help="upconverter lengths to run instead of the configured sweep",
    )
    p.add_argument(
        "--export-amplitude",
        action="store_true",
        help="also write the three-frequency amplitude dataset per length",
    )

    p = commands.add_parser("rates", help="success and false-event rates per upconverter length")
    p.add_argument("--sfg-length-mm", type=_float_list, metavar="L[,L...]")

    p = commands.add_parser("toy", help="closed-form few-mode reference negativities")
    p.add_argument("--n-modes", type=_int_list, metavar="N[,N...]")
    p.add_argument("--eta", type=_float_list, metavar="E[,E...]")
    p.add_argument("--incoherent-only", action="store_true")

    commands.add_parser("validate", help="fast in-process self checks (prints pass/fail)")
    return parser


def _parse_overrides(args):
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise SfgSwapError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.output_dir is not None:
        overrides["output_dir"] = args.output_dir
    if args.threads is not None:
        overrides["threads"] = args.threads
    return overrides


def _validate_checks():
    """(name, callable) pairs; each callable raises on failure."""

    def dispersion_anchor():
        models = dispersion.load_sellmeier()
        n = dispersion.refractive_index(models["y"], 3.090)
        if not 1.5 < n < 2.5:
            raise AssertionError(f"n_y(3.090) = {n} outside the physical range")
        residual = pm.delta_k(
            pm.CrystalParams(length_um=500.0, poling_period_um=8.33),
            4.651,
            3.090,
            1.561,
            models,
        )
        if abs(residual) > 1e-4:
            raise AssertionError(f"design triple mismatch Delta k = {residual} rad/um")

    def bell_negativity():
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / np.sqrt(2)
        rho = qs.DensityMatrix(entries=np.outer(v, v.conj()), dim_b1=2, dim_b2=2)
        neg = qs.negativity(rho)
        if abs(neg - 0.5) > 1e-10:
            raise AssertionError(f"Bell negativity {neg} != 0.5")

    def toy_closed_form():
        neg = qs.toy_state_negativity(5, 0.3)
        if abs(neg - 0.5 * 0.3 * 4) > 1e-12:
            raise AssertionError(f"toy negativity {neg} != 0.6")

    def herald_partition():
        rng = np.random.default_rng(1)
        amp = rng.normal(size=(5, 4, 6)) + 1j * rng.normal(size=(5, 4, 6))
        psi = sw.ThreeFreqJsa(
            grid_b1=FrequencyGrid.centered(1.5, 0.05, 5),
            grid_b2=FrequencyGrid.centered(3.1, 0.05, 4),
            grid_sfg=FrequencyGrid.centered(4.65, 0.01, 6),
            amplitude=amp,
            quadrature_points=300,
        )
        bins = qs.MeasurementBinning.from_grid(psi.grid_sfg, 2, 3)
        total = float(np.sum(qs.herald_spectrum(psi, bins)))
        xi2 = sw.sfg_probability(psi)
        if abs(total - xi2) > 1e-12 * xi2:
            raise AssertionError(f"herald spectrum sum {total} != probability {xi2}")

    def dual_route_agreement():
        rng = np.random.default_rng(2)
        mat = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        entries = mat @ mat.conj().T
        entries /= np.trace(entries).real
        rho = qs.DensityMatrix(entries=entries, dim_b1=3, dim_b2=4)
        qs.negativity(rho)  # raises if the two internal routes disagree

    def config_round_trip():
        from .config import SimConfig, parse_config_text

        base = SimConfig()
        text = "\n".join(f"{k} = {v}" for k, v in base.as_items())
        again = parse_config_text(text)
        if again.config_hash() != base.config_hash():
            raise AssertionError("config text round trip changed the hash")

    return [
        ("dispersion data and design phase matching", dispersion_anchor),
        ("Bell-state negativity", bell_negativity),
        ("few-mode closed form", toy_closed_form),
        ("herald spectrum partition", herald_partition),
        ("negativity dual-route agreement", dual_route_agreement),
        ("config round trip", config_round_trip),
    ]


def run_validate():
    failures = 0
    for name, check in _validate_checks():
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report every failure uniformly
            failures += 1
            print(f"FAIL  {name}: {exc}")
        else:
            print(f"PASS  {name}")
    total = len(_validate_checks())
    print(f"{total - failures}/{total} checks passed")
    return 1 if failures else 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return run_validate()
        config = load_config(args.config, _parse_overrides(args))
        if args.command == "source-jsi":
            files = pl.run_source_jsi(config, calibrate=args.calibrate)
        elif args.command == "swap":
            _, files = pl.run_swap(
                config,
                sweep=args.sfg_length_mm,
                export_amplitude=args.export_amplitude,
            )
        elif args.command == "rates":
            _, files = pl.run_rates(config, sweep=args.sfg_length_mm)
        elif args.command == "toy":
            _, files = pl.run_toy(
                config,
                n_modes=args.n_modes,
                etas=args.eta,
                include_coherent=not args.incoherent_only,
            )
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
        for path in files:
            print(path)
        return 0
    except SfgSwapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
