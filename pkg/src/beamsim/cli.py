"""Command-line driver: scenario configuration, deterministic batch runs,
and result serialization.

Subcommands
-----------
blackbody   closed-form source/beam radiometry report
simulate    generate and serialize an ensemble of field traces
spectrum    ensemble-averaged periodogram of a generated or stored ensemble
g2          normalized intensity autocorrelation (optionally after filtering)
sweep       g2(0) of a filtered jittered laser versus filter width
qslb-demo   stationarity + periodogram-law verdict table contrasting the
            frequency-mode product construction with genuine stationary beams

Exit codes: 0 success, 2 usage error, 3 numerical/configuration error,
4 I/O error.  Every output file embeds the tool version, the fully resolved
configuration, and the master seed; re-running a command with the embedded
configuration reproduces the file byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigurationError, DomainError
from . import radiometry
from .fieldgen import FAMILIES, BeamModelSpec, generate_ensemble
from .photonics import FilterSpec, apply_filter, filtered_laser_sweep, g2
from .spectral import (
    periodogram_distribution_test,
    report_to_json,
    spectrum,
    stationarity_test,
)
from .traceio import read_trace, write_trace

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


# ---------------------------------------------------------------------------
# configuration plumbing

def _parse_config_file(path: str) -> dict[str, str]:
    """key=value lines; blank lines and #-comments ignored."""
    out: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill namespace entries from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    cfg = _parse_config_file(args.config)
    explicit = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    types = {a.dest: a.type for a in args.parser._actions}
    for key, raw in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("config", "func", "parser") or dest not in vars(args):
            raise ConfigurationError(f"config key {key!r} unknown for this command")
        if "--" + key.replace("_", "-") in explicit:
            continue
        conv = types.get(dest) or str
        try:
            setattr(args, dest, conv(raw))
        except ValueError as exc:
            raise ConfigurationError(f"config key {key!r}: {exc}") from exc


def _resolved_config(args: argparse.Namespace) -> dict:
    skip = {"func", "parser", "config", "out", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        args.parser.error(f"missing required option(s): {flags}")


def _metadata(args: argparse.Namespace) -> dict:
    meta = {"tool_version": __version__}
    meta.update(_resolved_config(args))
    return meta


def _emit(args: argparse.Namespace, payload_json: dict, csv_writer) -> None:
    """Route a result to --out (or stdout) in the requested format."""
    if args.format == "json":
        body = {"tool_version": __version__, "config": _resolved_config(args)}
        body.update(payload_json)
        if args.out:
            report_to_json(args.out, body)
        else:
            print(json.dumps(body, indent=2, sort_keys=True))
    else:
        if args.out:
            csv_writer(args.out)
        else:
            import tempfile

            with tempfile.NamedTemporaryFile("r", suffix=".csv", delete=False) as fh:
                tmp = fh.name
            csv_writer(tmp)
            sys.stdout.write(Path(tmp).read_text())
            Path(tmp).unlink()


def _write_kv_csv(path, rows, meta: dict) -> None:
    with open(path, "w", newline="") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        fh.write("quantity,value,formula\n")
        for name, value, formula in rows:
            fh.write(f"{name},{value!r},{formula}\n")


def _model_from_args(args: argparse.Namespace) -> BeamModelSpec:
    _require(args, "family", "nu", "gamma")
    return BeamModelSpec(
        family=args.family,
        nu=args.nu,
        gamma=args.gamma,
        jitter_band=getattr(args, "jitter_band", 0.0) or 0.0,
        jitter_corr_time=getattr(args, "jitter_corr_time", None),
    )


def _grid_from_args(args: argparse.Namespace) -> tuple[float, int]:
    _require(args, "dt", "duration")
    n = int(round(args.duration / args.dt))
    if n < 2:
        raise ConfigurationError("duration must cover at least 2 samples")
    return args.dt, n


def _ensemble_from_args(args: argparse.Namespace):
    """Traces from --in files (sorted) or generated inline."""
    if getattr(args, "in_dir", None):
        paths = sorted(Path(args.in_dir).glob("*.ftrc"))
        if not paths:
            raise ConfigurationError(f"no .ftrc traces under {args.in_dir}")
        return (read_trace(p) for p in paths)
    model = _model_from_args(args)
    dt, n = _grid_from_args(args)
    _require(args, "seed", "traces")
    return generate_ensemble(model, dt, n, args.seed, args.traces)


# ---------------------------------------------------------------------------
# subcommands

def cmd_blackbody(args: argparse.Namespace) -> int:
    P, A, Gamma, lam0 = args.power, args.area, args.bandwidth, args.wavelength
    coll = radiometry.collimation_efficiency(P, A)
    filt = radiometry.filtering_efficiency(P, A, Gamma, lam0)
    area_peak = radiometry.filament_area(P, lam0)
    rows = [
        ("T_prime_K", coll.temperature, "sqrt(12 hbar P / pi) / k_B"),
        ("lambda_prime_max_m", coll.lambda_max, "2 pi hbar c / (x k_B T_prime)"),
        ("collimation_efficiency_approx", coll.approximate, "lambda_prime_max^2 / A"),
        ("collimation_efficiency_exact", coll.exact, "P_collimated(T_prime) / P_radiated(A, T_prime)"),
        ("T_doubleprime_K", filt.temperature, "4 P / (k_B Gamma)"),
        ("lambda_doubleprime_max_m", radiometry.wien_peak(filt.temperature),
         "2 pi hbar c / (x k_B T_doubleprime)"),
        ("nu", filt.nu, "4 P / (hbar omega0 Gamma)"),
        ("filtering_efficiency_total", filt.total,
         "(lambda_doubleprime_max^2 / A) * (Gamma / omega_doubleprime_max)"),
        ("filtering_efficiency_log10_total", filt.log10_total, "log10 of the above"),
        ("filtering_factor_geometric", filt.geometric, "lambda0^2 / A"),
        ("filtering_factor_spectral", filt.spectral, "Gamma / omega0"),
        ("filtering_factor_brightness", filt.brightness, "nu^-3"),
        ("filtering_efficiency_product", filt.product, "geometric * spectral * brightness"),
        ("filtering_efficiency_log10_product", filt.log10_product, "log10 of the above"),
        ("filament_area_for_peak_m2", area_peak, "2.37 P lambda_max^4 / (c^2 hbar)"),
    ]
    payload = {"report": {name: value for name, value, _ in rows},
               "formulas": {name: formula for name, _, formula in rows}}
    _emit(args, payload, lambda p: _write_kv_csv(p, rows, _metadata(args)))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _model_from_args(args)
    dt, n = _grid_from_args(args)
    _require(args, "seed", "traces", "out")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(5, len(str(args.traces - 1)))
    flux_sum = 0.0
    files = []
    for trace in generate_ensemble(model, dt, n, args.seed, args.traces):
        path = out_dir / f"trace_{trace.trace_index:0{width}d}.ftrc"
        write_trace(trace, path)
        files.append(path.name)
        flux_sum += float(trace.intensity().mean())
    mean_flux = flux_sum / args.traces
    manifest = {
        "tool_version": __version__,
        "config": _resolved_config(args),
        "files": files,
        "mean_flux": mean_flux,
        "expected_flux": model.mean_flux,
        "degenerate": model.nu == 0.0,
    }
    report_to_json(out_dir / "run.json", manifest)
    tag = " (degenerate: nu = 0, zero field)" if model.nu == 0.0 else ""
    print(f"wrote {args.traces} traces to {out_dir}{tag}")
    print(f"mean flux {mean_flux:.6g}  expected nu*Gamma/4 = {model.mean_flux:.6g}")
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    est = spectrum(_ensemble_from_args(args))
    payload = {"spectrum": est.to_json_dict()}
    _emit(args, payload, lambda p: est.to_csv(p, _metadata(args)))
    return EXIT_OK


def cmd_g2(args: argparse.Namespace) -> int:
    traces = _ensemble_from_args(args)
    burn_in = args.burn_in
    if args.filter_fwhm is not None:
        filt = FilterSpec(center_detuning=args.filter_center, fwhm=args.filter_fwhm)
        if burn_in is None:
            burn_in = filt.suggested_burn_in()
        traces = (apply_filter(t, filt) for t in traces)
    if burn_in is None:
        burn_in = 0.0
    tau_grid = [float(x) for x in args.taus.split(",")]
    est = g2(traces, tau_grid, burn_in=burn_in)
    payload = {"g2": {"tau": est.tau.tolist(), "values": est.values.tolist(),
                      "std_errors": est.std_errors.tolist(),
                      "ensemble_size": est.ensemble_size}}
    _emit(args, payload, lambda p: est.to_csv(p, _metadata(args)))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    _require(args, "nu", "gamma", "seed", "traces")
    dt, n = _grid_from_args(args)
    jitter_band = args.jitter_band if args.jitter_band is not None else 100.0 * args.gamma
    jitter_corr_time = (args.jitter_corr_time if args.jitter_corr_time is not None
                        else 1.5 / args.gamma)
    model = BeamModelSpec(family="jittered_laser", nu=args.nu, gamma=args.gamma,
                          jitter_band=jitter_band, jitter_corr_time=jitter_corr_time)
    fwhms = [float(x) * args.gamma for x in args.fwhms.split(",")]
    rows = filtered_laser_sweep(model, fwhms, dt, n, args.seed, args.traces,
                                center_detuning=args.filter_center)
    payload = {"sweep": [{"fwhm": r.fwhm, "value": r.g2_zero, "std_error": r.std_error,
                          "ensemble_size": r.ensemble_size} for r in rows]}

    def write_csv(path):
        meta = _metadata(args)
        with open(path, "w", newline="") as fh:
            for key in sorted(meta):
                fh.write(f"# {key}={meta[key]}\n")
            fh.write("fwhm,value,std_error,ensemble_size\n")
            for r in rows:
                fh.write(f"{r.fwhm!r},{r.g2_zero!r},{r.std_error!r},{r.ensemble_size}\n")

    _emit(args, payload, write_csv)
    return EXIT_OK


def cmd_qslb_demo(args: argparse.Namespace) -> int:
    _require(args, "nu", "gamma", "seed", "traces")
    dt, n = _grid_from_args(args)
    results = []
    for family in ("thermal", "laser", "kspace_product"):
        model = BeamModelSpec(family=family, nu=args.nu, gamma=args.gamma)
        stat = stationarity_test(
            generate_ensemble(model, dt, n, args.seed, args.traces),
            n_windows=args.windows, significance=args.significance)
        law = periodogram_distribution_test(
            generate_ensemble(model, dt, n, args.seed, args.traces),
            detuning=0.0, significance=args.significance)
        results.append({
            "family": family,
            "stationarity_p": stat.p_value,
            "stationarity_passed": stat.passed,
            "periodogram_p": law.p_value,
            "periodogram_passed": law.passed,
            "verdict": "stationary" if (stat.passed and law.passed) else "rejected",
        })
    payload = {"results": results}

    def write_csv(path):
        meta = _metadata(args)
        with open(path, "w", newline="") as fh:
            for key in sorted(meta):
                fh.write(f"# {key}={meta[key]}\n")
            fh.write("family,stationarity_p,stationarity_passed,"
                     "periodogram_p,periodogram_passed,verdict\n")
            for r in results:
                fh.write(f"{r['family']},{r['stationarity_p']!r},{r['stationarity_passed']},"
                         f"{r['periodogram_p']!r},{r['periodogram_passed']},{r['verdict']}\n")

    _emit(args, payload, write_csv)
    for r in results:
        print(f"{r['family']:<16} {r['verdict']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser construction

def _add_common(sub: argparse.ArgumentParser, *, model: bool = True) -> None:
    sub.add_argument("--config", type=str, default=None,
                     help="key=value config file; explicit flags override")
    sub.add_argument("--out", type=str, default=None, help="output file path")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    if model:
        sub.add_argument("--seed", type=int, default=None, help="master RNG seed")
        sub.add_argument("--traces", type=int, default=None, help="ensemble size")
        sub.add_argument("--dt", type=float, default=None, help="sample spacing, s")
        sub.add_argument("--duration", type=float, default=None, help="trace length, s")
        sub.add_argument("--nu", type=float, default=None,
                         help="photons per coherence time (dimensionless)")
        sub.add_argument("--gamma", type=float, default=None, help="linewidth, 1/s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamsim",
        description="Stochastic-optics beam simulation and analysis toolkit.")
    parser.add_argument("--version", action="version", version=f"beamsim {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("blackbody", help="closed-form radiometry report")
    _add_common(p, model=False)
    p.add_argument("--power", type=float, default=0.1, help="beam power, W")
    p.add_argument("--area", type=float, default=15e-6, help="filament area, m^2")
    p.add_argument("--bandwidth", type=float, default=1e7, help="filter linewidth Gamma, 1/s")
    p.add_argument("--wavelength", type=float, default=1e-6, help="carrier wavelength, m")
    p.set_defaults(func=cmd_blackbody, parser=p)

    p = subs.add_parser("simulate", help="generate and store an ensemble of traces")
    _add_common(p)
    p.add_argument("--family", choices=FAMILIES, default=None)
    p.add_argument("--jitter-band", type=float, default=0.0, help="Delta omega, rad/s")
    p.add_argument("--jitter-corr-time", type=float, default=None, help="s")
    p.set_defaults(func=cmd_simulate, parser=p)

    p = subs.add_parser("spectrum", help="ensemble-averaged periodogram")
    _add_common(p)
    p.add_argument("--family", choices=FAMILIES, default=None)
    p.add_argument("--jitter-band", type=float, default=0.0)
    p.add_argument("--jitter-corr-time", type=float, default=None)
    p.add_argument("--in", dest="in_dir", type=str, default=None,
                   help="directory of stored .ftrc traces (instead of inline generation)")
    p.set_defaults(func=cmd_spectrum, parser=p)

    p = subs.add_parser("g2", help="normalized intensity autocorrelation")
    _add_common(p)
    p.add_argument("--family", choices=FAMILIES, default=None)
    p.add_argument("--jitter-band", type=float, default=0.0)
    p.add_argument("--jitter-corr-time", type=float, default=None)
    p.add_argument("--in", dest="in_dir", type=str, default=None)
    p.add_argument("--taus", type=str, default="0.0",
                   help="comma-separated lag values, s (multiples of dt)")
    p.add_argument("--filter-fwhm", type=float, default=None,
                   help="apply a Lorentzian filter of this FWHM before g2")
    p.add_argument("--filter-center", type=float, default=0.0,
                   help="filter center detuning, rad/s")
    p.add_argument("--burn-in", type=float, default=None,
                   help="leading margin excluded from analysis, s")
    p.set_defaults(func=cmd_g2, parser=p)

    p = subs.add_parser("sweep", help="filtered jittered-laser g2(0) vs filter width")
    _add_common(p)
    p.add_argument("--jitter-band", type=float, default=None,
                   help="Delta omega, rad/s (default 100*gamma)")
    p.add_argument("--jitter-corr-time", type=float, default=None,
                   help="s (default 1.5/gamma)")
    p.add_argument("--fwhms", type=str, default="1e4,100,10,0.1",
                   help="comma-separated filter FWHMs in units of gamma")
    p.add_argument("--filter-center", type=float, default=0.0)
    p.set_defaults(func=cmd_sweep, parser=p)

    p = subs.add_parser("qslb-demo",
                        help="stationarity + periodogram-law verdicts for "
                             "thermal, laser, and frequency-mode-product ensembles")
    _add_common(p)
    p.add_argument("--windows", type=int, default=8, help="windows per trace")
    p.add_argument("--significance", type=float, default=1e-3)
    p.set_defaults(func=cmd_qslb_demo, parser=p)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(args, argv)
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors / --help
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    except (DomainError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
