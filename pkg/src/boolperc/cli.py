"""Command-line front end: reproducible experiments with CSV/JSON output.

Every output embeds the fully resolved configuration (seed included) and
the tool version, and reruns with the same configuration are byte
identical. Flag precedence: command line > config file > defaults.

Exit codes: 0 success, 1 runtime failure, 2 configuration error,
3 sizing refusal.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .branching import classify, mean_matrix, perron_root_log
from .embedding import (
    DegenerateRegionError,
    EmbeddingGeometry,
    bernoulli_survival,
    branch_parameters,
    certify_inclusions,
    estimate_g_plus,
    rate_limits,
    rate_slopes,
    region_volumes,
    simulate_oriented,
)
from .estimator import bisect_threshold, mixture_sweep
from .measures import ModelParams, RadiusMeasure, dirac, make_mu_d, theorem_range
from .percolation import write_cluster_csv
from .sampling import SizingError, cube_window, sample_boolean_model, write_csv


class ConfigError(ValueError):
    """Invalid run configuration."""


def parse_measure(spec: str, dimension: int) -> RadiusMeasure:
    """Measure mini-language: dirac:R | mix:R1=M1,R2=M2 | mud:RHO."""
    try:
        kind, _, rest = spec.partition(":")
        if kind == "dirac":
            return dirac(float(rest))
        if kind == "mix":
            atoms = []
            for part in rest.split(","):
                r, _, m = part.partition("=")
                atoms.append((float(r), float(m)))
            return RadiusMeasure(tuple(atoms))
        if kind == "mud":
            return make_mu_d(float(rest), dimension)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad measure spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown measure kind in {spec!r} (want dirac:|mix:|mud:)")


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x != ""]


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x != ""]


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(config: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _write_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonify(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge CLI > config file > defaults into one resolved dict."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        unknown = set(file_conf) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        merged.update(file_conf)
    for key in defaults:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
    missing = [k for k, v in merged.items() if v is None]
    if missing:
        raise ConfigError(f"missing required options: {sorted(missing)}")
    return merged


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("BOOLPERC_THREADS", "1")))
    except ValueError:
        return 1


# --- subcommand implementations ---------------------------------------------


def _cmd_sample(conf: dict, out: str | None, as_clusters: bool) -> None:
    nu = parse_measure(conf["measure"], conf["d"])
    window = cube_window(conf["d"], conf["L"] * nu.max_radius, padding=nu.max_radius)
    params = ModelParams(conf["d"], conf["intensity"], nu)
    config_echo = dict(conf, version=__version__)
    cfg = sample_boolean_model(params, window, conf["seed"], replicate=conf["replicate"])
    buf = io.StringIO()
    buf.write("# " + json.dumps(config_echo, sort_keys=True) + "\n")
    if as_clusters:
        write_cluster_csv(cfg, buf)
    else:
        write_csv(cfg, buf)
    _write_text(buf.getvalue(), out)


def _cmd_gw(conf: dict, out: str | None) -> None:
    dims = conf["d"] if conf["d"] else list(range(1, conf["d_max"] + 1))
    rows = [
        {
            "kappa": conf["kappa"],
            "rho": conf["rho"],
            "d": d,
            "log_r_d": perron_root_log(mean_matrix(conf["kappa"], conf["rho"], d)),
            "class": classify(conf["kappa"], conf["rho"], d),
        }
        for d in dims
    ]
    _emit({"version": __version__, "config": conf, "results": rows}, out)


def _cmd_embed_volumes(conf: dict, out: str | None) -> None:
    rows = []
    for d in conf["d"]:
        g = EmbeddingGeometry(d, conf["rho"], conf["kappa"])
        rv = region_volumes(g)
        rows.append(
            {
                "d": d,
                "log_c1": rv.log_c1,
                "log_c2": rv.log_c2,
                "log_d2pp": rv.log_d2pp,
                "log_d2": rv.log_d2,
                "log_s_cone": rv.log_s_cone,
                "tails_disjoint": g.tails_disjoint,
                "theorem_range": g.theorem_range,
            }
        )
    _emit({"version": __version__, "config": conf, "results": rows}, out)


def _cmd_embed_bounds(conf: dict, out: str | None) -> None:
    rows = []
    for d in conf["d"]:
        g = EmbeddingGeometry(d, conf["rho"], conf["kappa"])
        bp = branch_parameters(g)
        cert = certify_inclusions(g)
        rows.append(
            {
                "d": d,
                "log_alpha1": bp.log_alpha1,
                "log_alpha2": bp.log_alpha2,
                "log_eta": bp.log_eta,
                "log_interference": bp.log_interference,
                "inclusion1": cert.inclus1,
                "inclusion2": cert.inclus2,
                "margin1": cert.margin1,
                "margin2": cert.margin2,
            }
        )
    payload = {
        "version": __version__,
        "config": conf,
        "rate_limits": rate_limits(conf["rho"], conf["kappa"]),
        "results": rows,
    }
    _emit(payload, out)


def _cmd_embed_gplus(conf: dict, out: str | None) -> None:
    g = EmbeddingGeometry(conf["d"], conf["rho"], conf["kappa"])
    x0 = np.array(_parse_floats(conf["x0"])) if conf["x0"] else None
    est = estimate_g_plus(g, x0=x0, replicates=conf["replicates"], seed=conf["seed"])
    bp = branch_parameters(g)
    results = {
        "p_hat": est.p_hat,
        "stderr": est.stderr,
        "replicates": est.replicates,
        "truncation_radius": est.truncation_radius,
        "mean_count_small": est.mean_count_small,
        "mean_count_large": est.mean_count_large,
        "analytic_lower_bound": 1.0
        - math.exp(-math.exp(min(bp.log_eta, 709.0)))
        - math.exp(bp.log_interference),
    }
    _emit({"version": __version__, "config": conf, "results": results}, out)


def _cmd_oriented(conf: dict, out: str | None) -> None:
    if conf["mode"] == "bernoulli":
        rows = []
        for k, p in enumerate(conf["p"]):
            freq, stderr = bernoulli_survival(p, conf["n_max"], conf["runs"], seed=conf["seed"] + k)
            rows.append(
                {"p": p, "runs": conf["runs"], "frequency": freq, "stderr": stderr}
            )
        _emit({"version": __version__, "config": conf, "results": rows}, out)
        return
    g = EmbeddingGeometry(conf["d"], conf["rho"], conf["kappa"])
    outcome = simulate_oriented(
        conf["p_floor"], conf["n_max"], seed=conf["seed"], mode="embedded", geometry=g
    )
    chain = (
        [{"center": [float(v) for v in b.center], "radius": b.radius} for b in outcome.chain]
        if outcome.chain
        else []
    )
    results = {
        "survival": outcome.survival,
        "reached_level": outcome.reached_level,
        "leftmost_path": [list(site) for site in outcome.leftmost_path],
        "chain": chain,
        "chain_sites": [list(s) for s in outcome.chain_sites] if outcome.chain_sites else [],
        "chain_verified": outcome.chain_verified,
        "theorem_range": g.theorem_range,
    }
    _emit({"version": __version__, "config": conf, "results": results}, out)


_SWEEP_HEADER = [
    "d", "rho", "alpha", "lambda_hat", "lambda_lo", "lambda_hi",
    "lambda_tilde", "c_hat", "L", "replicates", "seed",
]


def _threshold_json(est, conf: dict) -> dict:
    return {
        "lambda_hat": est.lam_hat,
        "lambda_lo": est.lam_lo,
        "lambda_hi": est.lam_hi,
        "stderr": est.stderr,
        "lambda_tilde": est.lambda_tilde,
        "c_hat": est.c_hat,
        "finite_size_warning": est.finite_size_warning,
        "curve": [
            {"lambda": p.lam, "frequency": p.frequency, "stderr": p.stderr, "replicates": p.replicates}
            for p in est.curve
        ],
    }


def _cmd_threshold(conf: dict, out: str | None, csv_out: str | None) -> None:
    nu = parse_measure(conf["measure"], conf["d"])
    est = bisect_threshold(
        conf["d"],
        nu,
        side=conf["L"],
        rel_tol=conf["rel_tol"],
        replicates=conf["replicates"],
        seed=conf["seed"],
        threads=conf["threads"],
    )
    _emit({"version": __version__, "config": conf, "results": _threshold_json(est, conf)}, out)
    if csv_out:
        radii = nu.radii
        rho = float(radii.max() / radii.min()) if len(radii) > 1 else float(radii[0])
        row = [
            conf["d"], repr(rho), "", repr(est.lam_hat), repr(est.lam_lo), repr(est.lam_hi),
            repr(est.lambda_tilde), repr(est.c_hat), repr(float(conf["L"])),
            conf["replicates"], conf["seed"],
        ]
        _write_text(_csv_text(conf, _SWEEP_HEADER, [row]), csv_out)


def _cmd_sweep(conf: dict, out: str | None, csv_out: str | None) -> None:
    rows = mixture_sweep(
        conf["d"],
        conf["rho"],
        conf["alphas"],
        side=conf["L"],
        rel_tol=conf["rel_tol"],
        replicates=conf["replicates"],
        seed=conf["seed"],
        threads=conf["threads"],
    )
    json_rows = []
    csv_rows = []
    for row in rows:
        est = row["estimate"]
        json_rows.append(
            {"alpha": row["alpha"], **_threshold_json(est, conf)}
        )
        csv_rows.append(
            [
                row["d"], repr(row["rho"]), repr(row["alpha"]), repr(row["lambda_hat"]),
                repr(row["lambda_lo"]), repr(row["lambda_hi"]), repr(row["lambda_tilde"]),
                repr(row["c_hat"]), repr(float(row["L"])), row["replicates"], row["seed"],
            ]
        )
    _emit({"version": __version__, "config": conf, "results": json_rows}, out)
    if csv_out:
        _write_text(_csv_text(conf, _SWEEP_HEADER, csv_rows), csv_out)


# --- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boolperc",
        description="Continuum-percolation experiments on Boolean models with discrete radii",
    )
    parser.add_argument("--version", action="version", version=f"boolperc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--config", type=str, default=None, help="JSON file with option defaults")
        p.add_argument("--out", type=str, default=None, help="output path (default stdout)")

    p = sub.add_parser("sample", help="sample a Boolean model, CSV of balls")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--measure", type=str, default=None)
    p.add_argument("--intensity", type=float, default=None)
    p.add_argument("--L", type=float, default=None, help="cube side in units of the largest radius")
    p.add_argument("--replicate", type=int, default=None)

    p = sub.add_parser("clusters", help="sample and export per-cluster statistics")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--measure", type=str, default=None)
    p.add_argument("--intensity", type=float, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--replicate", type=int, default=None)

    p = sub.add_parser("threshold", help="bisect the crossing threshold")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--measure", type=str, default=None)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--csv", type=str, default=None, help="also write the CSV row here")

    p = sub.add_parser("sweep", help="threshold sweep over mixture weights")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--alphas", type=str, default=None, help="comma-separated weights in [0,1]")
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--csv", type=str, default=None)

    p = sub.add_parser("gw", help="branching classification per dimension")
    common(p)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--d", type=str, default=None, help="comma-separated dimensions")
    p.add_argument("--d-max", dest="d_max", type=int, default=None)

    p = sub.add_parser("embed-volumes", help="embedding region volumes (logs)")
    common(p)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--d", type=str, default=None)

    p = sub.add_parser("embed-bounds", help="branch parameters and inclusion margins")
    common(p)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--d", type=str, default=None)

    p = sub.add_parser("embed-gplus", help="Monte Carlo of the two-hop link event")
    common(p)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--x0", type=str, default=None, help="comma-separated seed point")

    p = sub.add_parser("oriented", help="oriented percolation (bernoulli or embedded)")
    common(p)
    p.add_argument("--mode", type=str, choices=["bernoulli", "embedded"], default=None)
    p.add_argument("--p", type=str, default=None, help="comma-separated edge probabilities")
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--p-floor", dest="p_floor", type=float, default=None)

    return parser


def _run(args: argparse.Namespace) -> None:
    cmd = args.command
    if cmd in ("sample", "clusters"):
        conf = _resolve(
            args,
            {
                "d": 2, "measure": "dirac:1", "intensity": 0.4, "L": 20.0,
                "replicate": 0, "seed": 0, "threads": 1,
            },
        )
        _cmd_sample(conf, args.out, as_clusters=(cmd == "clusters"))
    elif cmd == "threshold":
        conf = _resolve(
            args,
            {
                "d": 2, "measure": "dirac:1", "L": 30.0, "rel_tol": 0.01,
                "replicates": 400, "seed": 0, "threads": _default_threads(),
            },
        )
        _cmd_threshold(conf, args.out, args.csv)
    elif cmd == "sweep":
        args.alphas = _parse_floats(args.alphas) if args.alphas is not None else None
        conf = _resolve(
            args,
            {
                "d": 2, "rho": 2.0, "alphas": [0.0, 0.5, 1.0], "L": 30.0,
                "rel_tol": 0.01, "replicates": 400, "seed": 0,
                "threads": _default_threads(),
            },
        )
        _cmd_sweep(conf, args.out, args.csv)
    elif cmd == "gw":
        args.d = _parse_ints(args.d) if args.d is not None else None
        conf = _resolve(
            args,
            {"rho": 1.5, "kappa": 0.9, "d": [], "d_max": 100, "seed": 0, "threads": 1},
        )
        _cmd_gw(conf, args.out)
    elif cmd == "embed-volumes":
        args.d = _parse_ints(args.d) if args.d is not None else None
        conf = _resolve(
            args,
            {"rho": 1.5, "kappa": 1.0, "d": [10, 100, 500], "seed": 0, "threads": 1},
        )
        _cmd_embed_volumes(conf, args.out)
    elif cmd == "embed-bounds":
        args.d = _parse_ints(args.d) if args.d is not None else None
        conf = _resolve(
            args,
            {"rho": 1.5, "kappa": 0.99, "d": [100, 200, 400, 800], "seed": 0, "threads": 1},
        )
        _cmd_embed_bounds(conf, args.out)
    elif cmd == "embed-gplus":
        conf = _resolve(
            args,
            {
                "rho": 1.5, "kappa": 0.9, "d": 8, "replicates": 2000,
                "x0": "", "seed": 0, "threads": 1,
            },
        )
        _cmd_embed_gplus(conf, args.out)
    elif cmd == "oriented":
        args.p = _parse_floats(args.p) if args.p is not None else None
        conf = _resolve(
            args,
            {
                "mode": "bernoulli", "p": [0.7], "n_max": 100, "runs": 200,
                "rho": 1.5, "kappa": 0.9, "d": 6, "p_floor": 0.0,
                "seed": 0, "threads": 1,
            },
        )
        _cmd_oriented(conf, args.out)
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _run(args)
    except (ConfigError, ValueError, DegenerateRegionError) as exc:
        sys.stderr.write(json.dumps({"error": {"category": "config", "message": str(exc)}}) + "\n")
        return 2
    except SizingError as exc:
        sys.stderr.write(json.dumps({"error": {"category": "sizing", "message": str(exc)}}) + "\n")
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        sys.stderr.write(json.dumps({"error": {"category": "runtime", "message": str(exc)}}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
