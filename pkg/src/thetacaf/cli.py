"""Command-line interface.

Subcommands: theta, flatness, caf-decode, caf-surface, caf-rate, thm2,
sumlattice, probe, catalog, validate. Tabular output is CSV with a
leading ``# config: {...}`` comment recording the resolved run
configuration, so reruns are byte-identical and self-describing.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import catalog
from .errors import (
    ConfigError,
    EnumerationBudgetExceeded,
    ThetacafError,
    UnknownLattice,
)
from .cafsim import (
    build_decomposition,
    computation_rate,
    ml_decode,
    mmse_alpha,
    optimal_coeffs,
    received_signal,
    sample_channel,
    scaled_equivalence_check,
    sum_lattice_probe,
)
from .lattice import (
    Lattice,
    build_nested_code,
    load_lattice_file,
    minimal_norm,
    scaled,
)
from .theta import (
    baseline_for_entry,
    flatness_factor,
    sigma2_to_q,
    theta_approx,
    theta_closed_form,
    theta_exact,
    theta_form_coefficients,
)

__all__ = ["main"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _parse_grid(text: str) -> list[float]:
    """Grid syntax start:stop:step (inclusive stop within half a step)."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ConfigError(f"grid must be value or start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise ConfigError("grid step must be positive")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return [start + i * step for i in range(max(count, 0))]


def _resolve_lattice(args) -> tuple[str, object]:
    """Returns (label, CatalogEntry or Lattice) from --lattice/--file."""
    if getattr(args, "file", None):
        lat = load_lattice_file(args.file)
        return lat.name or args.file, lat
    if not getattr(args, "lattice", None):
        raise ConfigError("--lattice or --file is required")
    entry = catalog.get(args.lattice, getattr(args, "dim", None))
    return entry.name, entry


def _entry_lattice(obj) -> Lattice:
    return obj if isinstance(obj, Lattice) else obj.lattice()


def _open_out(args):
    if getattr(args, "out", None):
        return open(args.out, "w")
    return sys.stdout


def _emit_csv(args, config: dict, header: list[str], rows: list[list]) -> None:
    fh = _open_out(args)
    try:
        fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def _emit_json(args, payload) -> None:
    fh = _open_out(args)
    try:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def _sigma2_grid(args) -> list[float]:
    if args.sigma2 is None:
        raise ConfigError("--sigma2 is required")
    return _parse_grid(args.sigma2)


# --- subcommand handlers ----------------------------------------------------

def cmd_theta(args) -> int:
    label, obj = _resolve_lattice(args)
    config = {
        "command": "theta", "lattice": label, "mode": args.mode,
        "q": args.q, "sigma2": args.sigma2, "r_max": args.r_max,
    }
    rows = []
    if args.mode == "coefficients":
        if isinstance(obj, Lattice) or obj.theta_form is None:
            lat = _entry_lattice(obj)
            series = theta_exact(lat, float(args.r_max))
            coeffs = {r: c for r, c in sorted(series.terms.items())}
        else:
            coeffs = theta_form_coefficients(
                obj.theta_form, obj.dim, int(args.r_max)
            )
        _emit_csv(args, config, ["sqnorm", "count"],
                  [[r, c] for r, c in sorted(coeffs.items())])
        return 0
    if args.mode in ("closed", "all", "baseline") and isinstance(obj, Lattice):
        raise ConfigError(
            f"mode {args.mode!r} needs a catalog lattice; "
            "use --mode exact/approx/coefficients with --file"
        )
    if args.q is not None:
        qs = _parse_grid(args.q)
    else:
        qs = [sigma2_to_q(s) for s in _sigma2_grid(args)]
    for q in qs:
        row = [q]
        if args.mode in ("exact", "all"):
            lat = _entry_lattice(obj)
            row.append(theta_exact(lat, float(args.r_max)).evaluate(q))
        if args.mode in ("closed", "all"):
            row.append(theta_closed_form(obj, q))
        if args.mode in ("approx", "all"):
            if isinstance(obj, Lattice):
                lam1, _ = minimal_norm(obj)
                n, vol = obj.dim, obj.volume
            else:
                lam1, n, vol = obj.lambda1, obj.dim, obj.volume
            row.append(theta_approx(q, n, lam1, vol).value)
        if args.mode == "baseline":
            row.append(baseline_for_entry(obj, q))
        rows.append(row)
    header = {"exact": ["q", "theta_exact"], "closed": ["q", "theta_closed"],
              "approx": ["q", "theta_approx"], "baseline": ["q", "theta_baseline"],
              "all": ["q", "theta_exact", "theta_closed", "theta_approx"]}[args.mode]
    _emit_csv(args, config, header, rows)
    return 0


def cmd_flatness(args) -> int:
    label, obj = _resolve_lattice(args)
    lat = _entry_lattice(obj)
    sigmas = _sigma2_grid(args)
    config = {"command": "flatness", "lattice": label,
              "sigma2": args.sigma2, "mode": args.mode}
    rows = []
    for s in sigmas:
        pt = flatness_factor(lat, s, mode=args.mode)
        rows.append([s, pt.epsilon, pt.vnr])
    _emit_csv(args, config, ["sigma2", "epsilon", "vnr"], rows)
    return 0


def _codes_for(args) -> tuple[list, list[Lattice]]:
    """Nested codes for each of K users from --lattice/--dim/--coarse-scale."""
    entry = catalog.get(args.lattice, args.dim)
    fine = entry.lattice()
    coarse = scaled(fine, args.coarse_scale, name=f"{args.coarse_scale}*{entry.name}")
    code = build_nested_code(coarse, fine)
    return [code] * args.K, [fine] * args.K


def cmd_caf_decode(args) -> int:
    codes, lattices = _codes_for(args)
    rng = np.random.default_rng(args.seed)
    config = {
        "command": "caf-decode", "lattice": args.lattice, "dim": args.dim,
        "K": args.K, "coarse_scale": args.coarse_scale, "sigma2": args.sigma2,
        "seed": args.seed, "trials": args.trials, "mode": args.mode,
        "channel": args.channel, "noiseless": args.noiseless,
    }
    sigma2 = float(args.sigma2)
    n = lattices[0].dim
    correct = 0
    rows = []
    for t in range(args.trials):
        picks = [int(rng.integers(len(c))) for c in codes]
        xs = [codes[k].representatives[picks[k]].coords for k in range(args.K)]
        if args.channel == "integer":
            h = np.asarray(args.a, dtype=float)
        else:
            h = rng.standard_normal(args.K)
        if args.noiseless:
            noise = np.zeros(n)
        else:
            noise = math.sqrt(sigma2) * rng.standard_normal(n)
        a = np.asarray(args.a, dtype=np.int64)
        y = received_signal(h, xs, noise)
        truth = sum(float(a[k]) * xs[k] for k in range(args.K))
        bundle = None
        if args.mode == "decomposed":
            bundle = build_decomposition(a, lattices, h, mode="hnf")
        res = ml_decode(y, h, a, codes, sigma2, mode=args.mode, bundle=bundle)
        ok = bool(np.max(np.abs(res.lambda_hat - truth)) < 1e-6)
        correct += ok
        rows.append([t, int(ok), res.metric_value, res.candidate_count])
    rows.append(["rate", correct / args.trials, "", ""])
    _emit_csv(args, config, ["trial", "correct", "metric", "candidates"], rows)
    return 0


def cmd_caf_surface(args) -> int:
    codes, lattices = _codes_for(args)
    rng = np.random.default_rng(args.seed)
    sigma2 = float(args.sigma2)
    n = lattices[0].dim
    a = np.asarray(args.a, dtype=np.int64)
    h = rng.standard_normal(args.K)
    picks = [int(rng.integers(len(c))) for c in codes]
    xs = [codes[k].representatives[picks[k]].coords for k in range(args.K)]
    noise = math.sqrt(sigma2) * rng.standard_normal(n)
    y = received_signal(h, xs, noise)
    bundle = None
    if args.mode == "decomposed":
        bundle = build_decomposition(a, lattices, h, mode="hnf")
    res = ml_decode(y, h, a, codes, sigma2, mode=args.mode,
                    bundle=bundle, want_profile=True)
    config = {
        "command": "caf-surface", "lattice": args.lattice, "dim": args.dim,
        "K": args.K, "coarse_scale": args.coarse_scale, "sigma2": args.sigma2,
        "seed": args.seed, "mode": args.mode,
    }
    rows = [[json.dumps(list(key)), val] for key, val in res.metric_profile]
    _emit_csv(args, config, ["lambda", "metric"], rows)
    return 0


def cmd_caf_rate(args) -> int:
    rho = 10.0 ** (args.rho_db / 10.0)
    config = {"command": "caf-rate", "K": args.K, "rho_db": args.rho_db,
              "seed": args.seed, "trials": args.trials, "box": args.box}
    rows = []
    for t in range(args.trials):
        seed = None if args.seed is None else args.seed + t
        ch = sample_channel(args.K, 1.0, rho, seed=seed)
        eq = optimal_coeffs(rho, ch.h, box_bound=args.box)
        rate = computation_rate(rho, ch.h, eq.a)
        alpha = mmse_alpha(rho, ch.h, eq.a)
        rows.append([t, json.dumps([int(v) for v in eq.a]),
                     rate, alpha, int(eq.gcd_flag)])
    _emit_csv(args, config, ["trial", "a", "rate", "alpha", "gcd_one"], rows)
    return 0


def cmd_thm2(args) -> int:
    entry = catalog.get(args.lattice, args.dim)
    lat = entry.lattice()
    rng = np.random.default_rng(args.seed)
    results = []
    for t in range(args.trials):
        h = rng.standard_normal(2)
        res = scaled_equivalence_check(lat.generator, args.c, args.a, h)
        results.append({
            "trial": t, "h": [float(v) for v in h], "r": res.r,
            "r_signed": res.r_signed, "equivalent": res.equivalent,
        })
    payload = {
        "config": {"command": "thm2", "lattice": args.lattice, "dim": args.dim,
                   "c": args.c, "a": list(args.a), "seed": args.seed,
                   "trials": args.trials},
        "results": results,
        "all_equivalent": all(r["equivalent"] for r in results),
    }
    _emit_json(args, payload)
    return 0


def cmd_sumlattice(args) -> int:
    entry = catalog.get(args.lattice, args.dim)
    lat = entry.lattice()
    rng = np.random.default_rng(args.seed)
    h = rng.standard_normal(args.K)
    lattices = [lat] * args.K
    a = np.asarray(args.a, dtype=np.int64) if args.a else np.ones(args.K, np.int64)
    bundle = build_decomposition(a, lattices, h, mode=args.mode)
    config = {"command": "sumlattice", "lattice": args.lattice, "dim": args.dim,
              "K": args.K, "a": [int(v) for v in a], "seed": args.seed,
              "mode": args.mode}
    rows = [[i, j, float(bundle.M_L[i, j])]
            for i in range(bundle.M_L.shape[0])
            for j in range(bundle.M_L.shape[1])]
    _emit_csv(args, config, ["row", "col", "M_L"], rows)
    return 0


def cmd_probe(args) -> int:
    entry = catalog.get(args.lattice, args.dim)
    lat = entry.lattice()
    rng = np.random.default_rng(args.seed)
    h = rng.standard_normal(args.K)
    a = np.asarray(args.a, dtype=np.int64) if args.a else np.ones(args.K, np.int64)
    config = {"command": "probe", "lattice": args.lattice, "dim": args.dim,
              "K": args.K, "p": args.p, "seed": args.seed,
              "a": [int(v) for v in a]}
    rows = []
    for p in range(1, args.p + 1):
        pts, min_norm = sum_lattice_probe([lat] * args.K, h, a=a, p=p)
        rows.append([p, len(pts), min_norm])
    _emit_csv(args, config, ["p", "points", "min_sqnorm"], rows)
    return 0


def cmd_catalog(args) -> int:
    payload = []
    for name in catalog.names():
        n = {"Zn": 4, "Dn": 4, "Dn_star": 3}.get(name)
        entry = catalog.get(name, n)
        payload.append({
            "name": entry.name, "dim": entry.dim,
            "lambda1": entry.lambda1, "volume": entry.volume,
            "theta_form": entry.theta_form,
            "has_generator": entry.generator is not None,
            "power_P": entry.power_P, "codebook_size": entry.codebook_size,
        })
    _emit_json(args, payload)
    return 0


def cmd_validate(args) -> int:
    report = catalog.validate_catalog(coeff_norm=args.r_max)
    _emit_json(args, {"entries": report,
                      "all_passed": all(e["passed"] for e in report)})
    return 0 if all(e["passed"] for e in report) else 1


# --- parser -----------------------------------------------------------------

def _add_lattice_args(p, dim_default=None):
    p.add_argument("--lattice", help="catalog lattice name")
    p.add_argument("--dim", type=int, default=dim_default,
                   help="dimension for Zn/Dn/Dn_star")
    p.add_argument("--file", help="JSON/TOML lattice spec file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="thetacaf",
        description="Lattice theta series and compute-and-forward tools",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", help="theta series values or coefficients")
    _add_lattice_args(p)
    p.add_argument("--q", help="nome q or grid start:stop:step")
    p.add_argument("--sigma2", help="noise variance or grid (sets q)")
    p.add_argument("--mode", default="all",
                   choices=["exact", "closed", "approx", "baseline",
                            "all", "coefficients"])
    p.add_argument("--r-max", type=float, default=20.0,
                   help="truncation norm for exact/coefficient modes")
    p.add_argument("--out")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("flatness", help="flatness factor over a sigma^2 grid")
    _add_lattice_args(p)
    p.add_argument("--sigma2", required=True, help="value or grid start:stop:step")
    p.add_argument("--mode", default="exact", choices=["exact", "approx"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_flatness)

    p = sub.add_parser("caf-decode", help="decode integer combinations over trials")
    p.add_argument("--lattice", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--coarse-scale", type=float, default=3.0)
    p.add_argument("--sigma2", required=True)
    p.add_argument("--a", type=int, nargs="+", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mode", default="definition",
                   choices=["definition", "decomposed"])
    p.add_argument("--channel", default="random", choices=["random", "integer"],
                   help="integer sets h = a")
    p.add_argument("--noiseless", action="store_true", help="zero the noise")
    p.add_argument("--out")
    p.set_defaults(func=cmd_caf_decode)

    p = sub.add_parser("caf-surface", help="full decoding metric profile")
    p.add_argument("--lattice", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--coarse-scale", type=float, default=3.0)
    p.add_argument("--sigma2", required=True)
    p.add_argument("--a", type=int, nargs="+", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", default="definition",
                   choices=["definition", "decomposed"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_caf_surface)

    p = sub.add_parser("caf-rate", help="computation rate with optimal coefficients")
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--rho-db", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--box", type=int, default=8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_caf_rate)

    p = sub.add_parser("thm2", help="two-user scaled-equivalence check")
    p.add_argument("--lattice", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--c", type=int, default=1)
    p.add_argument("--a", type=int, nargs=2, default=[1, 1])
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_thm2)

    p = sub.add_parser("sumlattice", help="effective sum-lattice generator")
    p.add_argument("--lattice", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--a", type=int, nargs="+")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", default="hnf", choices=["hnf", "orthogonal"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_sumlattice)

    p = sub.add_parser("probe", help="sum-lattice minimum norm vs box size p")
    p.add_argument("--lattice", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--a", type=int, nargs="+")
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("catalog", help="list built-in lattices")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("validate", help="cross-check catalog data")
    p.add_argument("--r-max", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        json.dump({"error": "config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except UnknownLattice as exc:
        json.dump({"error": "unknown-lattice", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except EnumerationBudgetExceeded as exc:
        json.dump({"error": "budget", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 4
    except ThetacafError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
