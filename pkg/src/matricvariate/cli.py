"""Command-line interface: ``sample``, ``density``, ``tabulate`` and ``verify``.

Exit codes: 0 success, 1 verification failure, 2 usage or schema error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from . import densities as dens
from . import samplers as smp
from . import special, verify
from .algebra import DenseMatrix, HermitianPD
from .errors import (ConfigError, DimensionError, DomainError, MatricvariateError,
                     UnsupportedAlgebraError)

FORMAT_VERSION = 1
CONVENTION = ("standard Gaussian entries have each real coefficient with variance 1/beta; "
              "coefficients are listed in basis order (1, i, j, k) with ij = k")
DISTS = ("pearson2", "mmpearson2", "beta1", "mmbeta1", "wishart", "normal", "spectral")
DENSITY_DISTS = ("pearson2", "mmpearson2", "beta1", "mmbeta1", "spectral")


class SchemaError(Exception):
    """Malformed input file or inconsistent flags."""


# ---------------------------------------------------------------------------
# parameter assembly
# ---------------------------------------------------------------------------

def _matrix_beta(beta: float) -> int:
    if beta == 8:
        raise UnsupportedAlgebraError("octonion matrix sampling unsupported")
    if beta not in (1, 2, 4):
        raise SchemaError(f"--beta must be 1, 2 or 4 for matrix distributions, got {beta:g}")
    return int(beta)


def _load_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read JSON from {path}: {exc}") from None


def _pearson_params(params: dict) -> dens.PearsonIIParams:
    beta = _matrix_beta(params["beta"])
    m, n = int(params["m"]), int(params["n"])
    if n != params["n"]:
        raise SchemaError(f"Pearson II needs an integer --n, got {params['n']}")
    kind = "matricvariate" if params["dist"] == "pearson2" else "matrix_multivariate"
    mu = (DenseMatrix.from_json(params["mu"]) if params.get("mu")
          else DenseMatrix.zeros(beta, m, n))
    left = (HermitianPD.from_json(params["scale_left"]) if params.get("scale_left")
            else HermitianPD.identity(beta, m))
    right = (HermitianPD.from_json(params["scale_right"]) if params.get("scale_right")
             else HermitianPD.identity(beta, n))
    for name, mat in (("mu", mu), ("scale_left", left), ("scale_right", right)):
        if mat.beta != beta:
            raise SchemaError(f"{name} has beta={mat.beta}, expected {beta}")
    return dens.PearsonIIParams(params["nu"], mu, left, right, beta, kind)


def _beta_params(params: dict) -> dens.BetaIParams:
    return dens.BetaIParams(params["n"], params["nu"], int(params["m"]),
                            _matrix_beta(params["beta"]), params.get("orientation"))


def _spectral_config(params: dict, values) -> dens.SpectralConfig:
    flavor = params.get("flavor") or "singular_pearson"
    return dens.SpectralConfig(tuple(values), params["n"], params["nu"], params["beta"], flavor)


def _tidy(x):
    return int(x) if isinstance(x, float) and x.is_integer() else x


def _params_from_args(args) -> dict:
    params = {"dist": args.dist, "beta": _tidy(args.beta), "m": args.m, "n": _tidy(args.n),
              "nu": args.nu}
    if args.dist in ("pearson2", "mmpearson2") and args.params:
        extra = _load_json(args.params)
        if not isinstance(extra, dict):
            raise SchemaError("--params must hold a JSON object")
        unknown = set(extra) - {"mu", "scale_left", "scale_right"}
        if unknown:
            raise SchemaError(f"unknown keys in --params: {sorted(unknown)}")
        params.update(extra)
    if args.dist == "spectral":
        params["flavor"] = args.flavor
    return params


def _require(params: dict, *keys):
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise SchemaError(f"--dist {params['dist']} needs " + ", ".join(f"--{k}" for k in missing))


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

def _draws(args, params: dict, rng):
    dist, count = args.dist, args.count
    if dist in ("pearson2", "mmpearson2"):
        _require(params, "m", "n", "nu")
        p = _pearson_params(params)
        if dist == "pearson2":
            gen = None
            if args.construction == "elliptical":
                gen = smp.EllipticalGenerator(args.generator, args.df)
                params["generator"] = gen.describe()
            params["construction"] = args.construction
            X = smp.sample_pearson2(rng, p, args.construction, gen, size=count)
        else:
            X = smp.sample_mmpearson2(rng, p, size=count)
        return [DenseMatrix(p.beta, x).to_json() for x in X]
    if dist in ("beta1", "mmbeta1"):
        _require(params, "m", "n", "nu")
        p = _beta_params(params)
        flavor = "matricvariate" if dist == "beta1" else "matrix_multivariate"
        params["orientation"] = p.orientation
        X = smp.sample_beta1(rng, p, flavor, size=count)
        return [DenseMatrix(p.beta, x).to_json() for x in X]
    if dist == "wishart":
        _require(params, "m", "nu")
        beta = _matrix_beta(params["beta"])
        X = smp.sample_wishart(rng, smp.WishartParams(beta, int(params["m"]), params["nu"]),
                               size=count)
        return [DenseMatrix(beta, x).to_json() for x in X]
    if dist == "normal":
        _require(params, "m", "n")
        beta = _matrix_beta(params["beta"])
        X = smp.sample_normal(rng, beta, int(params["m"]), int(params["n"]), size=count)
        return [DenseMatrix(beta, x).to_json() for x in X]
    if dist == "spectral":
        _require(params, "m", "n", "nu")
        m = int(params["m"])
        start = np.linspace(0.6, 0.2, m) if m > 1 else np.array([0.5])
        c = _spectral_config(params, start if params["flavor"] != "singular_mm"
                             else start / (2 * np.linalg.norm(start)))
        params["flavor"] = c.flavor
        params.update(burn_in=args.burn_in, thin=args.thin)
        d = smp.sample_spectral(rng, c, count, burn_in=args.burn_in, thin=args.thin)
        params["acceptance_rate"] = d.acceptance_rate
        return [{"values": v.tolist()} for v in d.values]
    raise SchemaError(f"unknown distribution {dist!r}")


def cmd_sample(args) -> int:
    params = _params_from_args(args)
    if args.count < 1:
        raise SchemaError("--count must be positive")
    rng = np.random.default_rng(args.seed)
    draws = _draws(args, params, rng)
    header = {
        "format_version": FORMAT_VERSION,
        "type": "header",
        "dist": args.dist,
        "params": {k: v for k, v in params.items() if k != "dist" and v is not None},
        "seed": args.seed,
        "count": args.count,
        "version": __version__,
        "convention": CONVENTION,
    }
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write(json.dumps(header) + "\n")
        for d in draws:
            out.write(json.dumps(d) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# density
# ---------------------------------------------------------------------------

def _read_points(path):
    """Returns ``(header or None, list of point objects)``."""
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    try:
        return None, [json.loads(text)]
    except json.JSONDecodeError:
        pass
    try:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is neither JSON nor JSONL: {exc}") from None
    header = None
    if rows and isinstance(rows[0], dict) and rows[0].get("type") == "header":
        header = rows.pop(0)
        if header.get("format_version") != FORMAT_VERSION:
            raise SchemaError(f"unsupported format_version {header.get('format_version')!r}")
    return header, rows


def _merge_params(args, header) -> dict:
    params = {}
    if header is not None:
        params.update(header.get("params", {}))
        params["dist"] = header.get("dist")
    for key in ("dist", "beta", "m", "n", "nu", "flavor"):
        val = getattr(args, key)
        if val is None:
            continue
        if key in params and params[key] is not None and params[key] != val:
            raise SchemaError(f"--{key}={val} conflicts with the input header value {params[key]}")
        params[key] = val
    if args.params:
        extra = _load_json(args.params)
        if not isinstance(extra, dict):
            raise SchemaError("--params must hold a JSON object")
        params.update(extra)
    if params.get("dist") not in DENSITY_DISTS:
        raise SchemaError(f"--dist must be one of {DENSITY_DISTS}, got {params.get('dist')!r}")
    return params


def _logpdf_one(params: dict, point) -> float:
    dist = params["dist"]
    if dist == "spectral":
        if not isinstance(point, dict) or "values" not in point:
            raise SchemaError("spectral points need a 'values' list")
        _require(params, "n", "nu", "beta")
        c = _spectral_config(params, point["values"])
        return dens.spectral_logpdf_values(np.asarray(c.values)[None, :], c.flavor, c.beta,
                                           c.n, c.nu)[0]
    if not isinstance(point, dict):
        raise SchemaError("matrix points must be JSON objects")
    try:
        X = DenseMatrix.from_json(point)
    except MatricvariateError as exc:
        raise SchemaError(str(exc)) from None
    for key in ("beta", "m", "n"):
        if params.get(key) is None:
            params[key] = getattr(X, key) if key != "beta" else X.beta
    if X.beta != params["beta"]:
        raise SchemaError(f"point has beta={X.beta} but parameters have beta={params['beta']:g}")
    _require(params, "nu")
    if dist in ("pearson2", "mmpearson2"):
        if X.shape != (int(params["m"]), int(params["n"])):
            raise SchemaError(f"point shape {X.shape} does not match m={params['m']}, n={params['n']}")
        p = _pearson_params(params)
        f = dens.pearson2_logpdf if dist == "pearson2" else dens.mmpearson2_logpdf
        return f(X, p)
    p = _beta_params(params)
    if X.shape != (p.dim, p.dim):
        raise SchemaError(f"point shape {X.shape} does not match the {p.dim} x {p.dim} support")
    f = dens.beta1_logpdf if dist == "beta1" else dens.mmbeta1_logpdf
    return f(X, p)


def _fmt(x: float):
    x = float(x)
    return x if math.isfinite(x) else ("-inf" if x < 0 else str(x))


def cmd_density(args) -> int:
    header, points = _read_points(args.input)
    if not points:
        raise SchemaError("no points in input")
    params = _merge_params(args, header)
    vals = [_fmt(_logpdf_one(dict(params), pt)) for pt in points]
    print(json.dumps({"logpdf": vals[0] if len(vals) == 1 and header is None else vals}))
    return 0


# ---------------------------------------------------------------------------
# tabulate
# ---------------------------------------------------------------------------

TAB_FIELDS = ("beta", "m", "n", "a", "b", "log_mgamma", "log_mbeta", "log_stiefel_volume")


def _cell(fn, *args):
    if any(a is None for a in args):
        return ""
    try:
        return repr(float(fn(*args)))
    except DomainError:
        return "DOMAIN_ERROR"
    except DimensionError:
        return "DIMENSION_ERROR"
    except MatricvariateError:
        return "ERROR"


def _parse_row(text: str) -> dict:
    row = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in ("beta", "m", "n", "a", "b"):
            raise SchemaError(f"bad --row item {part!r}; expected beta=, m=, n=, a=, b=")
        row[key] = val.strip()
    return row


def _num(row: dict, key: str, integer: bool = False):
    val = row.get(key)
    if val in (None, ""):
        return None
    try:
        x = float(val)
    except (TypeError, ValueError):
        raise SchemaError(f"{key}={val!r} is not a number") from None
    if integer:
        if x != int(x):
            raise SchemaError(f"{key} must be an integer, got {val!r}")
        return int(x)
    return x


def cmd_tabulate(args) -> int:
    rows = [_parse_row(r) for r in args.row or []]
    if args.grid:
        grid = _load_json(args.grid)
        if not isinstance(grid, list) or not all(isinstance(r, dict) for r in grid):
            raise SchemaError("--grid must hold a JSON list of objects")
        rows.extend(grid)
    if not rows:
        raise SchemaError("tabulate needs --grid or at least one --row")
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(TAB_FIELDS)
        for row in rows:
            beta, a, b = _num(row, "beta"), _num(row, "a"), _num(row, "b")
            m, n = _num(row, "m", True), _num(row, "n", True)
            if beta is None or m is None:
                raise SchemaError(f"grid row {row} needs beta and m")
            w.writerow([
                f"{beta:g}", m, "" if n is None else n,
                "" if a is None else f"{a:g}", "" if b is None else f"{b:g}",
                _cell(special.log_mgamma, beta, m, a),
                _cell(special.log_mbeta, beta, m, a, b),
                _cell(special.log_stiefel_volume, beta, m, n),
            ])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    config = _load_json(args.config) if args.config else verify.default_config()
    reports = verify.run_suite(config, jobs=args.jobs, seed=args.seed)
    result = verify.suite_report(config, reports)
    if args.out:
        verify.write_report(args.out, result)
    else:
        json.dump(result, sys.stdout, indent=2)
        sys.stdout.write("\n")
    n_fail = sum(not r["passed"] for r in reports)
    print(f"{len(reports) - n_fail}/{len(reports)} tests passed", file=sys.stderr)
    for r in reports:
        if not r["passed"]:
            print(f"FAILED {r['name']} {json.dumps(r['parameters'])}", file=sys.stderr)
    return 0 if result["passed"] else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matricvariate",
        description="Matrix-variate Pearson II and beta type I laws over real, "
                    "complex and quaternion matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw samples to JSONL")
    s.add_argument("--dist", required=True, choices=DISTS)
    s.add_argument("--beta", type=float, required=True, help="1, 2 or 4 (8 for spectral)")
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=float, help="columns; beta type I and spectral accept real n")
    s.add_argument("--nu", type=float)
    s.add_argument("--construction", default="theorem1", choices=smp.CONSTRUCTIONS)
    s.add_argument("--generator", default="normal", choices=("normal", "matrix_t"))
    s.add_argument("--df", type=float, help="matrix-t degrees of freedom")
    s.add_argument("--flavor", choices=dens.SPECTRAL_FLAVORS, help="spectral flavor")
    s.add_argument("--params", help="JSON with mu, scale_left, scale_right (Pearson II)")
    s.add_argument("--burn-in", type=int, default=1000)
    s.add_argument("--thin", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--out", help="output path (default stdout)")
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("density", help="evaluate a log-density")
    d.add_argument("--input", required=True, help="matrix JSON or sample JSONL ('-' for stdin)")
    d.add_argument("--dist", choices=DENSITY_DISTS)
    d.add_argument("--beta", type=float)
    d.add_argument("--m", type=int)
    d.add_argument("--n", type=float)
    d.add_argument("--nu", type=float)
    d.add_argument("--flavor", choices=dens.SPECTRAL_FLAVORS)
    d.add_argument("--params", help="JSON with mu, scale_left, scale_right (Pearson II)")
    d.set_defaults(func=cmd_density)

    t = sub.add_parser("tabulate", help="CSV of multivariate gamma, beta and Stiefel volumes")
    t.add_argument("--grid", help="JSON list of {beta, m, n, a, b} rows")
    t.add_argument("--row", action="append", help="inline row, e.g. beta=1,m=2,a=1.5")
    t.add_argument("--out", help="output CSV path (default stdout)")
    t.set_defaults(func=cmd_tabulate)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--config", help="suite config JSON (default: built-in suite)")
    v.add_argument("--out", help="report JSON path (default stdout)")
    v.add_argument("--seed", type=int, help="override the config seed")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sample" and args.dist != "spectral" and args.beta == 8:
        print("error: octonion matrix sampling unsupported", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (SchemaError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MatricvariateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
