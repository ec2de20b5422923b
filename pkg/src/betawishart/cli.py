"""Command-line front end: ``betawishart <command> [options]``.

Every command writes one table, either CSV (header row plus one record per
point) or a JSON document holding the same records together with the full
configuration, the library version and a timestamp.  Output goes to stdout
unless ``--output`` is given; relative output paths are resolved against
``$BETAWISHART_OUTPUT_DIR`` when that variable is set.  Files are written
atomically (temporary file, then rename).

Exit codes: 0 success, 1 a check failed (``compare``, ``splitting-check``,
``table1``, ``table2``), 2 invalid input, 3 a series did not converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .capacity import CapacityQuery, db_to_linear, miso_capacity
from .eigendist import (
    ConvergenceError,
    LargestEigenvalueDistribution,
    WishartSpec,
    joint_density,
)
from .hypergeom import TruncationBudget
from .montecarlo import batch_csv_text, ks_distance, sample_largest_eigs, stiefel_splitting_check

SCHEMA_VERSION = "1.0"
OUTPUT_DIR_ENV = "BETAWISHART_OUTPUT_DIR"

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2, 3

SERIES_FIELDS = ["value", "degrees_used", "last_layer_ratio", "converged"]

TABLE1 = {
    10: (60, {0.01: 7.75, 0.05: 9.74, 0.50: 16.2, 0.95: 25.9, 0.99: 31.1}),
    50: (90, {0.01: 46.2, 0.05: 50.9, 0.50: 64.4, 0.95: 81.4, 0.99: 89.7}),
}
TABLE1_TOL = 0.05
TABLE2 = [
    (2, (1.81, 1.31), 0.999),
    (3, (1.81, 1.31, 0.69), 0.999),
    (4, (1.81, 1.31, 0.69, 0.19), 0.973),
]
TABLE2_TOL = 0.01


class UsageError(ValueError):
    pass


# ----------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _grid(text: str) -> list[float]:
    try:
        start, stop, num = text.split(":")
        return list(np.linspace(float(start), float(stop), int(num)))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:num, got {text!r}") from exc


def parse_sigma(text: str | None, m: int | None):
    """``identity``, a comma list of eigenvalues, or a path to a square-matrix text file."""
    if text is None or text == "identity":
        if m is None:
            raise UsageError("--m is required with an identity sigma")
        return np.ones(m)
    if os.path.exists(text):
        mat = np.loadtxt(text, ndmin=2)
        if mat.shape[0] != mat.shape[1]:
            raise UsageError(f"sigma matrix in {text} is not square: {mat.shape}")
        return np.linalg.eigvalsh((mat + mat.T) / 2.0)
    try:
        return np.asarray(_floats(text))
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from exc


def _add_spec(p, beta_choices=(1, 2, 4), need_spec=True):
    p.add_argument("--beta", type=int, choices=beta_choices, default=1)
    p.add_argument("--m", type=int, help="dimension (inferred from --sigma when omitted)")
    p.add_argument("--n", type=int, required=need_spec, help="rank, n < m")
    p.add_argument("--sigma", default="identity",
                   help="'identity', comma list of eigenvalues, or square-matrix text file")


def _add_budget(p, default_k=60):
    p.add_argument("--K", type=int, default=default_k, help="truncation degree")
    p.add_argument("--layer-tol", type=float, default=1e-12)
    p.add_argument("--route", choices=("auto", "general", "isotropic"), default="auto")


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betawishart",
        description="Largest-eigenvalue distributions of singular beta-Wishart matrices.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("cdf", "pdf"):
        p = sub.add_parser(name, help=f"{name} of the largest eigenvalue")
        _add_spec(p)
        _add_budget(p)
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--x", type=_floats, help="comma list of points")
        g.add_argument("--grid", type=_grid, help="start:stop:num")
        _add_output(p)

    p = sub.add_parser("quantile", help="quantiles of the largest eigenvalue")
    _add_spec(p)
    _add_budget(p)
    p.add_argument("--alpha", type=_floats, required=True)
    _add_output(p)

    p = sub.add_parser("joint", help="joint density of the nonzero eigenvalues")
    _add_spec(p)
    _add_budget(p)
    p.add_argument("--ells", type=_floats, action="append", required=True,
                   help="one decreasing eigenvalue list per occurrence")
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte Carlo draws of the largest eigenvalue")
    _add_spec(p)
    p.add_argument("--count", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("compare", help="KS distance between the series CDF and simulation")
    _add_spec(p)
    _add_budget(p)
    p.add_argument("--count", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ks-threshold", type=float, default=0.01)
    _add_output(p)

    p = sub.add_parser("splitting-check", help="Monte Carlo check of the Stiefel splitting identity")
    p.add_argument("--beta", type=int, choices=(1, 2), default=1)
    p.add_argument("--A", type=_floats, required=True)
    p.add_argument("--B", type=_floats, required=True)
    p.add_argument("--kappa", type=_ints, required=True)
    p.add_argument("--count", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--se-multiple", type=float, default=4.0)
    _add_output(p)

    p = sub.add_parser("capacity", help="MISO capacity (beta=2, n=1)")
    p.add_argument("--m", type=int)
    p.add_argument("--sigma", default="identity")
    _add_budget(p, default_k=200)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--rho", type=_floats, help="linear SNR values")
    g.add_argument("--snr-db", type=_floats, help="SNR values in dB")
    p.add_argument("--units", choices=("bits", "nats"), default="bits")
    _add_output(p)

    p = sub.add_parser("table1", help="percentile points for beta=1, n=3, Sigma=I")
    p.add_argument("--layer-tol", type=float, default=1e-12)
    _add_output(p)

    p = sub.add_parser("table2", help="max_x F_K(x) for beta=2, n=1")
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--layer-tol", type=float, default=1e-12)
    _add_output(p)
    return parser


# ----------------------------------------------------------------------------
# commands; each returns (records, fieldnames, exit_code)


def _spec(args) -> WishartSpec:
    eigs = parse_sigma(args.sigma, args.m)
    if args.m is not None and eigs.size != args.m:
        raise UsageError(f"sigma has {eigs.size} eigenvalues but --m is {args.m}")
    return WishartSpec.from_sigma(args.beta, args.n, eigs)


def _budget(args) -> TruncationBudget:
    return TruncationBudget(args.K, args.layer_tol)


def _dist(args) -> LargestEigenvalueDistribution:
    return LargestEigenvalueDistribution.from_spec(_spec(args), _budget(args), args.route).fit()


def _exit_for(records) -> int:
    return EXIT_OK if all(r["converged"] for r in records) else EXIT_NOT_CONVERGED


def cmd_cdf_pdf(args):
    dist = _dist(args)
    x = args.x if args.x is not None else args.grid
    value, degrees, ratio, conv = dist.evaluate(x, args.command)
    records = [
        {"x": float(xi), "value": float(v), "degrees_used": int(d),
         "last_layer_ratio": float(r), "converged": bool(c)}
        for xi, v, d, r, c in zip(x, value, degrees, ratio, conv)
    ]
    return records, ["x"] + SERIES_FIELDS, _exit_for(records)


def cmd_quantile(args):
    dist = _dist(args)
    records = []
    for a in args.alpha:
        try:
            q = dist.quantile(a)
            _, d, r, c = dist.evaluate(q)
            records.append({"alpha": a, "value": q, "degrees_used": int(d[0]),
                            "last_layer_ratio": float(r[0]), "converged": bool(c[0])})
        except ConvergenceError:
            records.append({"alpha": a, "value": math.nan, "degrees_used": dist.budget_.max_degree,
                            "last_layer_ratio": math.nan, "converged": False})
    return records, ["alpha"] + SERIES_FIELDS, _exit_for(records)


def cmd_joint(args):
    spec = _spec(args)
    budget = _budget(args)
    records = []
    for ells in args.ells:
        dv = joint_density(ells, spec, budget)
        records.append({"ells": ",".join(repr(float(v)) for v in ells), "value": dv.value,
                        "degrees_used": dv.series.degrees_used,
                        "last_layer_ratio": dv.series.last_layer_ratio,
                        "converged": dv.series.converged})
    return records, ["ells"] + SERIES_FIELDS, _exit_for(records)


def cmd_simulate(args):
    batch = sample_largest_eigs(_spec(args), args.count, args.seed)
    args._batch = batch
    records = [{"l1": float(v)} for v in batch.draws]
    return records, ["l1"], EXIT_OK


def cmd_compare(args):
    dist = _dist(args)
    batch = sample_largest_eigs(dist.spec_, args.count, args.seed)
    ks = ks_distance(batch, dist.monotone_cdf)
    deciles = np.arange(1, 10) / 10.0
    points = np.quantile(batch.draws, deciles)
    model = dist.monotone_cdf(points)
    records = [{"quantity": "ks_distance", "level": "", "x": "", "value": ks, "delta": ""}]
    for lvl, x, F in zip(deciles, points, model):
        records.append({"quantity": "decile", "level": float(lvl), "x": float(x),
                        "value": float(F), "delta": float(F - lvl)})
    code = EXIT_OK if ks <= args.ks_threshold else EXIT_CHECK_FAILED
    return records, ["quantity", "level", "x", "value", "delta"], code


def cmd_splitting(args):
    mc, exact, se = stiefel_splitting_check(args.A, args.B, args.kappa, args.beta, args.count, args.seed)
    ok = abs(mc - exact) <= args.se_multiple * se
    records = [{"kappa": ",".join(map(str, args.kappa)), "mc_mean": mc, "exact": exact,
                "std_err": se, "pass": ok}]
    return records, ["kappa", "mc_mean", "exact", "std_err", "pass"], EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_capacity(args):
    eigs = parse_sigma(args.sigma, args.m)
    spec = WishartSpec.from_sigma(2, 1, eigs)
    budget = _budget(args)
    if args.rho is not None:
        rhos = [(r, 10.0 * math.log10(r) if r > 0 else -math.inf) for r in args.rho]
    else:
        rhos = [(db_to_linear(d), d) for d in args.snr_db]
    records = []
    for rho, db in rhos:
        c = miso_capacity(CapacityQuery(rho, spec, budget, units=args.units))
        records.append({"rho": rho, "snr_db": db, "units": args.units, "value": c})
    return records, ["rho", "snr_db", "units", "value"], EXIT_OK


def cmd_table1(args):
    records = []
    for m, (K, expected) in TABLE1.items():
        spec = WishartSpec.from_sigma(1, 3, None, m)
        dist = LargestEigenvalueDistribution.from_spec(spec, TruncationBudget(K, args.layer_tol)).fit()
        for alpha, reference in expected.items():
            try:
                q = dist.quantile(alpha)
            except ConvergenceError:
                q = math.nan
            ok = bool(abs(q - reference) <= TABLE1_TOL)
            records.append({"m": m, "K": K, "alpha": alpha, "computed": q, "reference": reference, "pass": ok})
    code = EXIT_OK if all(r["pass"] for r in records) else EXIT_CHECK_FAILED
    return records, ["m", "K", "alpha", "computed", "reference", "pass"], code


def cmd_table2(args):
    records = []
    for m, sigma, reference in TABLE2:
        spec = WishartSpec.from_sigma(2, 1, list(sigma))
        dist = LargestEigenvalueDistribution.from_spec(spec, TruncationBudget(args.K, args.layer_tol)).fit()
        x_star, sup = dist.sup()
        if reference >= 0.999:
            ok = sup >= reference
        else:
            ok = abs(sup - reference) <= TABLE2_TOL
        records.append({"m": m, "sigma": ",".join(map(str, sigma)), "K": args.K,
                        "x_star": x_star, "computed": sup, "reference": reference, "pass": bool(ok)})
    code = EXIT_OK if all(r["pass"] for r in records) else EXIT_CHECK_FAILED
    return records, ["m", "sigma", "K", "x_star", "computed", "reference", "pass"], code


COMMANDS = {
    "cdf": cmd_cdf_pdf,
    "pdf": cmd_cdf_pdf,
    "quantile": cmd_quantile,
    "joint": cmd_joint,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "splitting-check": cmd_splitting,
    "capacity": cmd_capacity,
    "table1": cmd_table1,
    "table2": cmd_table2,
}


# ----------------------------------------------------------------------------
# output


def _config(args) -> dict:
    cfg = {}
    for key, val in sorted(vars(args).items()):
        if key.startswith("_"):
            continue
        if isinstance(val, np.ndarray):
            val = val.tolist()
        cfg[key] = val
    return cfg


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def _json_safe(v):
    # NaN and infinities are not valid JSON; report them as null
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render(records, fields, args, fmt: str, now: datetime | None = None) -> str:
    if fmt == "csv" and getattr(args, "_batch", None) is not None:
        return batch_csv_text(args._batch)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow({k: _fmt(r[k]) for k in fields})
        return buf.getvalue()
    now = now or datetime.now(timezone.utc)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "command": args.command,
        "config": _json_safe(_config(args)),
        "fields": fields,
        "records": _json_safe(records),
        "timestamp": now.isoformat(),
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def resolve_output(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    return path


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        records, fields, code = COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = render(records, fields, args, args.format)
    if args.output:
        write_atomic(resolve_output(args.output), text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
