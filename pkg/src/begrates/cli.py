"""Command-line front end.

Every computation is exposed as a subcommand with machine-readable CSV or
JSON output.  Runs are deterministic given the flags and the seed: floats are
printed with 17 significant digits and every output embeds its fully resolved
configuration.  Exit codes: 0 success, 2 validation error, 3 computational
error.

A config file in ``key=value`` format may supply defaults; explicit flags
override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .cases import case_by_id, case_catalog, comparison_density, params_at, predicted_rate
from .density import estimate_stein_constants, normalize_density
from .errors import ComputationError, ValidationError
from .exact import (
    DEFAULT_N_CAP,
    brute_force_law,
    build_joint_law,
    hs_check,
    kolmogorov_distance,
    moment,
    pair_covariance,
    step_cdf_pair,
    tv_distance,
)
from .mcmc import run_chain
from .model import BETA_C, ModelParams, classify_region, critical_K, minimize_G
from .rates import default_ladder, run_all, run_case, summary_row
from .stein import evaluate_bound

_SCHEMA_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _resolved_config(args: argparse.Namespace) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


class _Output:
    """Collects rows plus metadata and serialises to CSV or JSON."""

    def __init__(self, args: argparse.Namespace):
        self.fmt = args.format
        self.config = _resolved_config(args)
        self.meta: dict = {}
        self.columns: list[str] = []
        self.rows: list[dict] = []

    def emit(self, path: str | None) -> None:
        text = self._to_json() if self.fmt == "json" else self._to_csv()
        if path is None or path == "-":
            sys.stdout.write(text)
        else:
            with open(path, "w") as fh:
                fh.write(text)

    def _to_json(self) -> str:
        doc = {
            "schema_version": _SCHEMA_VERSION,
            "config": {k: v for k, v in self.config.items()},
            "meta": self.meta,
            "rows": self.rows,
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=_fmt) + "\n"

    def _to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema_version={_SCHEMA_VERSION}\n")
        for k, v in self.config.items():
            buf.write(f"# config {k}={_fmt(v)}\n")
        for k, v in sorted(self.meta.items()):
            buf.write(f"# meta {k}={_fmt(v)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row.get(c, "")) for c in self.columns])
        return buf.getvalue()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed where applicable")
    p.add_argument("--threads", type=int, default=1, help="worker cap for sweeps")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_phase_diagram(args) -> _Output:
    out = _Output(args)
    out.columns = ["beta", "K_c", "region_at_0p9Kc", "region_at_Kc", "region_at_1p1Kc"]
    out.meta["beta_c"] = BETA_C
    out.meta["K_c_at_beta_c"] = critical_K(BETA_C)
    betas = [args.beta_min + i * (args.beta_max - args.beta_min) / (args.samples - 1)
             for i in range(args.samples)]
    for beta in betas:
        kc = critical_K(beta)
        tags = [
            classify_region(ModelParams(beta, f * kc)).tag.value for f in (0.9, 1.0, 1.1)
        ]
        out.rows.append({
            "beta": beta, "K_c": kc,
            "region_at_0p9Kc": tags[0], "region_at_Kc": tags[1], "region_at_1p1Kc": tags[2],
        })
    return out


def _cmd_exact_law(args) -> _Output:
    import os

    from .exact import load_law, save_law

    out = _Output(args)
    params = ModelParams(args.beta, args.K)
    law = None
    if args.law_cache:
        csv_path = args.law_cache + ".atoms.csv"
        head_path = args.law_cache + ".json"
        if os.path.exists(csv_path) and os.path.exists(head_path):
            cached = load_law(csv_path, head_path)
            if cached.n == args.n and cached.params == params:
                law = cached
                out.meta["law_cache_hit"] = True
    if law is None:
        law = build_joint_law(params, args.n, cap=args.cap)
        if args.law_cache:
            save_law(law, args.law_cache + ".atoms.csv", args.law_cache + ".json")
    out.meta["log_partition"] = law.log_partition
    out.meta["region"] = classify_region(params).tag.value
    for k in (2, 4, 6):
        out.meta[f"moment_w{k}"] = moment(law, args.gamma, k)
    if args.n >= 2:
        out.meta["pair_covariance"] = pair_covariance(params, args.n, law=law)
    if args.check_bruteforce:
        if args.n > 8:
            raise ValidationError("--check-bruteforce requires n <= 8")
        tv = tv_distance(law.atoms(), brute_force_law(params, args.n))
        out.meta["bruteforce_tv"] = tv
        if tv >= 1e-12:
            raise ComputationError(f"brute-force TV {tv} >= 1e-12")
    out.columns = ["s", "M", "probability"]
    if args.n <= args.max_atoms_listed:
        for s, Ms, ps in law.iter_slices():
            for M, p in zip(Ms, ps):
                out.rows.append({"s": s, "M": int(M), "probability": float(p)})
    else:
        out.meta["atoms_omitted"] = True
    return out


def _cmd_limit_density(args) -> _Output:
    out = _Output(args)
    d = normalize_density(args.b1, args.b2, args.b3)
    out.meta.update(d.to_json_dict())
    out.columns = ["order", "moment"]
    for k in range(0, args.max_moment + 1, 2):
        out.rows.append({"order": k, "moment": d.moment(k)})
    if args.stein_constants:
        consts = estimate_stein_constants(d)
        out.meta.update({f"stein_{k}": v for k, v in consts.to_json_dict().items()
                         if k != "grid_spec"})
        out.meta["stein_grid"] = json.dumps(consts.grid_spec, sort_keys=True)
    return out


def _cmd_kolmogorov(args) -> _Output:
    out = _Output(args)
    params = ModelParams(args.beta, args.K)
    law = build_joint_law(params, args.n, cap=args.cap)
    out.columns = ["comparison", "d_k"]
    if args.self_check:
        right, left = step_cdf_pair(law, args.gamma)
        d = kolmogorov_distance(law, args.gamma, right, cdf_left=left)
        out.rows.append({"comparison": "self", "d_k": d})
    else:
        d_obj = normalize_density(args.b1, args.b2, args.b3)
        d = kolmogorov_distance(law, args.gamma, d_obj.cdf_at_sorted)
        out.rows.append({"comparison": f"poly({args.b1},{args.b2},{args.b3})", "d_k": d})
    return out


def _cmd_stein_bound(args) -> _Output:
    out = _Output(args)
    case = case_by_id(args.case)
    params = params_at(case, args.n)
    law = build_joint_law(params, args.n, cap=args.cap)
    mm = {k: moment(law, case.gamma, k) for k in (2, 4, 6)}
    density = comparison_density(case, args.n, mm)
    consts = estimate_stein_constants(density)
    A = args.halfwidth if args.halfwidth is not None else None
    report = evaluate_bound(law, case.gamma, case, density, consts, A=A)
    out.meta["case_id"] = case.case_id
    out.meta["n"] = args.n
    out.meta["A"] = report.a_halfwidth
    out.meta["lambda"] = report.lam
    out.meta["total"] = report.total
    out.meta["exact_dk"] = report.exact_dk
    out.meta["dominates"] = report.dominates()
    for k, v in report.constants.items():
        out.meta[k] = v
    out.columns = ["term", "value"]
    for name, value in report.terms.items():
        out.rows.append({"term": name, "value": value})
    return out


def _cmd_rate_scan(args) -> _Output:
    out = _Output(args)
    explicit = (
        [2**e for e in range(args.min_exp, args.max_exp + 1)] if args.max_exp else None
    )
    if args.all:
        reports = run_all(threads=args.threads, n_ladder=explicit)
    else:
        if not args.case:
            raise ValidationError("rate-scan needs --case ID or --all")
        case = case_by_id(args.case)
        ladder = explicit if explicit else default_ladder(case, args.min_exp)
        reports = [run_case(case, ladder)]
    if args.per_n:
        out.columns = ["case_id", "n", "d_k", "scaled_d_k"]
        for rep in reports:
            r = rep.case.predicted_exponent
            for p in rep.ladder:
                out.rows.append({
                    "case_id": rep.case.case_id, "n": p.n, "d_k": p.d_k,
                    "scaled_d_k": p.d_k * p.n**r,
                })
    else:
        out.columns = [
            "case_id", "theorem", "gamma", "predicted_exponent", "fitted_slope",
            "r_squared", "n_min", "n_max", "d_k_at_n_max", "scaled_max_over_first",
            "slope_ok", "bounded_ok",
        ]
        for rep in reports:
            out.rows.append(summary_row(rep))
        out.meta["all_slope_ok"] = all(r.slope_ok() for r in reports)
        out.meta["all_bounded_ok"] = all(r.bounded_ok() for r in reports)
        if not args.all and args.format == "json":
            out.meta["report"] = reports[0].to_json_dict()
    return out


def _cmd_mcmc(args) -> _Output:
    out = _Output(args)
    params = ModelParams(args.beta, args.K)
    result = run_chain(
        params, args.n, args.sweeps, args.burn_in, args.seed, gamma=args.gamma,
        keep_trace=args.trace,
    )
    out.meta["m_fraction"] = result.m_fraction[0]
    out.meta["m_fraction_stderr"] = result.m_fraction[1]
    out.meta["batch_count"] = result.batch_count
    if args.trace:
        scale = float(args.n) ** (1.0 - args.gamma)
        for k, (est, se) in sorted(result.moments.items()):
            out.meta[f"moment_w{k}"] = est
            out.meta[f"moment_w{k}_stderr"] = se
        out.columns = ["sweep", "s", "M", "w", "w2"]
        for sweep, s, M in result.trace:
            w = s / scale
            out.rows.append({"sweep": sweep, "s": s, "M": M, "w": w, "w2": w * w})
    else:
        out.columns = ["order", "estimate", "stderr"]
        for k, (est, se) in sorted(result.moments.items()):
            out.rows.append({"order": k, "estimate": est, "stderr": se})
    return out


def _cmd_case_catalog(args) -> _Output:
    out = _Output(args)
    out.columns = [
        "case_id", "theorem", "subcase", "gamma", "density_pattern",
        "predicted_exponent", "validity", "mode", "beta_fixed", "b", "k",
        "delta1", "delta2", "ladder_max_exp",
    ]
    for case in case_catalog():
        row = {
            "case_id": case.case_id, "theorem": case.theorem, "subcase": case.subcase,
            "gamma": case.gamma, "density_pattern": case.density_pattern,
            "predicted_exponent": predicted_rate(case), "validity": case.validity,
            "ladder_max_exp": case.ladder_max_exp,
            "mode": "", "beta_fixed": "", "b": "", "k": "", "delta1": "", "delta2": "",
        }
        s = case.schedule
        if s is not None:
            row.update({
                "mode": s.mode.value,
                "beta_fixed": "" if s.beta_fixed is None else s.beta_fixed,
                "b": s.b, "k": s.k, "delta1": s.delta1, "delta2": s.delta2,
            })
        elif case.fixed_params is not None:
            row["mode"] = "fixed-point"
            row["beta_fixed"] = case.fixed_params.beta
            row["k"] = case.fixed_params.K
        out.rows.append(row)
    out.meta["count"] = len(out.rows)
    return out


def _cmd_minimizers(args) -> _Output:
    out = _Output(args)
    params = ModelParams(args.beta, args.K)
    out.meta["region"] = classify_region(params).tag.value
    out.columns = ["minimizer"]
    for x in minimize_G(params):
        out.rows.append({"minimizer": x})
    return out


def _cmd_hs_check(args) -> _Output:
    out = _Output(args)
    params = ModelParams(args.beta, args.K)
    err = hs_check(params, args.n, args.gamma)
    out.columns = ["n", "gamma", "sup_cdf_error"]
    out.rows.append({"n": args.n, "gamma": args.gamma, "sup_cdf_error": err})
    return out


# ---------------------------------------------------------------------------
# wiring


def _apply_config_file(argv: list[str]) -> list[str]:
    """Prepend defaults from --config FILE (key=value per line); flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    rest = argv[:idx] + argv[idx + 2 :]
    extra: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            extra.extend([f"--{key.strip()}", value.strip()])
    # subcommand first, then file defaults, then explicit flags (argparse
    # lets later occurrences win)
    return rest[:1] + extra + rest[1:]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="begrates",
        description="Mean-field three-state spin model computations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("phase-diagram", help="sample the critical curve K_c(beta)")
    p.add_argument("--beta-min", type=float, default=0.2)
    p.add_argument("--beta-max", type=float, default=2.5)
    p.add_argument("--samples", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=_cmd_phase_diagram)

    p = sub.add_parser("exact-law", help="exact (s, M) law and its statistics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--cap", type=int, default=DEFAULT_N_CAP)
    p.add_argument("--check-bruteforce", action="store_true", dest="check_bruteforce")
    p.add_argument("--max-atoms-listed", type=int, default=512,
                   dest="max_atoms_listed",
                   help="omit the atom table when n exceeds this")
    p.add_argument("--law-cache", default=None, dest="law_cache",
                   help="path prefix for caching the law between invocations")
    _add_common(p)
    p.set_defaults(func=_cmd_exact_law)

    p = sub.add_parser("limit-density", help="normalise a comparison density")
    p.add_argument("--b1", type=float, default=0.0)
    p.add_argument("--b2", type=float, default=0.0)
    p.add_argument("--b3", type=float, default=0.0)
    p.add_argument("--max-moment", type=int, default=8, dest="max_moment")
    p.add_argument("--stein-constants", action="store_true", dest="stein_constants")
    _add_common(p)
    p.set_defaults(func=_cmd_limit_density)

    p = sub.add_parser("kolmogorov", help="exact Kolmogorov distance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--b1", type=float, default=0.5)
    p.add_argument("--b2", type=float, default=0.0)
    p.add_argument("--b3", type=float, default=0.0)
    p.add_argument("--self", action="store_true", dest="self_check",
                   help="compare the law against its own step CDF")
    p.add_argument("--cap", type=int, default=DEFAULT_N_CAP)
    _add_common(p)
    p.set_defaults(func=_cmd_kolmogorov)

    p = sub.add_parser("stein-bound", help="itemised bound vs exact distance")
    p.add_argument("--case", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--halfwidth", type=float, default=None,
                   help="A in the bound (default n^(gamma-1))")
    p.add_argument("--cap", type=int, default=DEFAULT_N_CAP)
    _add_common(p)
    p.set_defaults(func=_cmd_stein_bound)

    p = sub.add_parser("rate-scan", help="ladder experiments and slope fits")
    p.add_argument("--case", default=None)
    p.add_argument("--all", action="store_true")
    p.add_argument("--min-exp", type=int, default=6, dest="min_exp")
    p.add_argument("--max-exp", type=int, default=None, dest="max_exp")
    p.add_argument("--per-n", action="store_true", dest="per_n",
                   help="one row per ladder point instead of a summary")
    _add_common(p)
    p.set_defaults(func=_cmd_rate_scan)

    p = sub.add_parser("mcmc", help="heat-bath sampler with batch-means errors")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--sweeps", type=int, default=20000)
    p.add_argument("--burn-in", type=int, default=2000, dest="burn_in")
    p.add_argument("--trace", action="store_true",
                   help="one row per measured sweep instead of a summary")
    _add_common(p)
    p.set_defaults(func=_cmd_mcmc)

    p = sub.add_parser("case-catalog", help="all 42 convergence-rate cases")
    _add_common(p)
    p.set_defaults(func=_cmd_case_catalog)

    p = sub.add_parser("minimizers", help="global minimizers of G")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_minimizers)

    p = sub.add_parser("hs-check", help="Gaussian-smoothing identity error")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    _add_common(p)
    p.set_defaults(func=_cmd_hs_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
        args = build_parser().parse_args(argv)
        out = args.func(args)
        out.emit(args.output)
        return 0
    except ValidationError as exc:
        sys.stderr.write(f"error kind=validation message={exc}\n")
        return 2
    except ComputationError as exc:
        sys.stderr.write(f"error kind=computation message={exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
