"""Command-line interface.

Three subcommands:

- ``decide``  run a cost-weighted Bayes rule on a two-group expression CSV
  (id column, then control replicates, then treatment replicates) and write
  per-row decisions plus a summary and a figure.
- ``simulate``  run one of the built-in risk studies and write the aggregated
  risk CSV, the per-replicate CSV, and a risk-curve figure.
- ``bench``  check the fast solver paths against the exhaustive oracle and
  time them over a size sweep, reporting fitted growth exponents.

Shared flags: ``--config`` (INI file with one section per subcommand; explicit
flags win), ``--seed``, ``--threads``, ``--out`` (output directory), and
``--stdout`` (write the primary CSV to stdout instead of files; diagnostics go
to stderr).  Exit codes: 0 success, 2 configuration or parse problem,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import math
import sys
import time
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateLikelihoodError,
    DimensionError,
    DomainError,
    NumericError,
    ParseError,
    RefusalError,
)
from .losses import LossPairKind, LossSpec
from .posteriors import (
    TwoGroupGaussian,
    eb_hyperparameters,
    posterior_mean_simple,
    psi_exact_independent,
)
from .report import render_bench_figure, render_decision_figure, render_risk_figure, fitted_slope
from .simulate import (
    composite_gaussian_config,
    dependent_exponential_config,
    run_experiment,
    two_group_config,
)
from .solvers import PosteriorSummary, brute_force_oracle, rejection_ranks, solve, solve_generic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_NA_TOKENS = {"", "na", "n/a", "nan", "null", "none"}


# ---------------------------------------------------------------- converters


def _positive_float(text) -> float:
    v = float(text)
    if not math.isfinite(v) or v <= 0:
        raise ValueError(f"expected a positive number, got {text!r}")
    return v


def _probability(text) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise ValueError(f"expected a probability in (0, 1), got {text!r}")
    return v


def _positive_int(text) -> int:
    v = int(text)
    if v < 1:
        raise ValueError(f"expected a positive integer, got {text!r}")
    return v


def _boolean(text) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _float_tuple(text) -> tuple:
    parts = [p for p in str(text).split(",") if p.strip()]
    return tuple(float(p) for p in parts)


def _int_tuple(text) -> tuple:
    parts = [p for p in str(text).split(",") if p.strip()]
    return tuple(int(p) for p in parts)


def _str_tuple(text) -> tuple:
    return tuple(p.strip() for p in str(text).split(",") if p.strip())


def _pair_kind(text) -> LossPairKind:
    try:
        return LossPairKind(str(text).strip().lower())
    except ValueError:
        names = ", ".join(k.value for k in LossPairKind)
        raise ValueError(f"unknown loss pair {text!r}; expected one of {names}")


# ------------------------------------------------------- option declarations

# name -> (converter, default); converters double as argparse `type=` and as
# config-file value parsers, so flags and config share one validation path.

_COMMON_OPTIONS = {
    "seed": (int, 0),
    "threads": (_positive_int, 1),
    "out": (str, "."),
}

_DECIDE_OPTIONS = {
    "input": (str, None),
    "pair": (_pair_kind, LossPairKind.FP_FN),
    "c0": (_positive_float, 1.0),
    "c1": (_positive_float, 1.0),
    "pi": (_probability, 0.1),
    "k0": (_positive_float, 200.0),
    "alpha": (_positive_float, 4.0),
    "beta": (_positive_float, 4.0),
    "nu": (float, 20.0),
    "eb": (_boolean, False),
    "n1": (_positive_int, None),
    "n2": (_positive_int, None),
    **_COMMON_OPTIONS,
}

_SIMULATE_OPTIONS = {
    "scenario": (str, None),
    "misspecified": (_boolean, False),
    "eb": (_boolean, False),
    "n_sims": (_positive_int, None),
    "m": (_positive_int, None),
    "particles": (_positive_int, None),
    "cost_ratios": (_float_tuple, None),
    "levels": (_float_tuple, None),
    "backends": (_str_tuple, None),
    **_COMMON_OPTIONS,
}

_BENCH_OPTIONS = {
    "sizes": (_int_tuple, (100, 1000, 10000, 100000)),
    "paths": (_str_tuple, ("fp_fn", "fdp_fnp", "fdp_mdp", "generic")),
    "repeats": (_positive_int, 1),
    "oracle_cases": (int, 25),
    "oracle_max_m": (_positive_int, 12),
    **_COMMON_OPTIONS,
}

_SECTION_OPTIONS = {
    "decide": _DECIDE_OPTIONS,
    "simulate": _SIMULATE_OPTIONS,
    "bench": _BENCH_OPTIONS,
}


def _read_config_section(path: str, section: str) -> dict:
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file: {exc}")
    except configparser.Error as exc:
        raise ConfigurationError(f"bad config file {path}: {exc}")
    if not parser.has_section(section):
        return {}
    raw = dict(parser.items(section))
    allowed = _SECTION_OPTIONS[section]
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown keys in [{section}]: {', '.join(unknown)}")
    return raw


def _settings(args, section: str) -> dict:
    """Merge defaults, the config-file section, and explicit flags (flags win)."""
    options = _SECTION_OPTIONS[section]
    raw = _read_config_section(args.config, section) if args.config else {}
    merged = {}
    for name, (convert, default) in options.items():
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            merged[name] = flag_value
        elif name in raw:
            try:
                merged[name] = convert(raw[name])
            except ValueError as exc:
                raise ConfigurationError(f"config key {name}: {exc}")
        else:
            merged[name] = default
    merged["stdout"] = bool(getattr(args, "stdout", False))
    return merged


def _out_dir(settings) -> Path:
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _note(message: str) -> None:
    print(message, file=sys.stderr)


# -------------------------------------------------------------- CSV ingestion


def read_two_group_csv(path, n1: int | None = None, n2: int | None = None):
    """Parse a header-first CSV of (id, n1 control values, n2 treatment
    values) rows into (ids, data matrix, n1, n2).  Group sizes default to an
    even split of the value columns.  Missing or non-numeric cells raise
    ParseError with the offending line number."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot open input CSV: {exc}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file: a header row is required", line=1)
        ncols = len(header)
        n_values = ncols - 1
        if n1 is None and n2 is None:
            if n_values < 4 or n_values % 2:
                raise ConfigurationError(
                    f"{n_values} value columns cannot split into two groups of "
                    ">= 2 replicates; pass n1/n2 explicitly"
                )
            n1 = n2 = n_values // 2
        elif n1 is None:
            n1 = n_values - n2
        elif n2 is None:
            n2 = n_values - n1
        if n1 < 2 or n2 < 2:
            raise ConfigurationError("need at least two replicates per group")
        if n1 + n2 != n_values:
            raise ConfigurationError(
                f"n1 + n2 = {n1 + n2} does not match the {n_values} value columns"
            )
        ids = []
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != ncols:
                raise ParseError(f"expected {ncols} fields, found {len(row)}", line=lineno)
            values = np.empty(n_values)
            for j, cell in enumerate(row[1:]):
                text = cell.strip()
                if text.lower() in _NA_TOKENS:
                    raise ParseError(
                        f"missing value in column {header[j + 1]!r}", line=lineno
                    )
                try:
                    values[j] = float(text)
                except ValueError:
                    raise ParseError(
                        f"non-numeric value {cell!r} in column {header[j + 1]!r}",
                        line=lineno,
                    )
                if not math.isfinite(values[j]):
                    raise ParseError(
                        f"non-finite value {cell!r} in column {header[j + 1]!r}",
                        line=lineno,
                    )
            ids.append(row[0])
            rows.append(values)
        if not ids:
            raise ParseError("no data rows after the header", line=2)
    return ids, np.vstack(rows), n1, n2


# ------------------------------------------------------------------- decide


def decide_frame(data, *, pi, k0, alpha, beta, nu, n1, n2, eb, pair, c0, c1):
    """Library form of the decide pipeline: posterior summaries, the Bayes
    action, and the rejection ranking for one two-group data matrix."""
    model = TwoGroupGaussian(k0=k0, alpha=alpha, beta=beta, nu=nu, n1=n1, n2=n2)
    if eb:
        nu_hat, beta_hat = eb_hyperparameters(data, k0, alpha)
        model = dataclasses.replace(model, nu=nu_hat, beta=beta_hat)
    phi = posterior_mean_simple(pi, model, data)
    psi = psi_exact_independent(phi) if pair == LossPairKind.FDP_MDP else None
    psi_adj = psi_exact_independent(phi, adjusted=True) if pair == LossPairKind.FDP_AMDP else None
    post = PosteriorSummary(phi=phi, psi=psi, psi_adj=psi_adj)
    spec = LossSpec(kind=pair, c0=c0, c1=c1, m=post.m)
    result = solve(spec, post)
    ranks = rejection_ranks(spec, post, result.k_star)
    return phi, result, ranks


def _write_decisions(stream, ids, phi, action, ranks) -> None:
    writer = csv.writer(stream)
    writer.writerow(["id", "phi", "action", "rank"])
    for i, gene in enumerate(ids):
        writer.writerow([gene, f"{phi[i]:.10g}", int(action[i]), int(ranks[i])])


def _decide_summary_lines(opts, m, n1, n2, result) -> list:
    pair = opts["pair"]
    return [
        "command=decide",
        f"input={opts['input']}",
        f"m={m}",
        f"n1={n1}",
        f"n2={n2}",
        f"pair={pair.value}",
        f"c0={opts['c0']:.10g}",
        f"c1={opts['c1']:.10g}",
        f"pi={opts['pi']:.10g}",
        f"k0={opts['k0']:.10g}",
        f"alpha={opts['alpha']:.10g}",
        f"beta={'eb' if opts['eb'] else format(opts['beta'], '.10g')}",
        f"nu={'eb' if opts['eb'] else format(opts['nu'], '.10g')}",
        f"eb={str(opts['eb']).lower()}",
        f"seed={opts['seed']}",
        f"k_star={result.k_star}",
        f"posterior_loss={result.posterior_loss:.10g}",
        f"rejections={int(result.action.sum())}",
    ]


def run_decide(args) -> int:
    opts = _settings(args, "decide")
    if opts["input"] is None:
        raise ConfigurationError("decide needs --input (or input= in the config file)")
    ids, data, n1, n2 = read_two_group_csv(opts["input"], opts["n1"], opts["n2"])
    phi, result, ranks = decide_frame(
        data,
        pi=opts["pi"], k0=opts["k0"], alpha=opts["alpha"], beta=opts["beta"],
        nu=opts["nu"], n1=n1, n2=n2, eb=opts["eb"],
        pair=opts["pair"], c0=opts["c0"], c1=opts["c1"],
    )
    summary = _decide_summary_lines(opts, len(ids), n1, n2, result)
    if opts["stdout"]:
        _write_decisions(sys.stdout, ids, phi, result.action, ranks)
        for line in summary:
            _note(line)
        return EXIT_OK
    out = _out_dir(opts)
    with open(out / "decisions.csv", "w", newline="") as fh:
        _write_decisions(fh, ids, phi, result.action, ranks)
    (out / "decide_summary.txt").write_text("\n".join(summary) + "\n")
    title = f"{opts['pair'].name}, c0/c1 = {opts['c0'] / opts['c1']:.4g}"
    render_decision_figure(phi, result.action, result.k_star, out / "decisions.png", title=title)
    for name in ("decisions.csv", "decide_summary.txt", "decisions.png"):
        _note(f"wrote {out / name}")
    return EXIT_OK


# ----------------------------------------------------------------- simulate

_SCENARIO_ALIASES = {
    "composite-gaussian": "composite-gaussian",
    "compositegaussian": "composite-gaussian",
    "dependent-exponential": "dependent-exponential",
    "dependentexponential": "dependent-exponential",
    "two-group": "two-group",
    "twogroup": "two-group",
    "twogroupgaussian": "two-group",
}


def _simulate_config(opts):
    name = _SCENARIO_ALIASES.get(str(opts["scenario"] or "").strip().lower())
    if name is None:
        raise ConfigurationError(
            f"unknown scenario {opts['scenario']!r}; expected composite-gaussian, "
            "dependent-exponential, or two-group"
        )
    kwargs = {"seed": opts["seed"], "threads": opts["threads"]}
    if opts["n_sims"] is not None:
        kwargs["n_sims"] = opts["n_sims"]
    if opts["cost_ratios"] is not None:
        kwargs["cost_ratios"] = opts["cost_ratios"]

    if name == "composite-gaussian":
        if opts["m"] is not None and opts["m"] != 12:
            raise ConfigurationError("the composite-gaussian study is fixed at m=12")
        if opts["eb"]:
            raise ConfigurationError("empirical-Bayes plug-ins apply to the two-group scenario only")
        kwargs["misspecified"] = opts["misspecified"]
        if opts["levels"] is not None:
            kwargs["bh_levels"] = opts["levels"]
        if opts["particles"] is not None:
            kwargs["smc_particles"] = opts["particles"]
        if opts["backends"] is not None:
            kwargs["backends"] = opts["backends"]
        return composite_gaussian_config(**kwargs)

    if name == "dependent-exponential":
        if opts["eb"]:
            raise ConfigurationError("empirical-Bayes plug-ins apply to the two-group scenario only")
        if opts["levels"] is not None:
            raise ConfigurationError("the dependent-exponential study has no step-up baseline")
        if opts["backends"] is not None:
            raise ConfigurationError("the dependent-exponential study runs on the particle backend")
        kwargs["misspecified"] = opts["misspecified"]
        if opts["m"] is not None:
            kwargs["m"] = opts["m"]
        if opts["particles"] is not None:
            kwargs["smc_particles"] = opts["particles"]
        return dependent_exponential_config(**kwargs)

    if opts["misspecified"] and not opts["eb"]:
        raise ConfigurationError(
            "the two-group study pairs misspecification with --eb; pass --eb"
        )
    if opts["particles"] is not None:
        raise ConfigurationError("the two-group study solves exactly; --particles does not apply")
    if opts["backends"] is not None:
        raise ConfigurationError("the two-group study runs on the exact backend")
    kwargs["empirical_bayes"] = opts["eb"]
    if opts["m"] is not None:
        kwargs["m"] = opts["m"]
    if opts["levels"] is not None:
        kwargs["bh_levels"] = opts["levels"]
    return two_group_config(**kwargs)


def run_simulate(args) -> int:
    opts = _settings(args, "simulate")
    config = _simulate_config(opts)
    report = run_experiment(config)
    if opts["stdout"]:
        report.write_risk_csv(sys.stdout)
        _note(f"{config.scenario}: {config.n_sims} replicates, m={config.m}")
        return EXIT_OK
    out = _out_dir(opts)
    report.write_risk_csv(out / "risk.csv")
    report.write_replicates_csv(out / "replicates.csv")
    render_risk_figure(report, out / "risk_curves.png")
    for name in ("risk.csv", "replicates.csv", "risk_curves.png"):
        _note(f"wrote {out / name}")
    return EXIT_OK


# -------------------------------------------------------------------- bench


def _random_posterior(rng, m: int, kind: LossPairKind) -> PosteriorSummary:
    phi = rng.random(m)
    if kind == LossPairKind.FDP_MDP:
        return PosteriorSummary(phi=phi, psi=phi * rng.random(m))
    if kind == LossPairKind.FDP_AMDP:
        return PosteriorSummary(phi=phi, psi_adj=phi * rng.random(m))
    return PosteriorSummary(phi=phi)


def oracle_suite(max_m: int, cases: int, seed: int, atol: float = 1e-12) -> dict:
    """Posterior-loss gaps between each dispatch path and the exhaustive
    search, over random instances; returns violations per loss pair."""
    rng = np.random.default_rng(seed)
    violations = {kind.value: 0 for kind in LossPairKind}
    for kind in LossPairKind:
        for m in range(1, max_m + 1):
            for ratio in (0.5, 1.0, 2.0):
                spec = LossSpec(kind=kind, c0=ratio, c1=1.0, m=m)
                for _ in range(cases):
                    post = _random_posterior(rng, m, kind)
                    fast = solve(spec, post)
                    oracle = brute_force_oracle(spec, post)
                    gap = abs(fast.posterior_loss - oracle.posterior_loss)
                    if not np.array_equal(fast.action, oracle.action) or gap > atol:
                        violations[kind.value] += 1
    return violations


_BENCH_KINDS = {
    "fp_fn": LossPairKind.FP_FN,
    "fdp_fnp": LossPairKind.FDP_FNP,
    "fdp_mdp": LossPairKind.FDP_MDP,
    "generic": LossPairKind.FDP_MDP,
}


def time_solver_paths(sizes, paths, repeats: int, seed: int) -> dict:
    """Best-of-`repeats` wall time per (path, size); the fdp_mdp entry times
    the common-order fast path, `generic` times the direct k-sweep."""
    rng = np.random.default_rng(seed)
    times = {}
    for path in paths:
        if path not in _BENCH_KINDS:
            raise ConfigurationError(
                f"unknown bench path {path!r}; expected fp_fn, fdp_fnp, fdp_mdp, generic"
            )
        kind = _BENCH_KINDS[path]
        secs = []
        for m in sizes:
            if m < 1:
                raise ConfigurationError("bench sizes must be positive")
            phi = rng.random(m)
            if path == "fdp_mdp":
                post = PosteriorSummary(phi=phi, psi=0.5 * phi)
            elif path == "generic":
                post = PosteriorSummary(phi=phi, psi=phi * rng.random(m))
            else:
                post = PosteriorSummary(phi=phi)
            spec = LossSpec(kind=kind, c0=1.0, c1=1.0, m=m)
            runner = solve_generic if path == "generic" else solve
            best = math.inf
            for _ in range(repeats):
                start = time.perf_counter()
                runner(spec, post)
                best = min(best, time.perf_counter() - start)
            secs.append(best)
        times[path] = (np.asarray(sizes, dtype=np.float64), np.asarray(secs))
    return times


def _write_bench_csv(stream, times, violations) -> None:
    writer = csv.writer(stream)
    writer.writerow(["record", "path", "m", "value"])
    for path, (sizes, secs) in times.items():
        for m, sec in zip(sizes, secs):
            writer.writerow(["time", path, int(m), f"{sec:.6g}"])
    for path, (sizes, secs) in times.items():
        writer.writerow(["slope", path, "", f"{fitted_slope(sizes, secs):.6g}"])
    for pair, count in violations.items():
        writer.writerow(["oracle_violations", pair, "", count])


def run_bench(args) -> int:
    opts = _settings(args, "bench")
    violations = {}
    if opts["oracle_cases"] > 0:
        violations = oracle_suite(opts["oracle_max_m"], opts["oracle_cases"], opts["seed"])
        total = sum(violations.values())
        _note(f"oracle suite: {total} violation(s)")
    times = time_solver_paths(opts["sizes"], opts["paths"], opts["repeats"], opts["seed"])
    for path, (sizes, secs) in times.items():
        _note(f"{path}: slope {fitted_slope(sizes, secs):.3f} over m={list(map(int, sizes))}")
    if opts["stdout"]:
        _write_bench_csv(sys.stdout, times, violations)
        return EXIT_OK
    out = _out_dir(opts)
    with open(out / "bench.csv", "w", newline="") as fh:
        _write_bench_csv(fh, times, violations)
    render_bench_figure(times, out / "bench.png")
    for name in ("bench.csv", "bench.png"):
        _note(f"wrote {out / name}")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def _add_common(sub) -> None:
    sub.add_argument("--config", help="INI config file; the section named after the subcommand applies")
    sub.add_argument("--seed", type=int, help="root seed for all randomness (default 0)")
    sub.add_argument("--threads", type=_positive_int, help="worker process cap (default 1)")
    sub.add_argument("--out", help="output directory (default current directory)")
    sub.add_argument(
        "--stdout", action="store_true",
        help="write the primary CSV to stdout instead of files; diagnostics go to stderr",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compdec",
        description="Cost-weighted Bayes rules for many simultaneous binary decisions.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    decide = subs.add_parser("decide", help="run a Bayes rule on a two-group CSV")
    decide.add_argument("--input", help="CSV of id, control replicates, treatment replicates")
    decide.add_argument("--pair", type=_pair_kind,
                        help="loss pair: fp_fn, fdp_fnp, fdp_mdp, or fdp_amdp (default fp_fn)")
    decide.add_argument("--c0", type=_positive_float, help="false-positive cost (default 1)")
    decide.add_argument("--c1", type=_positive_float, help="false-negative cost (default 1)")
    decide.add_argument("--pi", type=_probability, help="prior alternative probability (default 0.1)")
    decide.add_argument("--k0", type=_positive_float, help="prior variance multiplier (default 200)")
    decide.add_argument("--alpha", type=_positive_float, help="precision shape (default 4)")
    decide.add_argument("--beta", type=_positive_float, help="precision rate (default 4)")
    decide.add_argument("--nu", type=float, help="prior mean (default 20)")
    decide.add_argument("--eb", action="store_const", const=True,
                        help="plug in per-row empirical estimates of nu and beta")
    decide.add_argument("--n1", type=_positive_int, help="control replicates per row")
    decide.add_argument("--n2", type=_positive_int, help="treatment replicates per row")
    _add_common(decide)
    decide.set_defaults(func=run_decide)

    simulate = subs.add_parser("simulate", help="run a built-in risk study")
    simulate.add_argument("--scenario",
                          help="composite-gaussian, dependent-exponential, or two-group")
    simulate.add_argument("--misspecified", action="store_const", const=True,
                          help="use the study's misspecified analyst priors")
    simulate.add_argument("--eb", action="store_const", const=True,
                          help="two-group only: misspecified priors with empirical-Bayes plug-ins")
    simulate.add_argument("--n-sims", dest="n_sims", type=_positive_int,
                          help="number of replicates")
    simulate.add_argument("--m", type=_positive_int, help="number of components")
    simulate.add_argument("--particles", type=_positive_int, help="particle count per posterior")
    simulate.add_argument("--cost-ratios", dest="cost_ratios", type=_float_tuple,
                          help="comma-separated c0/c1 sweep")
    simulate.add_argument("--levels", type=_float_tuple,
                          help="comma-separated step-up FDR levels")
    simulate.add_argument("--backends", type=_str_tuple,
                          help="comma-separated posterior backends (composite-gaussian only)")
    _add_common(simulate)
    simulate.set_defaults(func=run_simulate)

    bench = subs.add_parser("bench", help="oracle-equivalence and timing suites")
    bench.add_argument("--sizes", type=_int_tuple,
                       help="comma-separated sweep sizes (default 100,1000,10000,100000)")
    bench.add_argument("--paths", type=_str_tuple,
                       help="solver paths to time (default fp_fn,fdp_fnp,fdp_mdp,generic)")
    bench.add_argument("--repeats", type=_positive_int, help="timing repetitions, best-of (default 1)")
    bench.add_argument("--oracle-cases", dest="oracle_cases", type=int,
                       help="random instances per (pair, size, ratio); 0 skips (default 25)")
    bench.add_argument("--oracle-max-m", dest="oracle_max_m", type=_positive_int,
                       help="largest exhaustive-search size (default 12)")
    _add_common(bench)
    bench.set_defaults(func=run_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigurationError, ParseError, DimensionError, DomainError, RefusalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DegenerateLikelihoodError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
