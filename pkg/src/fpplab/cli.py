"""Command-line entry point: ``fpplab <subcommand> [flags]``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
3 a resource guard refused the run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import combinat, experiments as ex, predicates, theory
from .experiments import ExperimentConfig, ResourceGuardError
from .sptsim import dijkstra_spt
from .weights import WeightOracle, parse_seed

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

# per-subcommand defaults, kept small enough for interactive use
DEFAULTS: dict[str, dict] = {
    "constants": {"n": (1000,), "trials": 1},
    "simulate": {"n": (1000,), "trials": 1},
    "hops": {"n": (500,), "trials": 10},
    "verify-spt-tail": {"n": (10_000,), "trials": 10_000},
    "verify-rrt-height": {"n": (10_000,), "trials": 10_000},
    "verify-max-tail": {"n": (500,), "trials": 50},
    "count-pairs": {"n": (6,), "k": 3, "trials": 1},
    "light-paths": {"n": (30,), "k": 3, "trials": 1000},
    "lightest-given-light": {"n": (1000,), "k": 5, "eps": 0.3, "trials": 200},
    "predicates": {"n": (200,), "trials": 100},
    "key-lemma": {"n": (7,), "trials": 100},
    "coupling": {"n": (1000,), "trials": 10_000},
    "order-stats": {"n": (100,), "trials": 1000},
    "estimate-alpha": {"n": (250, 500, 1000), "trials": 20},
}

CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)} - {"experiment"}


class ConfigError(ValueError):
    pass


def _read_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    if not text.strip():
        return {}
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS - {"seed"}
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "seed" in raw:
        raw["master_seed"] = raw.pop("seed")
    if "n" in raw and not isinstance(raw["n"], list):
        raw["n"] = [raw["n"]]
    if "master_seed" in raw:
        raw["master_seed"] = parse_seed(raw["master_seed"])
    return raw


def _build(experiment: str, *layers: dict) -> ExperimentConfig:
    merged: dict = {}
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    try:
        return ExperimentConfig(experiment=experiment, **merged).validate()
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from None


def load_config(path: str | Path, experiment: str = "hops") -> ExperimentConfig:
    """Validated config from a JSON object file; missing keys take defaults."""
    return _build(experiment, DEFAULTS.get(experiment, {}), _read_config_file(path))


# --------------------------------------------------------------------------
# argument parsing


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    try:
        return parse_seed(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="graph size (or RRT size m)")
    common.add_argument("--n-grid", type=_int_list, help="comma-separated sizes")
    common.add_argument("--k", type=int, help="path length in edges")
    common.add_argument("--eps", type=float)
    common.add_argument("--C", type=float, dest="C")
    common.add_argument("--delta", type=float)
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=_seed, dest="master_seed", help="decimal or 0x-hex")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="CSV/JSON output path")
    common.add_argument("--config", help="JSON config file; flags take precedence")
    common.add_argument("--bonsai-eps-variant", action="store_true", default=None,
                        help="use (1-eps) log n in place of w(P) in the bonsai heights")
    parser = argparse.ArgumentParser(prog="fpplab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ex.EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return parser


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    flags = {
        "n": args.n_grid if args.n_grid else ([args.n] if args.n is not None else None),
        "k": args.k, "eps": args.eps, "C": args.C, "delta": args.delta,
        "trials": args.trials, "master_seed": args.master_seed, "workers": args.workers,
        "out": args.out, "bonsai_eps_variant": args.bonsai_eps_variant,
    }
    file_layer = _read_config_file(args.config) if args.config else {}
    return _build(args.command, DEFAULTS[args.command], file_layer, flags)


def _echo(cfg: ExperimentConfig) -> None:
    print("config: " + json.dumps(cfg.as_dict(), sort_keys=True))


def _summary_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + ".summary.json")


def _portable(cfg: ExperimentConfig) -> dict:
    """Config echo for output files: drops settings that must not change them."""
    d = cfg.as_dict()
    d.pop("workers")
    d.pop("out")
    return d


def _write_bound_rows(cfg: ExperimentConfig, rows: list[ex.BoundCheckRow]) -> None:
    if cfg.out and rows:
        cols = list(rows[0].parameters) + ex.BOUND_COLUMNS
        ex.write_csv(cfg.out, [r.as_row() for r in rows], cols)


def _print_bound_rows(rows: list[ex.BoundCheckRow]) -> None:
    for r in rows:
        params = " ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in r.parameters.items())
        status = "vacuous" if r.vacuous else ("pass" if r.passed else "FAIL")
        print(f"  {params}: empirical {r.empirical_frequency:.5f} (wilson95 {r.wilson_upper_95:.5f})"
              f" vs bound {r.theoretical_bound:.5g} [{status}]")


def _rows_exit(rows: list[ex.BoundCheckRow]) -> int:
    return EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK_FAILED


# --------------------------------------------------------------------------
# subcommands


def cmd_constants(cfg: ExperimentConfig) -> int:
    table = theory.TheoryTable.compute()
    fam = theory.EpsilonFamily.at(cfg.eps)
    n = cfg.n[0]
    print(f"alpha* = {table.alpha_star:.12f}   (reference 3.5911)")
    print(f"zeta(2) = {table.zeta2:.12f}   zeta(3) = {table.zeta3:.12f}")
    print(f"g* argmax = {table.g_star_argmax:.8f}   (reference 2 alpha* - 4 = {2 * table.alpha_star - 4:.8f})")
    print(f"g* max = {table.g_star_max:.6f}   (reference 1.02)")
    print(f"eps = {cfg.eps}: alpha_eps = {fam.alpha_eps:.10f}  beta_eps = {fam.beta_eps:.10f}"
          f"  k_eps(n={n}) = {fam.k(n):.6f}")
    if cfg.out:
        ex.write_json(cfg.out, {"config": _portable(cfg), "theory": table.as_dict(),
                                "epsilon_family": {"eps": cfg.eps, "alpha_eps": fam.alpha_eps,
                                                   "beta_eps": fam.beta_eps, "n": n, "k_eps": fam.k(n)}})
    ok = (3.5910 <= table.alpha_star <= 3.5912
          and abs(table.g_star_argmax - (2 * table.alpha_star - 4)) <= 1e-4
          and 1.01 <= table.g_star_max <= 1.03)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_simulate(cfg: ExperimentConfig) -> int:
    n = cfg.n[0]
    if n > 20_000:
        raise ResourceGuardError(f"single-source runs are capped at n = 20000 (n = {n})")
    seed = ex.trial_seed(cfg.master_seed, n, 0)
    tree = dijkstra_spt(n, 0, WeightOracle(seed))
    print(f"n = {n}, seed = {seed}: height {tree.height} ({tree.height / math.log(n):.4f} log n, "
          f"reference e = {math.e:.4f}), total weight {tree.total_weight():.6f} "
          f"(reference zeta(2) = {theory.ZETA2:.6f})")
    if cfg.out:
        rows = [{"vertex": v, "parent": int(tree.parent[v]), "depth": int(tree.depth[v]),
                 "dist": float(tree.dist[v]) * n} for v in range(n)]
        ex.write_csv(cfg.out, rows, ["vertex", "parent", "depth", "dist"])
    return EXIT_OK


def cmd_hops(cfg: ExperimentConfig) -> int:
    for n in cfg.n:
        print(f"n = {n}: estimated {ex.all_pairs_runtime_model(n, cfg.trials):.1f} s single-core")
    res = ex.run_hop_experiment(cfg)
    for row in res.aggregates:
        print(f"  n={row['n']:>5} {row['statistic']:<30} mean {row['mean']:.4f}"
              f" [{row['ci_low']:.4f}, {row['ci_high']:.4f}]  reference {row['reference']:.4f}")
    if cfg.out:
        ex.write_csv(cfg.out, [vars(r) for r in res.trials], ex.TRIAL_COLUMNS)
        ex.write_json(_summary_path(cfg.out), {"config": _portable(cfg),
                                                "seeds": ex.seed_provenance(cfg.master_seed),
                                                "aggregates": res.aggregates})
    ordered = all(r.hops_12 <= r.max_hops_from_1 <= r.max_hops_all_pairs for r in res.trials)
    return EXIT_OK if ordered else EXIT_CHECK_FAILED


def cmd_verify_spt_tail(cfg: ExperimentConfig) -> int:
    rows = []
    for n in cfg.n:
        rows += ex.verify_spt_tail(n, cfg.trials, cfg.master_seed, workers=cfg.workers)
    _print_bound_rows(rows)
    _write_bound_rows(cfg, rows)
    return _rows_exit(rows)


def cmd_verify_rrt_height(cfg: ExperimentConfig) -> int:
    rows = []
    for m in cfg.n:
        chk = ex.verify_rrt_height(m, cfg.trials, cfg.master_seed, workers=cfg.workers)
        print(f"m = {m}: mean height / log m = {chk.mean_over_log_m:.4f} (reference e = {math.e:.4f})")
        rows += chk.rows
    _print_bound_rows(rows)
    _write_bound_rows(cfg, rows)
    return _rows_exit(rows)


def cmd_verify_max_tail(cfg: ExperimentConfig) -> int:
    rows = []
    for n in cfg.n:
        rows += ex.verify_max_hops_tail(n, cfg.trials, cfg.master_seed, workers=cfg.workers)
    _print_bound_rows(rows)
    _write_bound_rows(cfg, rows)
    return _rows_exit(rows)


def cmd_count_pairs(cfg: ExperimentConfig) -> int:
    n, k = cfg.n[0], cfg.k
    table = combinat.count_pairs(n, k)
    rows = table.rows()
    bad = 0
    for r in rows:
        over = r["count"] > r["formula_bound"] or r["count"] > r["lemma_bound"]
        bad += over
        print(f"  i={r['i']} j={r['j']}: N = {r['count']}  formula {r['formula_bound']}"
              f"  lemma {r['lemma_bound']:.4g}{'  EXCEEDS' if over else ''}")
    viol = table.vanishing_rule_violations()
    if viol:
        print(f"  nonzero entries with k < i + 2j - 2: {viol}")
    if cfg.out:
        ex.write_csv(cfg.out, rows, ["n", "k", "i", "j", "count", "formula_bound", "lemma_bound"])
    return EXIT_OK if not bad and not viol else EXIT_CHECK_FAILED


def cmd_light_paths(cfg: ExperimentConfig) -> int:
    res, counts = ex.count_light_paths_mc(cfg.n[0], cfg.k, cfg.eps, cfg.trials, cfg.master_seed,
                                          cfg.workers)
    print(f"n={res.n} k={res.k} eps={res.eps}: mean count {res.mean:.4f} +- {res.se:.4f}"
          f"  reference (exact expectation) {res.exact:.4f}  z = {res.z:.2f}")
    if cfg.out:
        ex.write_csv(cfg.out, [{"trial": t, "count": int(c)} for t, c in enumerate(counts)],
                     ["trial", "count"])
    return EXIT_OK if abs(res.z) <= 3 else EXIT_CHECK_FAILED


def cmd_lightest_given_light(cfg: ExperimentConfig) -> int:
    chk = ex.verify_lightest_given_light(cfg.n[0], cfg.k, cfg.eps, cfg.trials, cfg.master_seed,
                                         cfg.workers)
    if chk.trivial_regime:
        print("  eps <= 2 loglog n / log n: bound is trivial in this regime (row vacuous)")
    _print_bound_rows([chk.row])
    _write_bound_rows(cfg, [chk.row])
    return _rows_exit([chk.row])


def cmd_predicates(cfg: ExperimentConfig) -> int:
    n = cfg.n[0]
    k = cfg.k if cfg.k is not None else math.ceil(theory.k_eps(n, cfg.eps))
    if k > n - 1:
        raise ConfigError(f"k = {k} does not fit in n = {n}")
    C = cfg.C
    rng = np.random.default_rng(ex.trial_seed(cfg.master_seed, n, 2**32))
    cal = predicates.calibrate_C(cfg.delta, k, 10_000, rng)
    print(f"calibrated C(delta={cfg.delta}, k={k}) = {cal.C:.4f} "
          f"(legal fraction {cal.fraction_legal:.4f}, 95% CI [{cal.ci_low:.4f}, {cal.ci_high:.4f}])")
    rows = ex.predicate_survey(n, k, C, cfg.trials, cfg.master_seed, eps=cfg.eps,
                               eps_variant=cfg.bonsai_eps_variant, workers=cfg.workers)
    legal = sum(r["legal"] for r in rows)
    bonsai = sum(r["bonsai"] for r in rows)
    print(f"n={n} k={k} C={C}: legal {legal}/{len(rows)} (reference >= {1 - cfg.delta:.2f} at the"
          f" calibrated C), bonsai {bonsai}/{len(rows)}")
    if cfg.out:
        ex.write_csv(cfg.out, rows, ex.PREDICATE_COLUMNS)
    return EXIT_OK


def cmd_key_lemma(cfg: ExperimentConfig) -> int:
    n = cfg.n[0]
    res = predicates.verify_key_lemma(n, cfg.trials, cfg.C, cfg.master_seed)
    print(f"n={n} C={cfg.C} trials={cfg.trials}: window paths {res.candidates}, legal {res.legal},"
          f" legal and bonsai {res.legal_and_bonsai}, counterexamples {len(res.counterexamples)}"
          f" (reference 0)")
    if cfg.out:
        cols = ["trial", "seed", "path", "weight", "rival", "rival_weight"]
        rows = [{"trial": c.trial, "seed": c.seed, "path": "-".join(map(str, c.path)),
                 "weight": c.weight, "rival": "-".join(map(str, c.rival)),
                 "rival_weight": c.rival_weight} for c in res.counterexamples]
        ex.write_csv(cfg.out, rows, cols)
    return EXIT_OK if not res.counterexamples else EXIT_CHECK_FAILED


def cmd_coupling(cfg: ExperimentConfig) -> int:
    chk = ex.verify_coupling(cfg.n[0], cfg.trials, cfg.master_seed)
    print(f"n={chk.n} paths={chk.paths}: max |w'(P) - sum U| = {chk.max_discrepancy:.4e}"
          f"  reference bound 864 (log n)^3 / n^2 = {chk.bound:.4e}")
    if cfg.out:
        ex.write_json(cfg.out, {"config": _portable(cfg), "n": chk.n, "paths": chk.paths,
                                "max_discrepancy": chk.max_discrepancy,
                                "max_quadratic": chk.max_quadratic, "bound": chk.bound,
                                "passed": chk.passed})
    return EXIT_OK if chk.passed else EXIT_CHECK_FAILED


def cmd_order_stats(cfg: ExperimentConfig) -> int:
    n = cfg.n[0]
    chk = ex.verify_uniform_order_stats(n, cfg.trials, cfg.master_seed)
    print(f"n={n} trials={cfg.trials}: KS vs uniform D = {chk.ks_uniform:.5f} (p = {chk.p_uniform:.4f});"
          f" KS of S_1/S_n vs Beta(1, n-1) D = {chk.ks_beta:.5f} (p = {chk.p_beta:.4f});"
          f" mean S_1/S_n = {chk.mean_first:.5f} (reference 1/n = {1 / n:.5f})")
    if cfg.out:
        ex.write_json(cfg.out, {"config": _portable(cfg), **vars(chk)})
    return EXIT_OK if chk.passed() else EXIT_CHECK_FAILED


def cmd_estimate_alpha(cfg: ExperimentConfig) -> int:
    if len(cfg.n) < 3:
        raise ConfigError("estimate-alpha needs at least 3 sizes (--n-grid)")
    ex.check_all_pairs_guard(cfg.n)
    total = sum(ex.all_pairs_runtime_model(n, cfg.trials) for n in cfg.n)
    print(f"estimated {total:.1f} s single-core")
    pairs, single, _ = ex.estimate_alpha(cfg.n, cfg.trials, cfg.master_seed, cfg.workers)
    for est, ref in ((pairs, theory.alpha_star()), (single, math.e)):
        lo, hi = est.ci
        print(f"  {est.statistic}: slope {est.slope:.4f} [{lo:.4f}, {hi:.4f}]  reference {ref:.4f}")
        for n, v in zip(est.n_grid, est.normalized_means):
            print(f"    n={n}: mean / log n = {v:.4f}")
    if cfg.out:
        rows = [{"n": n, "statistic": est.statistic, "mean": m, "mean_over_logn": v}
                for est in (pairs, single)
                for n, m, v in zip(est.n_grid, est.means, est.normalized_means)]
        ex.write_csv(cfg.out, rows, ["n", "statistic", "mean", "mean_over_logn"])
        ex.write_json(_summary_path(cfg.out), {
            "config": _portable(cfg), "seeds": ex.seed_provenance(cfg.master_seed),
            "slopes": {e.statistic: {"slope": e.slope, "se": e.slope_se, "intercept": e.intercept}
                       for e in (pairs, single)}})
    return EXIT_OK


COMMANDS: dict[str, Callable[[ExperimentConfig], int]] = {
    "constants": cmd_constants,
    "simulate": cmd_simulate,
    "hops": cmd_hops,
    "verify-spt-tail": cmd_verify_spt_tail,
    "verify-rrt-height": cmd_verify_rrt_height,
    "verify-max-tail": cmd_verify_max_tail,
    "count-pairs": cmd_count_pairs,
    "light-paths": cmd_light_paths,
    "lightest-given-light": cmd_lightest_given_light,
    "predicates": cmd_predicates,
    "key-lemma": cmd_key_lemma,
    "coupling": cmd_coupling,
    "order-stats": cmd_order_stats,
    "estimate-alpha": cmd_estimate_alpha,
}


def parse_and_dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return EXIT_OK if stop.code in (0, None) else EXIT_USAGE
    try:
        cfg = _resolve(args)
        _echo(cfg)
        return COMMANDS[args.command](cfg)
    except ConfigError as err:
        print(f"fpplab: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceGuardError, combinat.EnumerationLimitError) as err:
        print(f"fpplab: resource guard: {err}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as err:
        print(f"fpplab: error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(parse_and_dispatch())
