"""Command-line front end: generate instances, analyze games, run batch suites.

Output discipline: stdout carries exactly one JSON document per invocation,
diagnostics go to stderr.  Exit codes: 0 success, 1 input error, 2 capacity
refusal, 3 property-suite failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from .coalitions import Allocation, Coalition
from .errors import CapacityError, CostGamesError, DegenerateGameError, LpError
from .games import (CAP_TABLE, GAME_FORMAT, CostGame, TableGame, TsgGame,
                    load_game, random_subadditive_game)
from .metric import (INSTANCE_FORMAT, DistanceMatrix, gen_asymmetric_metric,
                     gen_euclidean, load_instance, save_instance,
                     validate_metric)
from .semicore import bounds_report, coss_closed_form, soes_closed_form
from .stability import (TOL_LP, StabilityResult, cost_of_semicore_stability_lp,
                        cost_of_stability, optimal_alpha_core,
                        optimal_eps_core, optimal_eps_semicore_lp,
                        verify_allocation)
from .tsp import CAP_EXACT

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CAPACITY = 2
EXIT_SUITE = 3
EXIT_USAGE = 64

CONCEPTS = ("core", "cos", "eps-core", "alpha", "semicore", "coss",
            "eps-semicore", "bounds")
# concepts that touch every coalition and therefore need the full cost table
FULL_TABLE_CONCEPTS = frozenset({"core", "cos", "eps-core", "alpha"})

CSV_COLUMNS = ("instance_id", "n", "symmetric", "c_grand", "cos", "wOeC",
               "sOeC", "alpha", "coss", "sOeS", "bound_mst",
               "bound_max_marginal", "bound_avg_ir", "semicore_empty")

CHECK_NAMES = ("core-nonempty", "semicore-nonempty", "semicore-empty",
               "coss-formula-matches-lp", "soes-formula-matches-lp",
               "coss-soes-ratio", "cos-equals-n-weak", "alpha-identity",
               "tsg-alpha-bound", "mst-chain", "max-marginal-bound",
               "avg-ir-bound", "find-empty-semicore")


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _diag(msg: str) -> None:
    print(f"costgames: {msg}", file=sys.stderr)


def _error_exit(code: int, kind: str, detail: str) -> int:
    _emit({"error": {"kind": kind, "detail": detail}})
    _diag(detail)
    return code


class _Parser(argparse.ArgumentParser):
    """argparse that exits 64 on usage problems and keeps stdout JSON-only."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        _emit({"error": {"kind": "usage", "detail": message}})
        self.exit(EXIT_USAGE, f"costgames: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="costgames",
                     description="Stability analysis for metric cost games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a routing instance file")
    p_gen.add_argument("--kind", choices=("euclidean", "asymmetric"),
                       required=True)
    p_gen.add_argument("--n", type=int, required=True,
                       help="player count (matrix gets one extra depot row)")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True, help="output path")
    p_gen.add_argument("--box", type=float, default=100.0,
                       help="square side for euclidean point placement")

    for name, note in (("analyze", "compute stability concepts for one file"),
                       ("bounds", "shortcut for analyze --concepts bounds")):
        p = sub.add_parser(name, help=note)
        p.add_argument("path", help="instance or cost-game file")
        if name == "analyze":
            p.add_argument("--concepts", default=",".join(CONCEPTS),
                           help="comma list from: " + ", ".join(CONCEPTS))
        p.add_argument("--weight", choices=("strong", "weak", "cost"),
                       default="strong",
                       help="weighting for the eps-core / eps-semicore LPs")
        p.add_argument("--tol", type=float, default=TOL_LP)

    p_batch = sub.add_parser("batch", help="run a suite from a JSON config")
    p_batch.add_argument("config", help="batch configuration file")
    p_batch.add_argument("--jobs", type=int, default=None,
                         help="concurrent instance evaluations")
    p_batch.add_argument("--tol", type=float, default=None)
    p_batch.add_argument("--out", default=None,
                         help="override the CSV path from the config")
    p_batch.add_argument("--no-plots", action="store_true",
                         help="skip figure rendering")
    return parser


# ---------------------------------------------------------------------------
# gen

def cmd_gen(args: argparse.Namespace) -> int:
    if args.n < 1:
        return _error_exit(EXIT_INPUT, "input", "--n must be at least 1")
    if args.kind == "euclidean":
        m = gen_euclidean(args.n, args.seed, box=args.box)
    else:
        m = gen_asymmetric_metric(args.n, args.seed)
    report = validate_metric(m)
    if not report.valid:
        return _error_exit(EXIT_INPUT, "input",
                           f"generated matrix failed validation: "
                           f"{report.violations[:3]}")
    path = save_instance(m, args.out, seed=args.seed, generator=args.kind)
    _emit({
        "written": str(path),
        "format": INSTANCE_FORMAT,
        "kind": args.kind,
        "n": args.n,
        "seed": args.seed,
        "symmetric": m.symmetric,
        "valid": True,
    })
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze

def _load_any(path: str) -> tuple[CostGame, dict[str, Any]]:
    """Load either file format; the descriptor makes the report re-runnable."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise CostGamesError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CostGamesError(f"{path} is not valid JSON: {exc}") from exc
    fmt = doc.get("format")
    if fmt == INSTANCE_FORMAT:
        matrix, meta = load_instance(p)
        game: CostGame = TsgGame(matrix)
        desc = {"path": str(p), "format": fmt, "kind": "tsg",
                "n": game.n, "symmetric": matrix.symmetric,
                "seed": meta.get("seed"), "generator": meta.get("generator")}
    elif fmt == GAME_FORMAT:
        game = load_game(p)
        desc = {"path": str(p), "format": fmt, "kind": "table",
                "n": game.n, "symmetric": None, "seed": None,
                "generator": None}
    else:
        raise CostGamesError(f"{path}: unknown format {fmt!r}")
    return game, desc


def _capacity_gate(game: CostGame, concepts: list[str]) -> str | None:
    """Return a refusal message before any solve if a concept is over cap."""
    if isinstance(game, TsgGame) and game.n > CAP_EXACT:
        return (f"instance has {game.n} players; tour costs are capped at "
                f"{CAP_EXACT}")
    heavy = sorted(FULL_TABLE_CONCEPTS.intersection(concepts))
    if heavy and game.n > CAP_TABLE:
        return (f"concepts {heavy} need all {2 ** game.n - 1} coalition "
                f"costs; capped at {CAP_TABLE} players, got {game.n}")
    return None


def _table_digest(game: CostGame) -> str:
    table = game.all_costs()
    payload = ",".join(f"{mask}:{cost!r}" for mask, cost in table.items())
    return hashlib.sha256(payload.encode("ascii")).hexdigest()


def _verify_result(game: CostGame, res: StabilityResult, tol: float) -> None:
    """Re-check a witness against its defining constraints before it is printed."""
    if res.concept == "alpha":
        # the ratio witness spends at most the grand cost and must not
        # overcharge any coalition, the grand one included
        total = res.witness.total()
        if total > game.grand_cost() + tol:
            raise LpError("ratio witness exceeds the grand cost")
        for mask, cost in game.all_costs().items():
            s = Coalition(mask, game.n)
            if res.witness.of_coalition(s) > cost + tol:
                raise LpError(f"ratio witness overcharges coalition {mask}")
        return
    reduce_grand = res.concept in ("core", "cos", "semicore", "coss")
    verify_allocation(game, res.witness, res.family, res.weight,
                      relief=res.value, reduce_grand=reduce_grand, tol=tol)


def _run_concept(game: CostGame, concept: str, weight: str,
                 tol: float) -> StabilityResult:
    if concept == "core":
        res = cost_of_stability(game, tol)
        return StabilityResult("core", res.family, res.weight, res.value,
                               res.alpha, res.witness, res.status)
    if concept == "cos":
        return cost_of_stability(game, tol)
    if concept == "eps-core":
        return optimal_eps_core(game, weight, tol)
    if concept == "alpha":
        return optimal_alpha_core(game, tol)
    if concept == "semicore":
        res = cost_of_semicore_stability_lp(game, tol)
        return StabilityResult("semicore", res.family, res.weight, res.value,
                               res.alpha, res.witness, res.status)
    if concept == "coss":
        return cost_of_semicore_stability_lp(game, tol)
    if concept == "eps-semicore":
        return optimal_eps_semicore_lp(game, weight, tol)
    raise ValueError(concept)


def cmd_analyze(args: argparse.Namespace, concepts_override: str | None = None,
                ) -> int:
    raw = concepts_override if concepts_override is not None else args.concepts
    concepts: list[str] = []
    for name in (s.strip() for s in raw.split(",")):
        if not name:
            continue
        if name not in CONCEPTS:
            return _error_exit(EXIT_USAGE, "usage",
                               f"unknown concept {name!r}; choose from "
                               f"{', '.join(CONCEPTS)}")
        if name not in concepts:
            concepts.append(name)
    if not concepts:
        return _error_exit(EXIT_USAGE, "usage", "no concepts requested")
    if "eps-semicore" in concepts and args.weight == "cost":
        return _error_exit(EXIT_USAGE, "usage",
                           "eps-semicore supports strong or weak weights only")

    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    try:
        game, desc = _load_any(args.path)
    except CostGamesError as exc:
        return _error_exit(EXIT_INPUT, "input", str(exc))
    timings["load"] = round((time.perf_counter() - t0) * 1e3, 3)

    refusal = _capacity_gate(game, concepts)
    if refusal is not None:
        return _error_exit(EXIT_CAPACITY, "capacity-refusal", refusal)

    report: dict[str, Any] = {"report": "analysis", "instance": desc,
                              "tol": args.tol}
    t0 = time.perf_counter()
    if game.n <= CAP_TABLE:
        report["cost_table_digest"] = _table_digest(game)
    else:
        report["cost_table"] = "on-demand"
    report["grand_cost"] = game.grand_cost()
    timings["cost_table"] = round((time.perf_counter() - t0) * 1e3, 3)

    results: list[dict] = []
    bounds_doc: dict | None = None
    for concept in concepts:
        t0 = time.perf_counter()
        try:
            if concept == "bounds":
                bounds_doc = bounds_report(game, args.tol).to_dict()
            else:
                res = _run_concept(game, concept, args.weight, args.tol)
                _verify_result(game, res, args.tol)
                results.append(res.to_dict())
        except DegenerateGameError as exc:
            return _error_exit(EXIT_INPUT, "input",
                               f"{concept}: degenerate game: {exc}")
        except (CapacityError, ValueError) as exc:
            return _error_exit(EXIT_INPUT, "input", f"{concept}: {exc}")
        except LpError as exc:
            return _error_exit(EXIT_INPUT, "input",
                               f"{concept}: solver failure: {exc}")
        timings[concept] = round((time.perf_counter() - t0) * 1e3, 3)
    report["results"] = results
    report["bounds"] = bounds_doc
    report["timings_ms"] = timings
    _emit(report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# batch

def _expand_range(spec: Any, what: str) -> list[int]:
    """Accept an int (count from zero for seeds, single value otherwise
    handled by caller), or a two-element [lo, hi] inclusive range."""
    if isinstance(spec, int):
        return [spec]
    if (isinstance(spec, list) and len(spec) == 2
            and all(isinstance(v, int) for v in spec) and spec[0] <= spec[1]):
        return list(range(spec[0], spec[1] + 1))
    raise ValueError(f"{what} must be an integer or [lo, hi] pair")


def _family_instances(fam: dict, index: int) -> list[dict]:
    kind = fam.get("kind")
    if kind not in ("euclidean", "asymmetric", "subadditive"):
        raise ValueError(f"family {index}: unknown kind {kind!r}")
    fam_id = fam.get("id", f"{kind}{index}")
    ns = _expand_range(fam.get("n"), f"family {index}: n")
    seeds = fam.get("seeds")
    if isinstance(seeds, int):
        seed_list = list(range(seeds))
    else:
        seed_list = _expand_range(seeds, f"family {index}: seeds")
    out = []
    for n in ns:
        for seed in seed_list:
            out.append({"id": f"{fam_id}/n{n}/s{seed}", "kind": kind,
                        "n": n, "seed": seed,
                        "empty_semicore": fam.get("empty_semicore"),
                        "box": fam.get("box", 100.0)})
    return out


def _build_game(spec: dict) -> CostGame:
    if spec["kind"] == "euclidean":
        return TsgGame(gen_euclidean(spec["n"], spec["seed"], box=spec["box"]),
                       validate=False)
    if spec["kind"] == "asymmetric":
        return TsgGame(gen_asymmetric_metric(spec["n"], spec["seed"]),
                       validate=False)
    return random_subadditive_game(spec["n"], spec["seed"],
                                   empty_semicore=spec["empty_semicore"])


def _evaluate_instance(spec: dict, checks: list[str], tol: float) -> dict:
    """One batch row: metrics for the CSV plus pass/fail per requested check."""
    game = _build_game(spec)
    n = game.n
    is_tsg = isinstance(game, TsgGame)
    symmetric = game.matrix.symmetric if is_tsg else None
    grand = game.grand_cost()

    row: dict[str, Any] = {"instance_id": spec["id"], "n": n,
                           "symmetric": symmetric, "c_grand": grand}
    cos = woec = soec = alpha = None
    if n <= CAP_TABLE:
        cos = cost_of_stability(game, tol)
        woec = optimal_eps_core(game, "weak", tol)
        soec = optimal_eps_core(game, "strong", tol)
        try:
            alpha = optimal_alpha_core(game, tol).value
        except DegenerateGameError:
            alpha = None
    coss = cost_of_semicore_stability_lp(game, tol)
    soes = optimal_eps_semicore_lp(game, "strong", tol)
    bounds = bounds_report(game, tol)

    row["cos"] = cos.value if cos else None
    row["wOeC"] = woec.value if woec else None
    row["sOeC"] = soec.value if soec else None
    row["alpha"] = alpha
    row["coss"] = coss.value
    row["sOeS"] = soes.value
    row["bound_mst"] = (bounds.cos_mst_bound.value
                        if bounds.cos_mst_bound else None)
    row["bound_max_marginal"] = bounds.coss_max_marginal_bound.value
    row["bound_avg_ir"] = bounds.coss_avg_ir_bound
    row["semicore_empty"] = bounds.semicore_empty

    verdicts: dict[str, tuple[str, dict | None]] = {}
    for check in checks:
        verdicts[check] = _run_check(check, spec, game, row, tol,
                                     cos, coss, soes)
    return {"spec": spec, "row": row, "verdicts": verdicts}


def _run_check(check: str, spec: dict, game: CostGame, row: dict, tol: float,
               cos: StabilityResult | None, coss: StabilityResult,
               soes: StabilityResult) -> tuple[str, dict | None]:
    """Returns ("pass"|"fail"|"skip", detail-for-failures)."""
    n = game.n
    grand = row["c_grand"]
    is_tsg = spec["kind"] in ("euclidean", "asymmetric")

    def fail(**kv: Any) -> tuple[str, dict]:
        return "fail", {"check": check, "instance": spec["id"], **kv}

    if check == "find-empty-semicore":
        # summary-level tally, never a per-instance failure
        return ("pass" if row["semicore_empty"] else "skip"), None
    if check == "core-nonempty":
        if cos is None:
            return "skip", None
        return ("pass", None) if cos.value <= tol else fail(cos=cos.value)
    if check == "semicore-nonempty":
        return (("pass", None) if coss.value <= tol
                else fail(coss=coss.value))
    if check == "semicore-empty":
        return (("pass", None) if coss.value > tol
                else fail(coss=coss.value))
    if check == "coss-formula-matches-lp":
        if not row["semicore_empty"]:
            return "skip", None
        cf = coss_closed_form(game, tol)
        gap = abs(cf - coss.value)
        return ("pass", None) if gap <= tol else fail(formula=cf,
                                                      lp=coss.value, gap=gap)
    if check == "soes-formula-matches-lp":
        if not row["semicore_empty"]:
            return "skip", None
        cf = soes_closed_form(game, tol)
        gap = abs(cf - soes.value)
        return ("pass", None) if gap <= tol else fail(formula=cf,
                                                      lp=soes.value, gap=gap)
    if check == "coss-soes-ratio":
        gap = abs(coss.value - (n / (n - 1.0)) * soes.value)
        return ("pass", None) if gap <= tol else fail(coss=coss.value,
                                                      soes=soes.value, gap=gap)
    if check == "cos-equals-n-weak":
        if cos is None or row["wOeC"] is None:
            return "skip", None
        gap = abs(cos.value - n * row["wOeC"])
        tol_here = max(tol, 1e-6)
        return ("pass", None) if gap <= tol_here else fail(
            cos=cos.value, n_times_weak=n * row["wOeC"], gap=gap)
    if check == "alpha-identity":
        if cos is None or row["alpha"] is None:
            return "skip", None
        gap = abs(cos.value - grand * (1.0 - 1.0 / row["alpha"]))
        return ("pass", None) if gap <= 1e-6 else fail(
            cos=cos.value, alpha=row["alpha"], gap=gap)
    if check == "tsg-alpha-bound":
        if not is_tsg or cos is None or row["alpha"] is None:
            return "skip", None
        if row["alpha"] > 1.5 + tol:
            return fail(alpha=row["alpha"])
        if cos.value > grand / 3.0 + 1e-6:
            return fail(cos=cos.value, third_of_grand=grand / 3.0)
        return "pass", None
    if check == "mst-chain":
        if cos is None or row["bound_mst"] is None:
            return "skip", None
        b = row["bound_mst"]
        ok = cos.value <= b + tol and b <= 0.5 * grand + tol
        return ("pass", None) if ok else fail(cos=cos.value, bound=b,
                                              half_of_grand=0.5 * grand)
    if check == "max-marginal-bound":
        b = row["bound_max_marginal"]
        return (("pass", None) if coss.value <= b + tol
                else fail(coss=coss.value, bound=b))
    if check == "avg-ir-bound":
        if row["bound_avg_ir"] is None:
            return "skip", None
        b = row["bound_avg_ir"]
        return (("pass", None) if coss.value <= b + tol
                else fail(coss=coss.value, bound=b))
    raise ValueError(f"unknown check {check!r}")


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def cmd_batch(args: argparse.Namespace) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        return _error_exit(EXIT_INPUT, "input",
                           f"cannot read config {args.config}: {exc}")
    try:
        cfg = json.loads(text)
        families = cfg["families"]
        checks = list(cfg.get("checks", []))
        if not isinstance(families, list) or not families:
            raise ValueError("families must be a non-empty list")
        for c in checks:
            if c not in CHECK_NAMES:
                raise ValueError(f"unknown check {c!r}; choose from "
                                 f"{', '.join(CHECK_NAMES)}")
        specs: list[dict] = []
        for i, fam in enumerate(families):
            specs.extend(_family_instances(fam, i))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        return _error_exit(EXIT_USAGE, "usage", f"malformed config: {exc}")

    tol = args.tol if args.tol is not None else float(cfg.get("tol", TOL_LP))
    jobs = args.jobs if args.jobs is not None else int(cfg.get("jobs", 1))
    jobs = max(1, jobs)
    csv_path = Path(args.out if args.out is not None
                    else cfg.get("csv", "batch.csv"))
    want_plots = (not args.no_plots) and bool(cfg.get("plots", True))

    try:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(
                lambda s: _evaluate_instance(s, checks, tol), specs))
    except (CostGamesError, ValueError) as exc:
        return _error_exit(EXIT_INPUT, "input", f"instance evaluation: {exc}")

    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for out in outcomes:
            writer.writerow(_csv_cell(out["row"][c]) for c in CSV_COLUMNS)

    check_summaries = []
    any_fail = False
    for check in checks:
        tally = {"pass": 0, "fail": 0, "skip": 0}
        first_failure = None
        for out in outcomes:
            verdict, detail = out["verdicts"][check]
            tally[verdict] += 1
            if verdict == "fail" and first_failure is None:
                first_failure = dict(detail)
                first_failure["spec"] = out["spec"]
                first_failure["row"] = {k: out["row"][k] for k in CSV_COLUMNS}
        summary: dict[str, Any] = {"check": check, **tally,
                                   "first_failure": first_failure}
        if check == "find-empty-semicore":
            found = tally["pass"]
            summary["found"] = found
            summary["tried"] = len(outcomes)
            summary["shortfall"] = found == 0
            if found == 0:
                _diag("find-empty-semicore: no empty-semicore instance in "
                      f"{len(outcomes)} samples (sampling shortfall)")
            summary["fail"] = 0
        if summary["fail"]:
            any_fail = True
        check_summaries.append(summary)

    figures: list[str] = []
    if want_plots:
        from .plotting import render_batch_figures
        try:
            figures = [str(p) for p in render_batch_figures(
                [out["row"] for out in outcomes], csv_path.parent)]
        except Exception as exc:  # noqa: BLE001  (plots must not sink the run)
            _diag(f"figure rendering failed: {exc}")

    _emit({
        "report": "batch",
        "config": str(args.config),
        "instances": len(outcomes),
        "csv": str(csv_path),
        "figures": figures,
        "checks": check_summaries,
        "status": "fail" if any_fail else "pass",
    })
    return EXIT_SUITE if any_fail else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        return cmd_gen(args)
    if args.command == "analyze":
        return cmd_analyze(args)
    if args.command == "bounds":
        return cmd_analyze(args, concepts_override="bounds")
    return cmd_batch(args)


if __name__ == "__main__":
    sys.exit(main())
