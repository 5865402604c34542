"""Command-line entry point.

Exit status: 0 certified / converged / all checks pass, 1 refuted / diverged /
discrepancy, 2 usage or config error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import config as cf
from . import ffunctions as ff
from . import fixtures, picard, terrain
from .contraction import BETA_KINDS, CONDITION_I_KINDS, OMEGA_KINDS, certify, check_condition_i
from .serialize import csv_document, json_document
from .spaces import (
    DomainError,
    FiniteDomain,
    NumericError,
    finite_triangle_coefficient,
    verify_point_axioms,
    verify_triangle_triples,
)

OK, REFUTED, USAGE, NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    subcommand: str
    config_path: str | None = None
    out_format: str = "json"
    output_path: str | None = None
    overrides: dict = field(default_factory=dict)


@dataclass
class Outcome:
    status: int
    resolved: dict
    result: object
    rows: list[dict] | None = None
    columns: list[str] | None = None


WITNESS_COLUMNS = ["axiom", "x", "y", "z", "d_xy", "d_yx", "d_xz", "bound", "limsup_a", "limsup_b"]


def _need_config(run: RunConfig, schema: str) -> dict:
    if not run.config_path:
        raise cf.ConfigError(f"{run.subcommand} requires --config")
    return cf.load(run.config_path, schema)


def _apply_overrides(data: dict, run: RunConfig, keys: tuple[str, ...]) -> dict:
    out = dict(data)
    for k in keys:
        if run.overrides.get(k) is not None:
            out[k] = run.overrides[k]
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _space_verify(run: RunConfig) -> Outcome:
    data = _need_config(run, "problem")
    space, _ = cf.build_space(data["space"])
    report = verify_point_axioms(space, space.sample())
    if "triples" in data:
        tri = verify_triangle_triples(space, [tuple(t) for t in data["triples"]])
        report.triangle_ok = tri.triangle_ok
        report.witnesses.extend(tri.witnesses)
        report.details.update(triples=tri.details["triples"])
    result = {
        "space": space.describe(),
        "identity_ok": report.identity_ok,
        "symmetry_ok": report.symmetry_ok,
        "triangle_ok": report.triangle_ok,
        "witnesses": report.witnesses,
        "details": report.details,
    }
    if len(space.sample()) <= 200:
        result["b_metric_coefficient"] = finite_triangle_coefficient(space)
    return Outcome(OK if report.ok else REFUTED, data, result, report.witnesses, WITNESS_COLUMNS)


def _f_check(run: RunConfig) -> Outcome:
    if run.config_path:
        data = cf.load(run.config_path, "fcheck")
        targets = [cf.build_f(data["F"])]
    elif run.overrides.get("expr") is not None:
        if run.overrides.get("k") is None:
            raise cf.ConfigError("--expr needs --k")
        data = {"F": {"expr": run.overrides["expr"], "k": run.overrides["k"]}}
        targets = [cf.build_f(data["F"])]
    elif run.overrides.get("F") is not None:
        data = {"F": run.overrides["F"]}
        targets = [cf.build_f(data["F"])]
    else:
        data = {"F": sorted(ff.BUILTINS)}
        targets = list(ff.BUILTINS.values())
    rows = [ff.check_all(f) for f in targets]
    passed = all(r["w1"] and r["w2"] and r["w3"] for r in rows)
    return Outcome(OK if passed else REFUTED, data, rows, rows)


def _certify(run: RunConfig) -> Outcome:
    data = _need_config(run, "problem")
    data = _apply_overrides(data, run, ("margin",))
    if run.overrides.get("horizon") is not None:
        data = {**data, "space": {**data["space"], "horizon": run.overrides["horizon"]}}
        cf.validate(data, "problem")
    prob = cf.build_problem(data)
    if prob.T is None or prob.kind is None:
        raise cf.ConfigError("certify needs a map and a kind")
    if prob.kind in OMEGA_KINDS and prob.F is None:
        raise cf.ConfigError(f"{prob.kind.value} needs F")
    kw = {"truncation": prob.truncation}
    if prob.kind not in OMEGA_KINDS:
        kw["margin"] = data.get("margin", 1e-9)
        if "reich" in data:
            kw["reich"] = tuple(data["reich"])
    cert = certify(prob.kind, prob.space, prob.T, prob.S, prob.F, **kw)
    result = cert.to_dict()
    status = OK if cert.verdict != "refuted" else REFUTED
    fixture = data["space"].get("fixture")
    if fixture in fixtures.DEFAULT_HORIZON and prob.kind in BETA_KINDS and "map" not in data and "aux" not in data:
        trend = fixtures.horizon_trend(fixture, prob.kind, prob.truncation["horizon"])
        result["horizon_trend"] = trend
        if trend["limit_refutes"]:
            status = REFUTED
    if prob.kind in CONDITION_I_KINDS:
        ok, fails = check_condition_i(prob.kind, prob.space, prob.T, prob.S)
        result["condition_i"] = {"ok": ok, "failures": [list(p) for p in fails]}
        if not ok:
            status = REFUTED
    rows = [
        {"x": r.x, "y": r.y, "lhs": r.lhs, "rhs": r.rhs, "score": r.score, "admissible": r.admissible,
         "condition_i_ok": r.condition_i_ok}
        for r in cert.records
    ]
    return Outcome(status, data, result, rows)


PICARD_COLUMNS = ["n", "x_n", "step_dist", "lambda", "eta", "F_of_sum", "decrement_margin"]


def _trace_rows(trace: picard.PicardTrace, F, margins: dict) -> list[dict]:
    rows = []
    for n, x in enumerate(trace.iterates):
        row = {"n": n, "x_n": x}
        if n < trace.n_steps:
            lam, eta = trace.lambda_seq[n], trace.eta_seq[n]
            row.update(step_dist=trace.step_dist[n], **{"lambda": lam}, eta=eta)
            if F is not None and lam + eta > 0:
                row["F_of_sum"] = F(lam + eta)
            row["decrement_margin"] = margins.get(n)
        rows.append(row)
    return rows


def _picard(run: RunConfig) -> Outcome:
    data = _need_config(run, "problem")
    data = _apply_overrides(data, run, ("tol", "max_iter", "omega"))
    prob = cf.build_problem(data)
    if prob.T is None:
        raise cf.ConfigError("picard needs a map")
    starts = data.get("starts") or prob.space.sample()[:1]
    lookup = {str(x): x for x in prob.space.sample()} if isinstance(prob.space.domain, FiniteDomain) else {}
    starts = [lookup.get(str(s), s) for s in starts]
    check = picard.picard_operator_check(
        prob.space, prob.T, starts, data.get("max_iter", 1000), data.get("tol", 1e-12), prob.S,
        data.get("limit_tol", 1e-9),
    )
    omega = data.get("omega")
    traces, rows, decrement_ok = [], [], True
    for tr in check.traces:
        margins = {}
        entry = {"start": tr.iterates[0], "stop_reason": tr.stop_reason, "steps": tr.n_steps, "final": tr.final,
                 "final_step": tr.step_dist[-1], "asymptotically_regular": picard.asymptotic_regularity(tr)}
        if omega is not None and prob.F is not None:
            dec = picard.decrement_bound(tr, prob.F, omega)
            margins = {n: m for n, m in dec.margins}
            entry["decrement_ok"] = dec.ok
            decrement_ok = decrement_ok and dec.ok
        traces.append(entry)
        tr_rows = _trace_rows(tr, prob.F, margins)
        if len(check.traces) > 1:
            tr_rows = [{"start": tr.iterates[0], **r} for r in tr_rows]
        rows.extend(tr_rows)
    result = {"verdict": check.verdict, "traces": traces}
    columns = (["start"] if len(check.traces) > 1 else []) + PICARD_COLUMNS
    status = OK if check.verdict == "picard" and decrement_ok else REFUTED
    return Outcome(status, data, result, rows, columns)


def _examples(run: RunConfig) -> Outcome:
    ids = [run.overrides["id"]] if run.overrides.get("id") else None
    if ids and ids[0] not in fixtures.EXAMPLE_IDS:
        raise cf.ConfigError(f"unknown example id {ids[0]!r}; known: {', '.join(fixtures.EXAMPLE_IDS)}")
    resolved = {"ids": ids or list(fixtures.EXAMPLE_IDS), "horizon": run.overrides.get("horizon"),
                "step": run.overrides.get("step")}
    rows = fixtures.run_all(ids, run.overrides.get("horizon"), run.overrides.get("step"))
    status = OK if all(r["status"] == "pass" for r in rows) else REFUTED
    return Outcome(status, resolved, rows, rows, ["id", "check", "computed", "expected", "status", "note"])


def _terrain(run: RunConfig) -> Outcome:
    data = _need_config(run, "terrain") if run.config_path else {}
    data = _apply_overrides(data, run, ("tol", "max_iterations"))
    cfg = cf.terrain_config(data)
    report = terrain.simulate(cfg)
    iter_rows = [it.row() for it in report.iterates]
    result = {"summary": report.summary(), "iterations": iter_rows}
    dump = run.overrides.get("dump_xi")
    if dump:
        Path(dump).write_text(csv_document("terrain simulate", cfg.to_dict(), terrain.per_xi_rows(cfg, report)))
    status = OK if report.converged else REFUTED
    return Outcome(status, cfg.to_dict(), result, iter_rows)


HANDLERS = {
    "space-verify": _space_verify,
    "f-check": _f_check,
    "certify": _certify,
    "picard": _picard,
    "examples-run": _examples,
    "terrain-simulate": _terrain,
}


def dispatch(run: RunConfig, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        outcome = HANDLERS[run.subcommand](run)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=stderr)
        return NUMERIC
    except (cf.ConfigError, DomainError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return USAGE
    command = run.subcommand.replace("-", " ", 1) if run.subcommand in ("examples-run", "terrain-simulate") else run.subcommand
    if run.out_format == "csv":
        text = csv_document(command, outcome.resolved, outcome.rows or [], outcome.columns)
    else:
        text = json_document(command, outcome.resolved, outcome.result)
    if run.output_path:
        Path(run.output_path).write_text(text)
    else:
        stdout.write(text)
    if run.overrides.get("pairs_csv"):
        Path(run.overrides["pairs_csv"]).write_text(csv_document(command, outcome.resolved, outcome.rows or []))
    return outcome.status


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, config_required: bool = False) -> None:
    p.add_argument("--config", required=config_required, help="YAML or JSON config file")
    p.add_argument("--out", choices=("csv", "json"), default="json", help="output format")
    p.add_argument("--output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superfix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("space-verify", help="check identity, symmetry and triangle axioms")
    _common(p, True)

    p = sub.add_parser("f-check", help="check W1-W3 for built-in or parsed F")
    _common(p)
    p.add_argument("--F", choices=sorted(ff.BUILTINS), help="built-in F (default: all)")
    p.add_argument("--expr", help='expression such as "ln(t) + t"')
    p.add_argument("--k", type=float, help="W3 exponent for --expr")

    p = sub.add_parser("certify", help="certify or refute a contraction condition")
    _common(p, True)
    p.add_argument("--horizon", type=int, help="override a sequence fixture's horizon")
    p.add_argument("--margin", type=float, help="beta-mode safety margin")
    p.add_argument("--pairs-csv", help="also write every pair term to this CSV file")

    p = sub.add_parser("picard", help="run and diagnose Picard iterations")
    _common(p, True)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--omega", type=float, help="check the F-decrement bound with this gap")

    p = sub.add_parser("examples", help="worked examples")
    esub = p.add_subparsers(dest="action", required=True)
    e = esub.add_parser("run", help="reproduce the worked examples")
    e.add_argument("--id", help=f"one of: {', '.join(fixtures.EXAMPLE_IDS)}")
    e.add_argument("--horizon", type=int)
    e.add_argument("--step", type=float)
    e.add_argument("--out", choices=("csv", "json"), default="json")
    e.add_argument("--output")

    p = sub.add_parser("terrain", help="terrain-following control loop")
    tsub = p.add_subparsers(dest="action", required=True)
    t = tsub.add_parser("simulate", help="simulate the learning-control iteration")
    _common(t)
    t.add_argument("--tol", type=float)
    t.add_argument("--max-iterations", type=int)
    t.add_argument("--dump-xi", help="write per-position samples of the final iterate to this CSV file")
    return parser


def parse_run(argv: list[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    name = args.command
    if name in ("examples", "terrain"):
        name = f"{name}-{args.action}"
    skip = {"command", "action", "config", "out", "output"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    return RunConfig(name, getattr(args, "config", None), args.out, args.output, overrides)


def main(argv: list[str] | None = None) -> int:
    return dispatch(parse_run(argv))


if __name__ == "__main__":
    sys.exit(main())
