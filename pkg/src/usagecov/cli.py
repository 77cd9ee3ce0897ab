"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 valid input but undefined result
(a user with empty demand).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .coverage import check_feasibility, uci, uci_population
from .files import (InputError, decision_doc, dumps, evidence_from_doc, gaps_doc, load_model, model_to_dict,
                    parse_box, paving_doc, population_gen_from_doc, proof_scores_doc, read_json,
                    registry_from_doc, rules_from_doc, shares_doc, uci_doc, violation_doc)
from .market import coverage_gaps, market_share
from .model import ModelError, ModelSpec, UnknownIdError, validate_model
from .paving import BOUNDARY, EXCLUDED, INNER, locate, pave_feasible
from .proofs import CATEGORIES, STAGES, ProofError, SelectionRules, accumulate, decide
from .scenarios import EmptyDemandError, sample_population

EXIT_OK, EXIT_INVALID, EXIT_UNDEFINED = 0, 2, 3
DEFAULT_SEED = 42
DEFAULT_TOL = 1e-2

BUNDLED = {
    "@demo": "demo_model.json",
    "@criteria": "criteria.json",
    "@rules": "rules_default.json",
    "@excellent-setting": "dossier_excellent_setting_weak_solving.json",
    "@weak-setting": "dossier_weak_setting.json",
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    model: str
    seed: int
    tolerance: float
    output_dir: str | None
    fmt: str
    threads: int


@contextmanager
def _resolve(name: str):
    if name in BUNDLED:
        with resources.as_file(resources.files("usagecov").joinpath("data", BUNDLED[name])) as p:
            yield p
    else:
        yield Path(name)


def _read(name: str):
    with _resolve(name) as p:
        return read_json(p)


def _load_valid_model(name: str) -> ModelSpec:
    with _resolve(name) as p:
        spec = load_model(p)
    violations = validate_model(spec)
    if violations:
        raise CliError("model violates invariants:\n" + "\n".join(f"  {v}" for v in violations))
    return spec


def _ids(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


class Report:
    """Collects output in the requested format; human mode rounds to 4 decimals."""

    def __init__(self, command: str, cfg: RunConfig):
        self.command = command
        self.cfg = cfg
        self.buf = io.StringIO()
        if cfg.fmt == "human":
            self.line(f"# usagecov {command} | seed={cfg.seed} | human format: values rounded to 4 decimals")

    @property
    def human(self) -> bool:
        return self.cfg.fmt == "human"

    def line(self, text: str = "") -> None:
        self.buf.write(text + "\n")

    def table(self, header: list[str], rows: list[list]) -> None:
        w = csv.writer(self.buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])

    def machine(self, result) -> None:
        self.buf.write(dumps({"command": self.command, "seed": self.cfg.seed, "result": result}))

    def flush(self, out) -> None:
        text = self.buf.getvalue()
        if self.cfg.output_dir:
            d = Path(self.cfg.output_dir)
            d.mkdir(parents=True, exist_ok=True)
            path = d / f"{self.command}.{'csv' if self.human else 'json'}"
            path.write_text(text, encoding="utf-8")
            print(f"wrote {path}", file=sys.stderr)
        else:
            out.write(text)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4f}"
    if v is None:
        return ""
    return v


def _pool(cfg: RunConfig):
    return ThreadPoolExecutor(max_workers=max(1, cfg.threads))


# --- commands ---------------------------------------------------------------

def cmd_validate(args, cfg: RunConfig, out) -> int:
    with _resolve(args.model_file) as p:
        spec = load_model(p)
    violations = validate_model(spec)
    rep = Report("validate", cfg)
    if rep.human:
        for v in violations:
            rep.line(f"violation: {v}")
        rep.line(f"{'INVALID' if violations else 'OK'}: {len(violations)} violation(s) in {args.model_file}")
    else:
        rep.machine({"valid": not violations, "violations": [violation_doc(v) for v in violations]})
    rep.flush(out)
    return EXIT_INVALID if violations else EXIT_OK


def cmd_coverage(args, cfg: RunConfig, out) -> int:
    spec = _load_valid_model(cfg.model)
    if args.product is not None:
        spec.product(args.product)
        objects = [args.product]
    elif args.family is not None:
        spec.family(args.family)
        objects = [args.family]
    else:
        objects = [p.id for p in spec.products] + [f.id for f in spec.families]
    users = [u.id for u in spec.users]
    if args.user is not None:
        spec.user(args.user)

    with _pool(cfg) as pool:
        if args.user is not None:
            reports = list(pool.map(lambda o: uci(spec, args.user, o), objects))
        else:
            reports = [uci_population(spec, users, o, map_fn=pool.map) for o in objects]

    rows = []
    for r in reports:
        if r.user_reports:
            covered = float(sum(Fraction(w) * Fraction(u.uci) for u, w in zip(r.user_reports, r.user_weights)))
            total = float(sum(Fraction(w) for w in r.user_weights))
        else:
            covered = float(sum(Fraction(b.raw_weight) for b in r.breakdown if b.covered))
            total = float(sum(Fraction(b.raw_weight) for b in r.breakdown))
        kind = "family" if spec.has("family", r.object) else "product"
        rows.append([r.subject, r.object, kind, r.uci, covered, total])
    rep = Report("coverage", cfg)
    if rep.human:
        rep.table(["subject", "object", "object_kind", "uci", "covered_weight", "total_weight"], rows)
    else:
        rep.machine({"rows": [dict(zip(["subject", "object", "object_kind", "uci", "covered_weight",
                                        "total_weight"], row)) for row in rows],
                     "reports": [uci_doc(r) for r in reports]})
    rep.flush(out)
    return EXIT_OK


def _default_products(spec: ModelSpec) -> list[str]:
    return list(spec.competitor_ids) or [p.id for p in spec.products]


def cmd_market(args, cfg: RunConfig, out) -> int:
    spec = _load_valid_model(cfg.model)
    products = _ids(args.products)
    products = _default_products(spec) if products is None else products
    users = _ids(args.users) or [u.id for u in spec.users]
    for pid in products:
        spec.product(pid)
    with _pool(cfg) as pool:
        shares = market_share(spec, users, products, map_fn=pool.map)
    rep = Report("market", cfg)
    if rep.human:
        rep.table(["product_id", "share"], [[p, s] for p, s in shares.shares.items()]
                  + [["no_purchase", shares.no_purchase]])
        rep.line(f"# sum of shares incl. no_purchase = {shares.total:.4f}")
        rep.line("# choices")
        rep.table(["user_id", "chosen", "chosen_uci", "runner_up", "runner_up_uci", "tie_break"],
                  [[c.user_id, c.chosen, c.chosen_uci, c.runner_up, c.runner_up_uci, c.tie_break_applied]
                   for c in shares.choices])
    else:
        rep.machine(shares_doc(shares))
    rep.flush(out)
    return EXIT_OK


def cmd_gaps(args, cfg: RunConfig, out) -> int:
    spec = _load_valid_model(cfg.model)
    competitors = _ids(args.competitors)
    competitors = _default_products(spec) if competitors is None else competitors
    for pid in competitors:
        spec.product(pid)
    users = _ids(args.users) or [u.id for u in spec.users]
    with _pool(cfg) as pool:
        report = coverage_gaps(spec, users, competitors, map_fn=pool.map)
    rep = Report("gaps", cfg)
    if rep.human:
        rep.line(f"# {report.disclaimer}")
        rep.line(f"# competitors: {','.join(report.competitor_ids) or '(none)'}")
        rep.table(["rank", "scenario_id", "uncoveredness", "demand_mass", "wtp_mass", "gap_score",
                   "demanding_users", "uncovered_users"],
                  [[i + 1, e.scenario_id, e.uncoveredness, e.demand_mass, e.wtp_mass, e.gap_score,
                    e.demanding_users, e.uncovered_users] for i, e in enumerate(report.entries)])
    else:
        rep.machine(gaps_doc(report))
    rep.flush(out)
    return EXIT_OK


def _monte_carlo(spec, paving, n: int, seed: int) -> dict:
    """Uniform samples classified by point feasibility and paving cell."""
    rng = np.random.default_rng(seed)
    scenario = spec.scenario(paving.scenario_id)
    user = spec.user(paving.user_id)
    names = sorted(paving.box.bounds)
    lo = np.array([paving.box.bounds[k].lo for k in names])
    hi = np.array([paving.box.bounds[k].hi for k in names])
    pts = np.minimum(hi, lo + (hi - lo) * rng.random((n, len(names))))
    cells = locate(paving, pts)
    ok = np.array([check_feasibility(spec, scenario, dict(zip(names, map(float, x))), paving.price,
                                     user).feasible for x in pts], dtype=bool)
    return {"samples": n, "feasible_fraction": float(ok.mean()),
            "inner_fraction": float((cells == INNER).mean()),
            "boundary_fraction": float((cells == BOUNDARY).mean()),
            "infeasible_in_inner": int((~ok & (cells == INNER)).sum()),
            "feasible_outside_paving": int((ok & (cells == EXCLUDED)).sum())}


def cmd_pave(args, cfg: RunConfig, out) -> int:
    spec = _load_valid_model(cfg.model)
    box = parse_box(args.box)
    paving = pave_feasible(spec, args.scenario, args.user, box, cfg.tolerance, args.price)
    mc = _monte_carlo(spec, paving, args.mc_samples, cfg.seed) if args.mc_samples > 0 else None
    rep = Report("pave", cfg)
    if rep.human:
        rep.line(f"# scenario={paving.scenario_id} user={paving.user_id} price={paving.price} "
                 f"price_ok={paving.price_ok} tolerance={paving.tolerance}")
        rep.line(f"# volume fractions: inner={paving.inner_fraction:.4f} "
                 f"boundary={paving.boundary_fraction:.4f} excluded={paving.excluded_fraction:.4f}")
        if mc:
            rep.line(f"# monte carlo: samples={mc['samples']} feasible_fraction={mc['feasible_fraction']:.4f} "
                     f"inner_fraction={mc['inner_fraction']:.4f} boundary_fraction={mc['boundary_fraction']:.4f} "
                     f"infeasible_in_inner={mc['infeasible_in_inner']} "
                     f"feasible_outside_paving={mc['feasible_outside_paving']}")
        names = sorted(paving.box.bounds)
        header = ["kind", "index"] + [f"{n}_{e}" for n in names for e in ("lo", "hi")]
        rows = []
        for kind, boxes in (("inner", paving.inner_boxes), ("boundary", paving.boundary_boxes)):
            for i, b in enumerate(boxes):
                rows.append([kind, i] + [v for n in names for v in (b.bounds[n].lo, b.bounds[n].hi)])
        rep.table(header, rows)
    else:
        doc = paving_doc(paving)
        if mc:
            doc["monte_carlo"] = mc
        rep.machine(doc)
    rep.flush(out)
    return EXIT_OK


def cmd_select(args, cfg: RunConfig, out) -> int:
    registry = registry_from_doc(_read(args.criteria))
    evidence = evidence_from_doc(_read(args.evidence))
    rules = rules_from_doc(_read(args.rules)) if args.rules else SelectionRules()
    scores = accumulate(registry, evidence)
    decision = decide(scores, rules)
    rep = Report("select", cfg)
    if rep.human:
        f1 = decision.filter1
        rep.line(f"filter 1 (problem setting): {'PASS' if f1.passed else 'FAIL'} "
                 f"score={f1.score:.4f} threshold={f1.threshold:.4f} margin={f1.margin:+.4f}")
        rep.line(f"problem solving score: {decision.solving_score:.4f}")
        rep.table(["category", "stage", "accumulated", "max_possible", "normalized"],
                  [[cat, stage, c.accumulated, c.max_possible, c.normalized]
                   for cat in CATEGORIES for stage in STAGES
                   if (c := scores.cells.get((cat, stage))) is not None])
        rep.line(f"gratifications: {{{', '.join(sorted(decision.gratifications))}}}")
        for g, why in sorted(decision.rationale.items()):
            rep.line(f"  {g}: {why}")
        rep.line(f"coaching diagnosis ({decision.diagnosis_scope}):")
        rep.table(["criterion_id", "category", "stage", "score", "shortfall"],
                  [[d.criterion_id, d.category, d.stage, d.score, d.shortfall]
                   for d in decision.coaching_diagnosis])
    else:
        rep.machine({"scores": proof_scores_doc(scores), "decision": decision_doc(decision)})
    rep.flush(out)
    return EXIT_OK


def cmd_sample(args, cfg: RunConfig, out) -> int:
    spec = _load_valid_model(cfg.model)
    gen = population_gen_from_doc(_read(args.population))
    gen = replace(gen, seed=cfg.seed)
    users = sample_population(gen, spec)
    rep = Report("sample", cfg)
    if rep.human:
        rep.table(["user_id", "weight", "willingness_to_pay", "anticipated_context_ids"]
                  + [f"skill_{s}" for s in spec.skills],
                  [[u.id, u.weight, u.willingness_to_pay, ";".join(sorted(u.anticipated_context_ids))]
                   + [u.skills[s] for s in spec.skills] for u in users])
    else:
        # a complete model file, ready to be fed back to the other commands
        rep.buf.write(dumps(model_to_dict(replace(spec, users=tuple(users)))))
    rep.flush(out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("machine", "human"), default="human",
                        help="machine: JSON with exact values; human: CSV rounded to 4 decimals")
    common.add_argument("--output-dir", default=None, help="write the report into this directory")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="paving tolerance (relative width)")
    with_model = argparse.ArgumentParser(add_help=False, parents=[common])
    with_model.add_argument("--model", default="@demo", help="model file, or @demo for the bundled demo")

    parser = argparse.ArgumentParser(prog="usagecov", description="Usage coverage simulation and project selection")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a model file")
    p.add_argument("model_file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("coverage", parents=[with_model], help="usage coverage indicators")
    p.add_argument("--user")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--product")
    grp.add_argument("--family")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("market", parents=[with_model], help="market share simulation")
    p.add_argument("--products", help="comma-separated product ids (default: competitors)")
    p.add_argument("--users", help="comma-separated user ids (default: all)")
    p.set_defaults(func=cmd_market)

    p = sub.add_parser("gaps", parents=[with_model], help="coverage-gap ranking")
    p.add_argument("--competitors", help='comma-separated product ids; "" for a greenfield market')
    p.add_argument("--users", help="comma-separated user ids (default: all)")
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("pave", parents=[with_model], help="set-based paving of feasible attributes")
    p.add_argument("--scenario", required=True)
    p.add_argument("--user", required=True)
    p.add_argument("--box", required=True, help='e.g. "power=[300,1000];stroke_rate=[2000,3500]"')
    p.add_argument("--price", type=float, required=True)
    p.add_argument("--mc-samples", type=int, default=0, help="Monte Carlo soundness check sample count")
    p.set_defaults(func=cmd_pave)

    p = sub.add_parser("select", parents=[common], help="two-filter project selection")
    p.add_argument("--criteria", default="@criteria")
    p.add_argument("--evidence", required=True, help="evidence file, or @excellent-setting / @weak-setting")
    p.add_argument("--rules", default=None, help="rules file (default thresholds if omitted)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("sample", parents=[with_model], help="generate a synthetic population")
    p.add_argument("--population", required=True, help="population generation spec (JSON)")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    cfg = RunConfig(getattr(args, "model", getattr(args, "model_file", "")), args.seed, args.tol,
                    args.output_dir, args.format, args.threads)
    try:
        if not (cfg.tolerance > 0):
            raise CliError("--tol must be > 0")
        if cfg.threads < 1:
            raise CliError("--threads must be >= 1")
        return args.func(args, cfg, out)
    except EmptyDemandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDEFINED
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for d in exc.details:
            print(f"  {d}", file=sys.stderr)
        return EXIT_INVALID
    except (CliError, ModelError, ProofError, UnknownIdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main_entry() -> None:
    try:
        code = main()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); keep the exit-code contract
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    sys.exit(main())
