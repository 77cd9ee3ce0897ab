"""JSON model files, selection inputs and machine-readable reports.

Model files are validated against ``data/model.schema.json`` before being
turned into entities; semantic invariants are checked separately by
:func:`usagecov.model.validate_model`.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .coverage import FeasibilityResult, UCIReport
from .market import ChoiceResult, GapReport, MarketShares
from .model import (AttributeBox, DimensionLaw, Interval, ModelSpec, Product, ScaleBasedFamily,
                    UsageContext, UsageScenario, UserProfile, Violation)
from .paving import Paving
from .proofs import CriteriaRegistry, Criterion, Decision, EvidenceScore, ProofScores, SelectionRules
from .scenarios import PopulationGenSpec


class InputError(ValueError):
    """Unreadable, unparsable or schema-invalid input file."""

    def __init__(self, message: str, details: list[str] | None = None):
        super().__init__(message)
        self.details = details or []


def _schema() -> dict:
    return json.loads(resources.files("usagecov").joinpath("data/model.schema.json").read_text())


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"parse error in {path}: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc


def _path(err: jsonschema.ValidationError) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def model_from_dict(doc: Any) -> ModelSpec:
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise InputError("model file does not match the schema",
                         [f"{_path(e)}: {e.message}" for e in errors])
    perf = {dim: DimensionLaw(law["coefficient"], dict(law.get("attribute_exponents", {})),
                              dict(law.get("skill_exponents", {})), dict(law.get("factor_exponents", {})))
            for dim, law in doc["performance"].items()}
    return ModelSpec(
        attributes=dict(doc["attributes"]),
        skills=tuple(doc.get("skills", ())),
        factors=tuple(doc.get("factors", ())),
        dimensions=dict(doc["dimensions"]),
        performance=perf,
        users=tuple(UserProfile(u["id"], dict(u["skills"]), frozenset(u["anticipated_context_ids"]),
                                u.get("weight", 1.0), u["willingness_to_pay"]) for u in doc["users"]),
        contexts=tuple(UsageContext(c["id"], dict(c.get("factors", {})), c.get("description", ""))
                       for c in doc["contexts"]),
        scenarios=tuple(UsageScenario(s["id"], s["context_id"], dict(s["required_performance"]),
                                      s.get("importance_weight", 1.0), s.get("wtp_override"),
                                      s.get("description", "")) for s in doc["scenarios"]),
        products=tuple(Product(p["id"], dict(p["attributes"]), p["price"], p.get("description", ""))
                       for p in doc["products"]),
        families=tuple(ScaleBasedFamily(f["id"], tuple(f["member_ids"])) for f in doc.get("families", ())),
        competitor_ids=tuple(doc.get("competitor_ids", ())),
        name=doc.get("name", ""),
        note=doc.get("note", ""),
    )


def load_model(path: str | Path) -> ModelSpec:
    return model_from_dict(read_json(path))


def _opt(d: dict, key: str, value, default) -> None:
    if value != default:
        d[key] = value


def model_to_dict(spec: ModelSpec) -> dict:
    doc: dict[str, Any] = {}
    _opt(doc, "name", spec.name, "")
    _opt(doc, "note", spec.note, "")
    doc["attributes"] = dict(spec.attributes)
    doc["skills"] = list(spec.skills)
    doc["factors"] = list(spec.factors)
    doc["dimensions"] = dict(spec.dimensions)
    doc["performance"] = {dim: {"coefficient": law.coefficient,
                                "attribute_exponents": dict(law.attribute_exponents),
                                "skill_exponents": dict(law.skill_exponents),
                                "factor_exponents": dict(law.factor_exponents)}
                          for dim, law in spec.performance.items()}
    contexts = []
    for c in spec.contexts:
        d = {"id": c.id}
        _opt(d, "description", c.description, "")
        d["factors"] = dict(c.factors)
        contexts.append(d)
    doc["contexts"] = contexts
    scenarios = []
    for s in spec.scenarios:
        d = {"id": s.id}
        _opt(d, "description", s.description, "")
        d.update(context_id=s.context_id, required_performance=dict(s.required_performance),
                 importance_weight=s.importance_weight)
        _opt(d, "wtp_override", s.wtp_override, None)
        scenarios.append(d)
    doc["scenarios"] = scenarios
    doc["users"] = [{"id": u.id, "skills": dict(u.skills),
                     "anticipated_context_ids": sorted(u.anticipated_context_ids),
                     "weight": u.weight, "willingness_to_pay": u.willingness_to_pay}
                    for u in spec.users]
    products = []
    for p in spec.products:
        d = {"id": p.id}
        _opt(d, "description", p.description, "")
        d.update(attributes=dict(p.attributes), price=p.price)
        products.append(d)
    doc["products"] = products
    doc["families"] = [{"id": f.id, "member_ids": list(f.member_ids)} for f in spec.families]
    doc["competitor_ids"] = list(spec.competitor_ids)
    return doc


def dumps(doc: Any) -> str:
    # repr-based float output keeps machine-readable values bit-exact
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# --- selection inputs -------------------------------------------------------

def _require(obj: Any, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    return obj[key]


def registry_from_doc(doc: Any) -> CriteriaRegistry:
    items = doc.get("criteria") if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise InputError("criteria file must hold a list under 'criteria'")
    crits = []
    for i, c in enumerate(items):
        where = f"criteria[{i}]"
        weight = c.get("weight", 1.0) if isinstance(c, dict) else None
        if isinstance(weight, bool) or not isinstance(weight, (int, float)):
            raise InputError(f"{where}: weight must be a number")
        crits.append(Criterion(str(_require(c, "id", where)), _require(c, "category", where),
                               _require(c, "stage", where), float(weight), c.get("subcategory"),
                               c.get("description", "")))
    return CriteriaRegistry(tuple(crits))


def evidence_from_doc(doc: Any) -> list[EvidenceScore]:
    items = doc.get("scores") if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise InputError("evidence file must hold a list under 'scores'")
    out = []
    for i, e in enumerate(items):
        where = f"scores[{i}]"
        out.append(EvidenceScore(str(_require(e, "criterion_id", where)), _require(e, "score", where),
                                 e.get("justification", "")))
    return out


def rules_from_doc(doc: Any) -> SelectionRules:
    if not isinstance(doc, dict):
        raise InputError("rules file must be an object")
    known = {"filter1", "filter2", "label", "excellent", "low"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise InputError(f"unknown rule fields: {', '.join(unknown)}")
    return SelectionRules(**{k: float(v) for k, v in doc.items()})


def population_gen_from_doc(doc: Any) -> PopulationGenSpec:
    if not isinstance(doc, dict):
        raise InputError("population spec must be an object")
    return PopulationGenSpec(
        user_count=int(_require(doc, "user_count", "population")),
        skill_ranges={k: (float(lo), float(hi)) for k, (lo, hi) in doc.get("skill_ranges", {}).items()},
        wtp_range=tuple(map(float, doc.get("wtp_range", (0.0, 0.0)))),
        adoption={k: float(v) for k, v in doc.get("adoption", {}).items()},
        seed=int(doc.get("seed", 0)),
        weight=float(doc.get("weight", 1.0)),
        id_prefix=str(doc.get("id_prefix", "pop")),
    )


# --- box syntax -------------------------------------------------------------

_NAME = re.compile(r"[A-Za-z_][\w.-]*")
_NUM = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_WS = re.compile(r"\s*")


class BoxSyntaxError(InputError):
    def __init__(self, text: str, pos: int, what: str):
        super().__init__(f"malformed box at position {pos}: {what}\n  {text}\n  {' ' * pos}^")
        self.pos = pos


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        self.pos = _WS.match(self.text, self.pos).end()

    def token(self, pattern: re.Pattern, what: str) -> str:
        self.skip()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise BoxSyntaxError(self.text, self.pos, f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def char(self, c: str) -> None:
        self.skip()
        if not self.text.startswith(c, self.pos):
            raise BoxSyntaxError(self.text, self.pos, f"expected {c!r}")
        self.pos += 1

    def at_end(self) -> bool:
        self.skip()
        return self.pos == len(self.text)


def parse_box(text: str) -> AttributeBox:
    """Parse ``"power=[100,400];stroke_rate=[800,3000]"`` into a box."""
    sc = _Scanner(text)
    bounds: dict[str, Interval] = {}
    while True:
        start = sc.pos
        name = sc.token(_NAME, "attribute name")
        if name in bounds:
            raise BoxSyntaxError(text, start, f"duplicate attribute {name!r}")
        sc.char("=")
        sc.char("[")
        sc.skip()
        num_at = sc.pos
        lo = float(sc.token(_NUM, "number"))
        sc.char(",")
        hi = float(sc.token(_NUM, "number"))
        sc.char("]")
        if not 0 < lo <= hi:
            raise BoxSyntaxError(text, num_at, "bounds must satisfy 0 < lo <= hi")
        bounds[name] = Interval(lo, hi)
        if sc.at_end():
            break
        sc.char(";")
        if sc.at_end():
            break
    return AttributeBox(bounds)


def format_box(box: AttributeBox) -> str:
    return ";".join(f"{k}=[{iv.lo!r},{iv.hi!r}]" for k, iv in sorted(box.bounds.items()))


# --- report documents -------------------------------------------------------

def violation_doc(v: Violation) -> dict:
    return asdict(v)


def feasibility_doc(r: FeasibilityResult) -> dict:
    return {"feasible": r.feasible, "performance_slack": dict(r.performance_slack),
            "price_ok": r.price_ok, "binding_constraint": r.binding_constraint}


def uci_doc(r: UCIReport) -> dict:
    doc: dict[str, Any] = {"subject": r.subject, "object": r.object, "uci": r.uci}
    if r.user_reports:
        doc["users"] = [{"user_id": u.subject, "weight": w, "uci": u.uci}
                        for u, w in zip(r.user_reports, r.user_weights)]
    else:
        doc["covered_weight"] = r.covered_weight
        doc["breakdown"] = [{"scenario_id": b.scenario_id, "raw_weight": b.raw_weight, "weight": b.weight,
                             "covered": b.covered, "covering": list(b.covering),
                             "results": {k: feasibility_doc(v) for k, v in b.results.items()}}
                            for b in r.breakdown]
    return doc


def choice_doc(c: ChoiceResult) -> dict:
    return asdict(c)


def shares_doc(m: MarketShares) -> dict:
    return {"shares": dict(m.shares), "no_purchase": m.no_purchase, "total": m.total,
            "choices": [choice_doc(c) for c in m.choices]}


def gaps_doc(g: GapReport) -> dict:
    return {"disclaimer": g.disclaimer, "competitor_ids": list(g.competitor_ids),
            "entries": [dict(rank=i + 1, **asdict(e)) for i, e in enumerate(g.entries)]}


def box_doc(box: AttributeBox) -> dict:
    return {k: [iv.lo, iv.hi] for k, iv in sorted(box.bounds.items())}


def paving_doc(p: Paving) -> dict:
    return {"scenario_id": p.scenario_id, "user_id": p.user_id, "box": box_doc(p.box), "price": p.price,
            "price_ok": p.price_ok, "tolerance": p.tolerance,
            "volume": {"inner": p.inner_fraction, "boundary": p.boundary_fraction,
                       "excluded": p.excluded_fraction},
            "inner_boxes": [box_doc(b) for b in p.inner_boxes],
            "boundary_boxes": [box_doc(b) for b in p.boundary_boxes]}


def proof_scores_doc(s: ProofScores) -> dict:
    return {"cells": [{"category": cat, "stage": stage, **asdict(cell)}
                      for (cat, stage), cell in s.cells.items()],
            "stages": {k: asdict(v) for k, v in s.stages.items()},
            "unscored": list(s.unscored)}


def decision_doc(d: Decision) -> dict:
    return {"filter1": {"passed": d.filter1.passed, "score": d.filter1.score,
                        "threshold": d.filter1.threshold, "margin": d.filter1.margin},
            "setting_score": d.setting_score, "solving_score": d.solving_score,
            "gratifications": sorted(d.gratifications),
            "rationale": dict(sorted(d.rationale.items())),
            "diagnosis_scope": d.diagnosis_scope,
            "coaching_diagnosis": [asdict(i) for i in d.coaching_diagnosis]}
