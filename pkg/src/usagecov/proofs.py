"""Evidence accumulation and the two-filter project selection procedure.

Evidence is scored 0..4 per criterion. Criteria belong to one proof category
(value, innovation, concept) and one macro-stage (problem setting, problem
solving). The first filter looks at problem-setting evidence only; the
decision table then grants a label, funding and/or coaching.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

CATEGORIES = ("value", "innovation", "concept")
STAGES = ("problem_setting", "problem_solving")
SUBCATEGORIES = {"value": ("profitability",)}
MAX_SCORE = 4

LABEL, FUNDING, COACHING = "label", "funding", "coaching"


class ProofError(ValueError):
    pass


@dataclass(frozen=True)
class Criterion:
    id: str
    category: str
    stage: str
    weight: float = 1.0
    subcategory: str | None = None
    description: str = ""


@dataclass(frozen=True)
class CriteriaRegistry:
    criteria: tuple[Criterion, ...]

    def __post_init__(self):
        problems = registry_problems(self.criteria)
        if problems:
            raise ProofError("; ".join(problems))

    def get(self, criterion_id: str) -> Criterion:
        for c in self.criteria:
            if c.id == criterion_id:
                return c
        raise ProofError(f"unknown criterion id {criterion_id!r}")


def registry_problems(criteria: Sequence[Criterion]) -> list[str]:
    out = []
    ids = [c.id for c in criteria]
    for cid in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(f"duplicate criterion id {cid!r}")
    for c in criteria:
        if c.category not in CATEGORIES:
            out.append(f"{c.id}: unknown category {c.category!r}")
        if c.stage not in STAGES:
            out.append(f"{c.id}: unknown stage {c.stage!r}")
        if not c.weight > 0:
            out.append(f"{c.id}: weight must be > 0")
        if c.subcategory is not None and c.subcategory not in SUBCATEGORIES.get(c.category, ()):
            out.append(f"{c.id}: subcategory {c.subcategory!r} not allowed under {c.category!r}")
    for cat in CATEGORIES:
        if not any(c.category == cat for c in criteria):
            out.append(f"no criterion in category {cat!r}")
    for stage in STAGES:
        if not any(c.stage == stage for c in criteria):
            out.append(f"no criterion in stage {stage!r}")
    return out


@dataclass(frozen=True)
class EvidenceScore:
    criterion_id: str
    score: int
    justification: str = ""

    def __post_init__(self):
        if isinstance(self.score, bool) or not isinstance(self.score, int) or not 0 <= self.score <= MAX_SCORE:
            raise ProofError(f"score for {self.criterion_id!r} must be an integer in 0..{MAX_SCORE}, "
                             f"got {self.score!r}")


@dataclass(frozen=True)
class Cell:
    accumulated: float
    max_possible: float
    normalized: float


@dataclass(frozen=True)
class ProofScores:
    cells: Mapping[tuple[str, str], Cell]
    stages: Mapping[str, Cell]
    scores: Mapping[str, int]
    unscored: tuple[str, ...]
    registry: CriteriaRegistry

    def stage_score(self, stage: str) -> float:
        return self.stages[stage].normalized


def _cell(criteria: Iterable[Criterion], scores: Mapping[str, int]) -> Cell:
    acc = sum((Fraction(c.weight) * scores.get(c.id, 0) for c in criteria), Fraction(0))
    top = sum((Fraction(c.weight) * MAX_SCORE for c in criteria), Fraction(0))
    return Cell(float(acc), float(top), float(acc / top))


def accumulate(registry: CriteriaRegistry, evidence: Sequence[EvidenceScore]) -> ProofScores:
    """Weighted evidence per (category, stage) cell and per stage.

    Unscored criteria add nothing to the accumulated value but their full
    weight to the maximum, so partial dossiers cannot inflate scores.
    """
    scores: dict[str, int] = {}
    for ev in evidence:
        registry.get(ev.criterion_id)
        if ev.criterion_id in scores:
            raise ProofError(f"duplicate score for criterion {ev.criterion_id!r}")
        scores[ev.criterion_id] = ev.score
    cells = {}
    for cat in CATEGORIES:
        for stage in STAGES:
            members = [c for c in registry.criteria if c.category == cat and c.stage == stage]
            if members:
                cells[(cat, stage)] = _cell(members, scores)
    stages = {stage: _cell([c for c in registry.criteria if c.stage == stage], scores)
              for stage in STAGES}
    unscored = tuple(c.id for c in registry.criteria if c.id not in scores)
    return ProofScores(cells, stages, scores, unscored, registry)


@dataclass(frozen=True)
class SelectionRules:
    filter1: float = 0.5
    filter2: float = 0.5
    label: float = 0.7
    excellent: float = 0.8
    low: float = 0.4

    def __post_init__(self):
        for name in ("filter1", "filter2", "label", "excellent", "low"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ProofError(f"threshold {name}={v} outside [0,1]")
        if not self.low < self.excellent:
            raise ProofError("threshold low must be < excellent")


@dataclass(frozen=True)
class FilterResult:
    passed: bool
    score: float
    threshold: float

    @property
    def margin(self) -> float:
        return self.score - self.threshold


def filter1(scores: ProofScores, rules: SelectionRules = SelectionRules()) -> FilterResult:
    """Problem-setting filter; blind to every problem-solving score."""
    if not any(c.stage == "problem_setting" for c in scores.registry.criteria):
        raise ProofError("registry has no problem_setting criteria")
    s = scores.stage_score("problem_setting")
    return FilterResult(s >= rules.filter1, s, rules.filter1)


@dataclass(frozen=True)
class DiagnosisItem:
    criterion_id: str
    category: str
    stage: str
    score: int
    shortfall: float  # weight * (MAX_SCORE - score)


@dataclass(frozen=True)
class Decision:
    gratifications: frozenset[str]
    rationale: Mapping[str, str]
    coaching_diagnosis: tuple[DiagnosisItem, ...]
    filter1: FilterResult
    setting_score: float
    solving_score: float
    diagnosis_scope: str = "none"


def diagnose(scores: ProofScores, stages: Sequence[str]) -> tuple[DiagnosisItem, ...]:
    """Criteria below the maximum score, largest weighted shortfall first."""
    items = []
    for c in scores.registry.criteria:
        if c.stage not in stages:
            continue
        s = scores.scores.get(c.id, 0)
        if s < MAX_SCORE:
            items.append(DiagnosisItem(c.id, c.category, c.stage, s, c.weight * (MAX_SCORE - s)))
    items.sort(key=lambda d: (-d.shortfall, d.criterion_id))
    return tuple(items)


def decide(scores: ProofScores, rules: SelectionRules = SelectionRules()) -> Decision:
    f1 = filter1(scores, rules)
    setting = scores.stage_score("problem_setting")
    solving = scores.stage_score("problem_solving")
    if not f1.passed:
        return Decision(frozenset(), {}, diagnose(scores, ("problem_setting",)), f1, setting, solving,
                        "problem_setting")

    grants: dict[str, str] = {}
    if solving >= rules.filter2 and setting >= rules.label:
        why = (f"problem solving {solving:.4f} >= {rules.filter2} and "
               f"problem setting {setting:.4f} >= {rules.label}")
        grants[LABEL] = why
        grants[FUNDING] = why
        return Decision(frozenset(grants), grants, (), f1, setting, solving)

    if setting >= rules.excellent:
        grants[FUNDING] = f"excellent problem setting {setting:.4f} >= {rules.excellent}"
    if setting >= rules.excellent and solving <= rules.low:
        grants[COACHING] = (f"problem setting {setting:.4f} >= {rules.excellent} with weak "
                            f"problem solving {solving:.4f} <= {rules.low}")
        return Decision(frozenset(grants), grants, diagnose(scores, ("problem_solving",)), f1,
                        setting, solving, "problem_solving")
    grants[COACHING] = (f"passed problem-setting filter ({setting:.4f} >= {rules.filter1}) "
                        f"without reaching label level")
    return Decision(frozenset(grants), grants, diagnose(scores, STAGES), f1, setting, solving, "all")
