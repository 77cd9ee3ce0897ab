"""Domain entities and the monomial performance model.

Delivered performance on each dimension ``k`` is a power law::

    perf_k = c_k * prod_j attr_j**a_kj * prod_d skill_d**s_kd * prod_f factor_f**g_kf

Every factor is monotone in its variable, so the image of an attribute box is
obtained exactly from two corners of the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping


class ModelError(ValueError):
    """Invalid model content or an argument that does not fit the model."""


class UnknownIdError(LookupError):
    def __init__(self, kind: str, ident: str):
        super().__init__(f"unknown {kind} id: {ident!r}")
        self.kind = kind
        self.ident = ident


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class UserProfile:
    id: str
    skills: Mapping[str, float]
    anticipated_context_ids: frozenset[str]
    weight: float = 1.0
    willingness_to_pay: float = 0.0


@dataclass(frozen=True)
class UsageContext:
    id: str
    factors: Mapping[str, float] = field(default_factory=dict)
    description: str = ""


@dataclass(frozen=True)
class UsageScenario:
    id: str
    context_id: str
    required_performance: Mapping[str, float]
    importance_weight: float = 1.0
    wtp_override: float | None = None
    description: str = ""


@dataclass(frozen=True)
class Product:
    id: str
    attributes: Mapping[str, float]
    price: float
    description: str = ""


@dataclass(frozen=True)
class ScaleBasedFamily:
    id: str
    member_ids: tuple[str, ...]


@dataclass(frozen=True)
class DimensionLaw:
    """Power law for one performance dimension."""

    coefficient: float
    attribute_exponents: Mapping[str, float] = field(default_factory=dict)
    skill_exponents: Mapping[str, float] = field(default_factory=dict)
    factor_exponents: Mapping[str, float] = field(default_factory=dict)

    @cached_property
    def terms(self) -> tuple[tuple[tuple[str, float], ...], ...]:
        """(name, exponent) pairs for attributes, skills and factors, in name order."""
        return tuple(tuple(sorted(exps.items()))
                     for exps in (self.attribute_exponents, self.skill_exponents, self.factor_exponents))


@dataclass(frozen=True)
class ModelSpec:
    """A complete usage coverage model.

    ``attributes`` and ``dimensions`` map names to unit labels. Units are
    carried for reporting only.
    """

    attributes: Mapping[str, str]
    skills: tuple[str, ...]
    factors: tuple[str, ...]
    dimensions: Mapping[str, str]
    performance: Mapping[str, DimensionLaw]
    users: tuple[UserProfile, ...]
    contexts: tuple[UsageContext, ...]
    scenarios: tuple[UsageScenario, ...]
    products: tuple[Product, ...]
    families: tuple[ScaleBasedFamily, ...] = ()
    competitor_ids: tuple[str, ...] = ()
    name: str = ""
    note: str = ""

    @cached_property
    def _index(self) -> dict[str, dict]:
        return {
            "user": {u.id: u for u in self.users},
            "context": {c.id: c for c in self.contexts},
            "scenario": {s.id: s for s in self.scenarios},
            "product": {p.id: p for p in self.products},
            "family": {f.id: f for f in self.families},
        }

    def _get(self, kind: str, ident: str):
        try:
            return self._index[kind][ident]
        except KeyError:
            raise UnknownIdError(kind, ident) from None

    def user(self, ident: str) -> UserProfile:
        return self._get("user", ident)

    def context(self, ident: str) -> UsageContext:
        return self._get("context", ident)

    def scenario(self, ident: str) -> UsageScenario:
        return self._get("scenario", ident)

    def product(self, ident: str) -> Product:
        return self._get("product", ident)

    def family(self, ident: str) -> ScaleBasedFamily:
        return self._get("family", ident)

    def has(self, kind: str, ident: str) -> bool:
        return ident in self._index[kind]


@dataclass(frozen=True)
class AttributeBox:
    bounds: Mapping[str, Interval]

    def __post_init__(self):
        for name, iv in self.bounds.items():
            if not (math.isfinite(iv.lo) and math.isfinite(iv.hi)):
                raise ModelError(f"box bound for {name!r} is not finite")
            if not 0 < iv.lo <= iv.hi:
                raise ModelError(f"box bound for {name!r} must satisfy 0 < lo <= hi, got [{iv.lo}, {iv.hi}]")

    @classmethod
    def from_pairs(cls, pairs: Mapping[str, tuple[float, float]]) -> AttributeBox:
        return cls({k: Interval(float(lo), float(hi)) for k, (lo, hi) in pairs.items()})

    def corner(self, upper: Mapping[str, bool]) -> dict[str, float]:
        return {k: (iv.hi if upper[k] else iv.lo) for k, iv in self.bounds.items()}


@dataclass(frozen=True)
class Violation:
    entity: str
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.entity}.{self.field}: {self.rule}"


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_names(out, entity, fld, given, declared, kind):
    for name in sorted(set(declared) - set(given)):
        out.append(Violation(entity, fld, f"missing declared {kind} {name!r}"))
    for name in sorted(set(given) - set(declared)):
        out.append(Violation(entity, fld, f"undeclared {kind} {name!r}"))


def _check_unique(out, kind, items):
    seen = set()
    for item in items:
        if item.id in seen:
            out.append(Violation(f"{kind}[{item.id}]", "id", "duplicate id"))
        seen.add(item.id)


def validate_model(spec: ModelSpec) -> list[Violation]:
    """Check every structural and referential invariant; never raises."""
    out: list[Violation] = []
    for kind, items in (("users", spec.users), ("contexts", spec.contexts),
                        ("scenarios", spec.scenarios), ("products", spec.products)):
        if not items:
            out.append(Violation("model", kind, "at least one entry required"))
    for kind, items in (("users", spec.users), ("contexts", spec.contexts),
                        ("scenarios", spec.scenarios), ("products", spec.products),
                        ("families", spec.families)):
        _check_unique(out, kind, items)
    for f in spec.families:
        if spec.has("product", f.id):
            out.append(Violation(f"families[{f.id}]", "id", "id collides with a product id"))

    dims = set(spec.dimensions)
    for dim in sorted(dims - set(spec.performance)):
        out.append(Violation("performance", dim, "declared dimension has no law"))
    for dim, law in sorted(spec.performance.items()):
        ent = f"performance[{dim}]"
        if dim not in dims:
            out.append(Violation(ent, "dimension", "undeclared performance dimension"))
        if not (_finite(law.coefficient) and law.coefficient > 0):
            out.append(Violation(ent, "coefficient", "must be finite and > 0"))
        for fld, exps, declared in (("attribute_exponents", law.attribute_exponents, spec.attributes),
                                    ("skill_exponents", law.skill_exponents, spec.skills),
                                    ("factor_exponents", law.factor_exponents, spec.factors)):
            for name, e in sorted(exps.items()):
                if name not in declared:
                    out.append(Violation(ent, fld, f"references undeclared name {name!r}"))
                if not _finite(e):
                    out.append(Violation(ent, fld, f"exponent for {name!r} must be finite"))
                elif fld == "skill_exponents" and e < 0:
                    out.append(Violation(ent, fld, f"exponent for {name!r} must be >= 0"))

    for u in spec.users:
        ent = f"users[{u.id}]"
        _check_names(out, ent, "skills", u.skills, spec.skills, "skill")
        for name, level in sorted(u.skills.items()):
            if not (_finite(level) and 0.0 <= level <= 1.0):
                out.append(Violation(ent, "skills", f"skill {name!r}={level} outside [0,1]"))
        if not (_finite(u.weight) and u.weight >= 0):
            out.append(Violation(ent, "weight", "must be finite and >= 0"))
        if not (_finite(u.willingness_to_pay) and u.willingness_to_pay >= 0):
            out.append(Violation(ent, "willingness_to_pay", "must be finite and >= 0"))
        if not u.anticipated_context_ids:
            out.append(Violation(ent, "anticipated_context_ids", "must be nonempty"))
        for cid in sorted(u.anticipated_context_ids):
            if not spec.has("context", cid):
                out.append(Violation(ent, "anticipated_context_ids", f"unknown context id {cid!r}"))

    for c in spec.contexts:
        ent = f"contexts[{c.id}]"
        _check_names(out, ent, "factors", c.factors, spec.factors, "factor")
        for name, v in sorted(c.factors.items()):
            if not (_finite(v) and v > 0):
                out.append(Violation(ent, "factors", f"factor {name!r}={v} must be > 0"))

    for s in spec.scenarios:
        ent = f"scenarios[{s.id}]"
        if not spec.has("context", s.context_id):
            out.append(Violation(ent, "context_id", f"unknown context id {s.context_id!r}"))
        if not (_finite(s.importance_weight) and s.importance_weight > 0):
            out.append(Violation(ent, "importance_weight", "must be finite and > 0"))
        for dim, req in sorted(s.required_performance.items()):
            if dim not in dims:
                out.append(Violation(ent, "required_performance", f"undeclared dimension {dim!r}"))
            if not (_finite(req) and req >= 0):
                out.append(Violation(ent, "required_performance", f"level for {dim!r} must be >= 0"))
        if s.wtp_override is not None and not (_finite(s.wtp_override) and s.wtp_override >= 0):
            out.append(Violation(ent, "wtp_override", "must be finite and >= 0"))

    for p in spec.products:
        ent = f"products[{p.id}]"
        _check_names(out, ent, "attributes", p.attributes, spec.attributes, "attribute")
        for name, v in sorted(p.attributes.items()):
            if not (_finite(v) and v > 0):
                out.append(Violation(ent, "attributes", f"attribute {name!r}={v} must be > 0"))
        if not (_finite(p.price) and p.price >= 0):
            out.append(Violation(ent, "price", "must be finite and >= 0"))

    for f in spec.families:
        ent = f"families[{f.id}]"
        if not f.member_ids:
            out.append(Violation(ent, "member_ids", "must be nonempty"))
        if len(set(f.member_ids)) != len(f.member_ids):
            out.append(Violation(ent, "member_ids", "duplicate member id"))
        for mid in f.member_ids:
            if not spec.has("product", mid):
                out.append(Violation(ent, "member_ids", f"unknown product id {mid!r}"))

    for pid in spec.competitor_ids:
        if not spec.has("product", pid):
            out.append(Violation("model", "competitor_ids", f"unknown product id {pid!r}"))
    return out


def _monomial(law: DimensionLaw, attrs: Mapping[str, float], skills: Mapping[str, float],
              factors: Mapping[str, float]) -> float:
    # point and interval evaluation must share this exact operation order
    value = law.coefficient
    attr_terms, skill_terms, factor_terms = law.terms
    for name, e in attr_terms:
        value *= attrs[name] ** e
    for name, e in skill_terms:
        value *= skills[name] ** e
    for name, e in factor_terms:
        value *= factors[name] ** e
    return value


def performance_at(spec: ModelSpec, attributes: Mapping[str, float], user: UserProfile,
                   context: UsageContext) -> dict[str, float]:
    """Delivered performance for an explicit attribute vector."""
    return {dim: _monomial(spec.performance[dim], attributes, user.skills, context.factors)
            for dim in sorted(spec.performance)}


def evaluate_performance(spec: ModelSpec, product_id: str, user_id: str,
                         context_id: str) -> dict[str, float]:
    product = spec.product(product_id)
    return performance_at(spec, product.attributes, spec.user(user_id), spec.context(context_id))


def interval_performance(spec: ModelSpec, box: AttributeBox, user: UserProfile,
                         context: UsageContext, dims=None) -> dict[str, Interval]:
    missing = set(spec.attributes) - set(box.bounds)
    extra = set(box.bounds) - set(spec.attributes)
    if missing or extra:
        raise ModelError(f"box must cover exactly the model attributes; "
                         f"missing={sorted(missing)} extra={sorted(extra)}")
    out = {}
    for dim in sorted(spec.performance) if dims is None else dims:
        law = spec.performance[dim]
        rising = {k: law.attribute_exponents.get(k, 0.0) >= 0 for k in box.bounds}
        falling = {k: not up for k, up in rising.items()}
        lo = _monomial(law, box.corner(falling), user.skills, context.factors)
        hi = _monomial(law, box.corner(rising), user.skills, context.factors)
        out[dim] = Interval(lo, hi)
    return out


def evaluate_performance_interval(spec: ModelSpec, box: AttributeBox, user_id: str,
                                  context_id: str) -> dict[str, Interval]:
    """Exact range of each performance dimension over an attribute box."""
    return interval_performance(spec, box, spec.user(user_id), spec.context(context_id))
