"""Scenario feasibility and Usage Coverage Indicators (UCIs).

A scenario is covered when delivered performance meets every required level
and the price does not exceed the effective willingness-to-pay. Coverage is
binary; the UCI is the weighted covered fraction of the personal scenario
space. Weighted sums are accumulated as exact rationals and rounded once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .exact import exact_ratio, exact_weighted_mean
from .model import ModelError, ModelSpec, Product, UsageScenario, UserProfile, _monomial
from .scenarios import expected_scenarios

PRICE = "price"


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    performance_slack: Mapping[str, float]
    price_ok: bool
    binding_constraint: str | None


def effective_wtp(scenario: UsageScenario, user: UserProfile) -> float:
    return scenario.wtp_override if scenario.wtp_override is not None else user.willingness_to_pay


def check_feasibility(spec: ModelSpec, scenario: UsageScenario, attributes: Mapping[str, float],
                      price: float, user: UserProfile) -> FeasibilityResult:
    """Feasibility of an explicit design point (attributes, price) for a scenario."""
    factors = spec.context(scenario.context_id).factors
    required = scenario.required_performance
    slack = {}
    binding = None
    # performance dimensions in name order, then price
    for dim in sorted(required):
        delivered = _monomial(spec.performance[dim], attributes, user.skills, factors)
        slack[dim] = delivered - required[dim]
        if binding is None and delivered < required[dim]:
            binding = dim
    price_ok = price <= effective_wtp(scenario, user)
    if binding is None and not price_ok:
        binding = PRICE
    return FeasibilityResult(binding is None, slack, price_ok, binding)


def feasibility(spec: ModelSpec, scenario: UsageScenario, product: Product,
                user: UserProfile) -> FeasibilityResult:
    return check_feasibility(spec, scenario, product.attributes, product.price, user)


def is_feasible(spec: ModelSpec, scenario_id: str, product_id: str, user_id: str) -> FeasibilityResult:
    return feasibility(spec, spec.scenario(scenario_id), spec.product(product_id), spec.user(user_id))


@dataclass(frozen=True)
class ScenarioCoverage:
    """Coverage of one scenario: per-member results and the covering members."""

    scenario_id: str
    raw_weight: float
    weight: float
    results: Mapping[str, FeasibilityResult]

    @property
    def covering(self) -> tuple[str, ...]:
        return tuple(pid for pid, r in self.results.items() if r.feasible)

    @property
    def covered(self) -> bool:
        return any(r.feasible for r in self.results.values())


def covered_fraction(breakdown: Sequence[ScenarioCoverage]) -> float:
    return exact_ratio((b.raw_weight for b in breakdown if b.covered), (b.raw_weight for b in breakdown))


def weighted_mean(pairs: Sequence[tuple[float, float]]) -> float:
    """Exact weighted mean of (weight, value) pairs, rounded once."""
    value, ok = exact_weighted_mean(pairs)
    if not ok:
        raise ModelError("sum of user weights must be > 0")
    return value


@dataclass(frozen=True)
class UCIReport:
    """UCI of a subject (user or population) for an object (product or family).

    Single-user reports carry a per-scenario ``breakdown``; population reports
    carry the per-user reports in ``user_reports``.
    """

    subject: str
    object: str
    uci: float
    breakdown: tuple[ScenarioCoverage, ...] = ()
    user_reports: tuple[UCIReport, ...] = ()
    user_weights: tuple[float, ...] = ()

    def recompute(self) -> float:
        if self.user_reports:
            return weighted_mean(list(zip(self.user_weights, (r.uci for r in self.user_reports))))
        return covered_fraction(self.breakdown)

    @property
    def covered_weight(self) -> float:
        return sum(b.weight for b in self.breakdown if b.covered)


def _members(spec: ModelSpec, object_id: str) -> tuple[str, ...]:
    if spec.has("family", object_id):
        members = spec.family(object_id).member_ids
        if not members:
            raise ModelError(f"family {object_id!r} has no members")
        return members
    return (spec.product(object_id).id,)


def _uci_members(spec: ModelSpec, user_id: str, object_id: str, members: Sequence[str]) -> UCIReport:
    user = spec.user(user_id)
    products = [spec.product(m) for m in members]
    breakdown = []
    for entry in expected_scenarios(spec, user_id).entries:
        scenario = spec.scenario(entry.scenario_id)
        results = {p.id: feasibility(spec, scenario, p, user) for p in products}
        breakdown.append(ScenarioCoverage(entry.scenario_id, entry.raw_weight, entry.weight, results))
    breakdown = tuple(breakdown)
    return UCIReport(user_id, object_id, covered_fraction(breakdown), breakdown)


def uci_single(spec: ModelSpec, user_id: str, product_id: str) -> UCIReport:
    return _uci_members(spec, user_id, product_id, (spec.product(product_id).id,))


def uci_family(spec: ModelSpec, user_id: str, family_id: str) -> UCIReport:
    """A scenario counts as covered if any member, at its own price, is feasible."""
    family = spec.family(family_id)
    if not family.member_ids:
        raise ModelError(f"family {family_id!r} has no members")
    return _uci_members(spec, user_id, family_id, family.member_ids)


def uci(spec: ModelSpec, user_id: str, object_id: str) -> UCIReport:
    """UCI for a product or a family id."""
    return _uci_members(spec, user_id, object_id, _members(spec, object_id))


def uci_population(spec: ModelSpec, user_ids: Sequence[str], object_id: str,
                   subject: str = "population", map_fn=map) -> UCIReport:
    if not user_ids:
        raise ModelError("empty user list")
    reports = tuple(map_fn(lambda u: uci(spec, u, object_id), user_ids))
    weights = tuple(spec.user(u).weight for u in user_ids)
    value = weighted_mean(list(zip(weights, (r.uci for r in reports))))
    return UCIReport(subject, object_id, value, user_reports=reports, user_weights=weights)
