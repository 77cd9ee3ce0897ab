"""Deterministic product choice, market shares and coverage-gap ranking."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .coverage import effective_wtp, feasibility, uci_single
from .model import ModelError, ModelSpec
from .scenarios import EmptyDemandError, expected_scenarios

# UCIs closer than this are a tie; absorbs rounding from rescaled weights
UCI_TIE_TOL = 1e-12

GAP_DISCLAIMER = (
    "gap_score = uncoveredness * demand_mass * wtp_mass is a heuristic ranking; "
    "it is not a calibrated threshold for 'badly covered' scenarios"
)


@dataclass(frozen=True)
class ChoiceResult:
    user_id: str
    chosen: str | None
    chosen_uci: float
    runner_up: str | None
    runner_up_uci: float | None
    tie_break_applied: str | None  # None, "price" or "lexicographic"


def _pick(cands: list[tuple[str, float, float]]) -> tuple[tuple[str, float, float], str | None]:
    """Best (id, uci, price): max uci, then lowest price, then smallest id."""
    best = max(u for _, u, _ in cands)
    tied = [c for c in cands if c[1] >= best - UCI_TIE_TOL]
    if len(tied) == 1:
        return tied[0], None
    cheapest = min(p for _, _, p in tied)
    by_price = sorted(c for c in tied if c[2] == cheapest)
    return by_price[0], ("price" if len(by_price) == 1 else "lexicographic")


def choose(user_id: str, ucis: Mapping[str, float], prices: Mapping[str, float]) -> ChoiceResult:
    cands = [(pid, ucis[pid], prices[pid]) for pid in sorted(ucis)]
    first, tie = _pick(cands)
    if first[1] <= 0.0:
        return ChoiceResult(user_id, None, 0.0, None, None, None)
    rest = [c for c in cands if c[0] != first[0]]
    second = _pick(rest)[0] if rest else None
    return ChoiceResult(user_id, first[0], first[1],
                        second[0] if second else None, second[1] if second else None, tie)


def preferred_product(spec: ModelSpec, user_id: str, product_ids: Sequence[str]) -> ChoiceResult:
    if not product_ids:
        raise ModelError("empty product list")
    ucis = {pid: uci_single(spec, user_id, pid).uci for pid in product_ids}
    prices = {pid: spec.product(pid).price for pid in product_ids}
    return choose(user_id, ucis, prices)


@dataclass(frozen=True)
class MarketShares:
    shares: Mapping[str, float]
    no_purchase: float
    choices: tuple[ChoiceResult, ...] = ()

    @property
    def total(self) -> float:
        return sum(self.shares.values()) + self.no_purchase


def market_share(spec: ModelSpec, user_ids: Sequence[str], product_ids: Sequence[str],
                 map_fn=map) -> MarketShares:
    if not user_ids:
        raise ModelError("empty user list")
    if not product_ids:
        raise ModelError("empty product list")
    choices = tuple(map_fn(lambda u: preferred_product(spec, u, product_ids), user_ids))
    weights = {u: Fraction(spec.user(u).weight) for u in user_ids}
    total = sum(weights[u] for u in user_ids)
    if total <= 0:
        raise ModelError("sum of user weights must be > 0")
    mass = {pid: Fraction(0) for pid in product_ids}
    none = Fraction(0)
    for c in choices:
        if c.chosen is None:
            none += weights[c.user_id]
        else:
            mass[c.chosen] += weights[c.user_id]
    return MarketShares({pid: float(mass[pid] / total) for pid in product_ids},
                        float(none / total), choices)


@dataclass(frozen=True)
class GapEntry:
    scenario_id: str
    uncoveredness: float
    demand_mass: float
    wtp_mass: float
    gap_score: float
    demanding_users: int
    uncovered_users: int


@dataclass(frozen=True)
class GapReport:
    entries: tuple[GapEntry, ...]
    competitor_ids: tuple[str, ...]
    disclaimer: str = GAP_DISCLAIMER


def _gap_for_user(spec: ModelSpec, user_id: str, competitor_ids: Sequence[str]):
    """Per demanded scenario: (normalized weight, covered by a competitor, effective WTP)."""
    try:
        sset = expected_scenarios(spec, user_id)
    except EmptyDemandError:
        return user_id, {}
    user = spec.user(user_id)
    competitors = [spec.product(pid) for pid in competitor_ids]
    rows = {}
    for entry in sset.entries:
        scenario = spec.scenario(entry.scenario_id)
        covered = any(feasibility(spec, scenario, p, user).feasible for p in competitors)
        rows[entry.scenario_id] = (entry.raw_weight, covered, effective_wtp(scenario, user))
    return user_id, rows


def coverage_gaps(spec: ModelSpec, user_ids: Sequence[str], competitor_ids: Sequence[str],
                  map_fn=map) -> GapReport:
    """Rank demanded scenarios by how badly competitors cover them.

    Users with empty demand demand nothing and are skipped.
    """
    if not user_ids:
        raise ModelError("empty user list")
    per_user = list(map_fn(lambda u: _gap_for_user(spec, u, competitor_ids), user_ids))
    acc: dict[str, dict] = {}
    for user_id, rows in per_user:
        if not rows:
            continue
        w_u = Fraction(spec.user(user_id).weight)
        raw_total = sum(Fraction(raw) for raw, _, _ in rows.values())
        for sid, (raw, covered, wtp) in rows.items():
            a = acc.setdefault(sid, {"w": Fraction(0), "unc_w": Fraction(0), "n": 0, "unc_n": 0,
                                     "demand": Fraction(0), "wtp": Fraction(0)})
            a["w"] += w_u
            a["n"] += 1
            a["demand"] += w_u * Fraction(raw) / raw_total
            if not covered:
                a["unc_w"] += w_u
                a["unc_n"] += 1
                a["wtp"] += w_u * Fraction(wtp)
    entries = []
    for sid, a in acc.items():
        if a["w"] > 0:
            unc = a["unc_w"] / a["w"]
        else:
            unc = Fraction(a["unc_n"], a["n"])
        score = unc * a["demand"] * a["wtp"]
        entries.append(GapEntry(sid, float(unc), float(a["demand"]), float(a["wtp"]), float(score),
                                a["n"], a["unc_n"]))
    entries.sort(key=lambda e: (-e.gap_score, e.scenario_id))
    return GapReport(tuple(entries), tuple(competitor_ids))
