"""Personal usage scenario spaces and synthetic user populations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .exact import exact_shares
from .model import ModelError, ModelSpec, UserProfile


class EmptyDemandError(ValueError):
    """The user anticipates no context hosting any scenario; coverage is undefined."""

    def __init__(self, user_id: str):
        super().__init__(f"user {user_id!r} anticipates no context hosting a scenario (empty demand)")
        self.user_id = user_id


@dataclass(frozen=True)
class WeightedScenario:
    scenario_id: str
    raw_weight: float
    weight: float


@dataclass(frozen=True)
class ScenarioSet:
    user_id: str
    entries: tuple[WeightedScenario, ...]

    @property
    def scenario_ids(self) -> tuple[str, ...]:
        return tuple(e.scenario_id for e in self.entries)

    def weight_of(self, scenario_id: str) -> float:
        for e in self.entries:
            if e.scenario_id == scenario_id:
                return e.weight
        raise KeyError(scenario_id)


def expected_scenarios(spec: ModelSpec, user_id: str) -> ScenarioSet:
    user = spec.user(user_id)
    chosen = sorted((s for s in spec.scenarios if s.context_id in user.anticipated_context_ids),
                    key=lambda s: s.id)
    if not chosen:
        raise EmptyDemandError(user_id)
    weights = exact_shares(s.importance_weight for s in chosen)
    entries = tuple(WeightedScenario(s.id, s.importance_weight, w) for s, w in zip(chosen, weights))
    return ScenarioSet(user_id, entries)


@dataclass(frozen=True)
class PopulationGenSpec:
    """Sampling recipe for a synthetic population.

    Skill dimensions absent from ``skill_ranges`` default to [0, 1]; contexts
    absent from ``adoption`` are never adopted.
    """

    user_count: int
    skill_ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    wtp_range: tuple[float, float] = (0.0, 0.0)
    adoption: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0
    weight: float = 1.0
    id_prefix: str = "pop"

    def check(self, base: ModelSpec) -> None:
        if self.user_count < 1:
            raise ModelError("user_count must be >= 1")
        for name, (lo, hi) in self.skill_ranges.items():
            if name not in base.skills:
                raise ModelError(f"skill range for undeclared skill {name!r}")
            if not 0.0 <= lo <= hi <= 1.0:
                raise ModelError(f"skill range for {name!r} must satisfy 0 <= lo <= hi <= 1")
        lo, hi = self.wtp_range
        if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 <= lo <= hi):
            raise ModelError("wtp_range must satisfy 0 <= lo <= hi")
        for cid, p in self.adoption.items():
            if not base.has("context", cid):
                raise ModelError(f"adoption probability for unknown context {cid!r}")
            if not 0.0 <= p <= 1.0:
                raise ModelError(f"adoption probability for {cid!r} outside [0,1]")
        if not (math.isfinite(self.weight) and self.weight >= 0):
            raise ModelError("weight must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ModelError("seed must be a 64-bit unsigned integer")


def _uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    # clamp guards the half-open upper end against rounding past hi
    return min(hi, max(lo, lo + (hi - lo) * float(rng.random())))


def sample_user(gen: PopulationGenSpec, base: ModelSpec, index: int) -> UserProfile:
    """Draw user ``index``; its RNG stream depends only on (seed, index)."""
    rng = np.random.default_rng(np.random.SeedSequence(gen.seed, spawn_key=(index,)))
    skills = {}
    for name in base.skills:
        lo, hi = gen.skill_ranges.get(name, (0.0, 1.0))
        skills[name] = _uniform(rng, lo, hi)
    wtp = _uniform(rng, *gen.wtp_range)
    context_ids = sorted(c.id for c in base.contexts)
    while True:
        adopted = frozenset(cid for cid in context_ids
                            if float(rng.random()) < gen.adoption.get(cid, 0.0))
        if adopted:
            break
    return UserProfile(f"{gen.id_prefix}{index:05d}", skills, adopted, gen.weight, wtp)


def sample_population(gen: PopulationGenSpec, base: ModelSpec) -> list[UserProfile]:
    if not base.contexts:
        raise ModelError("base model has no contexts")
    gen.check(base)
    if not any(gen.adoption.get(c.id, 0.0) > 0 for c in base.contexts):
        raise ModelError("all adoption probabilities are 0; no user can anticipate any context")
    return [sample_user(gen, base, i) for i in range(gen.user_count)]
