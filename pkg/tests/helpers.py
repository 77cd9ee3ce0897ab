"""Random model instances and brute-force oracles shared by the test modules."""

from __future__ import annotations

import math
import random
from dataclasses import replace
from fractions import Fraction

from usagecov.coverage import is_feasible
from usagecov.model import (DimensionLaw, ModelSpec, Product, ScaleBasedFamily, UsageContext, UsageScenario,
                            UserProfile)

ATTRS = ("a_len", "b_pow")
SKILLS = ("dexterity", "strength")
FACTORS = ("roughness",)
DIMS = ("d_depth", "d_speed")


def _weight(rng: random.Random, int_weights: bool) -> float:
    return float(rng.randint(1, 9)) if int_weights else rng.uniform(0.05, 5.0)


def random_spec(rng: random.Random, *, n_users=3, n_products=3, n_scenarios=6, n_contexts=2,
                family_size=2, int_weights=False, nonneg_attr_exps=False) -> ModelSpec:
    """A valid random model; requirements are drawn so coverage is mixed."""
    lo_exp = 0.0 if nonneg_attr_exps else -1.0
    perf = {}
    for d in DIMS:
        perf[d] = DimensionLaw(
            coefficient=rng.uniform(0.5, 2.0),
            attribute_exponents={a: rng.uniform(lo_exp, 1.0) for a in ATTRS},
            skill_exponents={s: rng.uniform(0.0, 1.0) for s in SKILLS},
            factor_exponents={f: rng.uniform(-1.0, 1.0) for f in FACTORS},
        )
    contexts = tuple(UsageContext(f"c{i}", {f: rng.uniform(0.5, 2.0) for f in FACTORS})
                     for i in range(n_contexts))
    scenarios = []
    for i in range(n_scenarios):
        dims = [d for d in DIMS if rng.random() < 0.7] or [rng.choice(DIMS)]
        scenarios.append(UsageScenario(
            f"s{i:02d}", rng.choice(contexts).id, {d: rng.uniform(0.3, 3.0) for d in dims},
            _weight(rng, int_weights), rng.choice([None, None, rng.uniform(20, 120)])))
    users = []
    for i in range(n_users):
        k = rng.randint(1, n_contexts)
        users.append(UserProfile(f"u{i}", {s: rng.uniform(0.2, 1.0) for s in SKILLS},
                                 frozenset(rng.sample([c.id for c in contexts], k)),
                                 _weight(rng, int_weights), rng.uniform(20, 120)))
    products = tuple(Product(f"p{i}", {a: rng.uniform(0.5, 8.0) for a in ATTRS}, rng.uniform(10, 100))
                     for i in range(n_products))
    families = ()
    if family_size:
        members = tuple(rng.sample([p.id for p in products], min(family_size, n_products)))
        families = (ScaleBasedFamily("fam", members),)
    spec = ModelSpec(
        attributes={a: "u" for a in ATTRS}, skills=SKILLS, factors=FACTORS,
        dimensions={d: "u" for d in DIMS}, performance=perf, users=tuple(users), contexts=contexts,
        scenarios=tuple(scenarios), products=products, families=families,
        competitor_ids=tuple(p.id for p in products))
    return ensure_demand(spec)


def ensure_demand(spec: ModelSpec) -> ModelSpec:
    """Give every user at least one anticipated context hosting a scenario."""
    hosting = sorted({s.context_id for s in spec.scenarios})
    users = []
    for u in spec.users:
        if not u.anticipated_context_ids & set(hosting):
            u = replace(u, anticipated_context_ids=u.anticipated_context_ids | {hosting[0]})
        users.append(u)
    return replace(spec, users=tuple(users))


def with_products(spec: ModelSpec, *products: Product, families=None) -> ModelSpec:
    return replace(spec, products=spec.products + tuple(products),
                   families=spec.families if families is None else tuple(families))


# --- oracles ----------------------------------------------------------------

def demanded(spec: ModelSpec, user_id: str) -> list[UsageScenario]:
    user = next(u for u in spec.users if u.id == user_id)
    return [s for s in spec.scenarios if s.context_id in user.anticipated_context_ids]


def oracle_uci_exact(spec: ModelSpec, user_id: str, member_ids) -> Fraction:
    scen = demanded(spec, user_id)
    total = sum(Fraction(s.importance_weight) for s in scen)
    covered = sum(Fraction(s.importance_weight) for s in scen
                  if any(is_feasible(spec, s.id, m, user_id).feasible for m in member_ids))
    return covered / total


def oracle_choice(spec: ModelSpec, user_id: str, product_ids):
    ucis = {p: oracle_uci_exact(spec, user_id, [p]) for p in product_ids}
    price = {p.id: p.price for p in spec.products}
    ranked = sorted(product_ids, key=lambda p: (-ucis[p], price[p], p))
    return None if ucis[ranked[0]] == 0 else ranked[0]


def oracle_shares(spec: ModelSpec, user_ids, product_ids):
    weight = {u.id: Fraction(u.weight) for u in spec.users}
    total = sum(weight[u] for u in user_ids)
    mass = {p: Fraction(0) for p in product_ids}
    none = Fraction(0)
    for u in user_ids:
        c = oracle_choice(spec, u, product_ids)
        if c is None:
            none += weight[u]
        else:
            mass[c] += weight[u]
    return {p: m / total for p, m in mass.items()}, none / total


def oracle_gaps(spec: ModelSpec, user_ids, competitor_ids) -> dict:
    users = {u.id: u for u in spec.users}
    out = {}
    for s in spec.scenarios:
        dem = [u for u in user_ids if s.context_id in users[u].anticipated_context_ids]
        if not dem:
            continue
        w = {u: Fraction(users[u].weight) for u in dem}
        unc = [u for u in dem if not any(is_feasible(spec, s.id, p, u).feasible for p in competitor_ids)]
        wsum = sum(w.values())
        uncoveredness = sum(w[u] for u in unc) / wsum if wsum else Fraction(len(unc), len(dem))
        demand = sum(w[u] * Fraction(s.importance_weight)
                     / sum(Fraction(x.importance_weight) for x in demanded(spec, u)) for u in dem)
        wtp_of = {u: s.wtp_override if s.wtp_override is not None else users[u].willingness_to_pay for u in dem}
        wtp = sum(w[u] * Fraction(wtp_of[u]) for u in unc)
        out[s.id] = (uncoveredness, demand, wtp, uncoveredness * demand * wtp)
    return out


def direct_performance(spec: ModelSpec, attrs, user: UserProfile, context: UsageContext) -> dict:
    """Log-space evaluation of the power law, independent of the library's product loop."""
    out = {}
    for dim, law in spec.performance.items():
        log = math.log(law.coefficient)
        log += sum(e * math.log(attrs[k]) for k, e in law.attribute_exponents.items())
        log += sum(e * math.log(user.skills[k]) for k, e in law.skill_exponents.items())
        log += sum(e * math.log(context.factors[k]) for k, e in law.factor_exponents.items())
        out[dim] = math.exp(log)
    return out
