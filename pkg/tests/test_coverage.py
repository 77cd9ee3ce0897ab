import random
from dataclasses import replace

import pytest

from helpers import oracle_uci_exact, random_spec
from usagecov.coverage import is_feasible, uci, uci_family, uci_population, uci_single
from usagecov.model import (DimensionLaw, ModelError, ModelSpec, Product, ScaleBasedFamily, UnknownIdError,
                            UsageContext, UsageScenario, UserProfile)
from usagecov.scenarios import EmptyDemandError


def jig(price=120.0, required=15.0, wtp=150.0) -> ModelSpec:
    # delivered depth = 2 * sqrt(100) * 0.8 = 16
    return ModelSpec(
        attributes={"power": "W"}, skills=("control",), factors=(), dimensions={"depth": "mm", "speed": "mm/s"},
        performance={"depth": DimensionLaw(2.0, {"power": 0.5}, {"control": 1.0}),
                     "speed": DimensionLaw(1.0, {"power": 1.0})},
        users=(UserProfile("u", {"control": 0.8}, frozenset({"c"}), 1.0, wtp),),
        contexts=(UsageContext("c"),),
        scenarios=(UsageScenario("s", "c", {"depth": required}, 1.0),
                   UsageScenario("two", "c", {"depth": 16.5, "speed": 50.0}, 1.0)),
        products=(Product("p", {"power": 100.0}, price),),
    )


class TestFeasibility:
    def test_feasible_with_slack(self):
        r = is_feasible(jig(), "s", "p", "u")
        assert r.feasible and r.price_ok and r.binding_constraint is None
        assert r.performance_slack == {"depth": 1.0}

    def test_price_binds(self):
        r = is_feasible(jig(price=200.0), "s", "p", "u")
        assert not r.feasible and not r.price_ok and r.binding_constraint == "price"

    def test_failing_dimension_binds(self):
        r = is_feasible(jig(), "two", "p", "u")
        assert not r.feasible
        assert r.performance_slack == {"depth": -0.5, "speed": 50.0}
        assert r.binding_constraint == "depth"

    def test_price_boundary_is_feasible(self):
        assert is_feasible(jig(price=150.0), "s", "p", "u").feasible

    def test_wtp_override_replaces_user_wtp(self):
        spec = jig(price=140.0)
        spec = replace(spec, scenarios=(replace(spec.scenarios[0], wtp_override=130.0),))
        assert is_feasible(spec, "s", "p", "u").binding_constraint == "price"

    def test_unknown_ids(self):
        with pytest.raises(UnknownIdError):
            is_feasible(jig(), "s", "zz", "u")

    def test_invariant_feasible_iff_slacks_and_price(self):
        rng = random.Random(11)
        for _ in range(200):
            spec = random_spec(rng)
            for s in spec.scenarios:
                for p in spec.products:
                    for u in spec.users:
                        r = is_feasible(spec, s.id, p.id, u.id)
                        assert r.feasible == (all(v >= 0 for v in r.performance_slack.values()) and r.price_ok)


def weighted(feasible_flags, weights=(0.5, 0.3, 0.2)) -> ModelSpec:
    """Three scenarios; scenario i is feasible iff its required depth is low."""
    scen = tuple(UsageScenario(f"s{i}", "c", {"depth": 10.0 if ok else 99.0}, w)
                 for i, (ok, w) in enumerate(zip(feasible_flags, weights), start=1))
    return replace(jig(), scenarios=scen)


class TestUCISingle:
    def test_weighted_sum(self):
        r = uci_single(weighted([True, False, True]), "u", "p")
        assert r.uci == pytest.approx(0.7, abs=1e-15)
        assert [b.covered for b in r.breakdown] == [True, False, True]

    def test_full_coverage(self):
        assert uci_single(weighted([True, True, True]), "u", "p").uci == 1.0

    def test_no_coverage(self):
        assert uci_single(weighted([False, False, False]), "u", "p").uci == 0.0

    def test_empty_demand(self):
        spec = jig()
        spec = replace(spec, users=(replace(spec.users[0], anticipated_context_ids=frozenset({"x"})),),
                       contexts=spec.contexts + (UsageContext("x"),))
        with pytest.raises(EmptyDemandError):
            uci_single(spec, "u", "p")

    def test_brute_force(self):
        rng = random.Random(5)
        for _ in range(150):
            spec = random_spec(rng, n_scenarios=rng.randint(1, 12), int_weights=rng.random() < 0.5)
            for u in spec.users:
                for p in spec.products:
                    r = uci_single(spec, u.id, p.id)
                    assert r.uci == float(oracle_uci_exact(spec, u.id, [p.id]))
                    assert r.recompute() == r.uci


class TestUCIFamily:
    def test_singleton_family_matches_product(self):
        rng = random.Random(9)
        for _ in range(50):
            spec = random_spec(rng, family_size=0)
            p = rng.choice(spec.products).id
            spec = replace(spec, families=(ScaleBasedFamily("solo", (p,)),))
            for u in spec.users:
                assert uci_family(spec, u.id, "solo").uci == uci_single(spec, u.id, p).uci

    def test_member_two_only(self):
        spec = jig()
        big = Product("big", {"power": 400.0}, 140.0)  # depth 32
        spec = replace(spec, products=spec.products + (big,), families=(ScaleBasedFamily("f", ("p", "big")),),
                       scenarios=(UsageScenario("deep", "c", {"depth": 30.0}, 1.0),))
        r = uci_family(spec, "u", "f")
        assert r.uci == 1.0
        assert r.breakdown[0].covering == ("big",)

    def test_each_member_uses_its_own_price(self):
        spec = jig(wtp=130.0)
        big = Product("big", {"power": 400.0}, 140.0)
        spec = replace(spec, products=spec.products + (big,), families=(ScaleBasedFamily("f", ("p", "big")),),
                       scenarios=(UsageScenario("deep", "c", {"depth": 30.0}, 1.0),))
        assert uci_family(spec, "u", "f").uci == 0.0

    def test_brute_force_up_to_four_members(self):
        rng = random.Random(13)
        for _ in range(150):
            spec = random_spec(rng, n_products=4, family_size=rng.randint(1, 4), n_scenarios=rng.randint(1, 12))
            members = spec.families[0].member_ids
            for u in spec.users:
                r = uci_family(spec, u.id, "fam")
                assert r.uci == float(oracle_uci_exact(spec, u.id, members))
                for b in r.breakdown:
                    want = tuple(m for m in members if is_feasible(spec, b.scenario_id, m, u.id).feasible)
                    assert b.covering == want

    def test_uci_dispatches_on_object_kind(self, demo):
        assert uci(demo, "u2-diy-regular", "jf-family").uci == uci_family(demo, "u2-diy-regular", "jf-family").uci
        assert uci(demo, "u2-diy-regular", "jf-400").uci == uci_single(demo, "u2-diy-regular", "jf-400").uci


def two_users(w1, w2, uci1_flags, uci2_flags):
    """Users with disjoint contexts so each UCI is set independently."""
    scen = []
    for ctx, flags in (("c1", uci1_flags), ("c2", uci2_flags)):
        for i, ok in enumerate(flags):
            scen.append(UsageScenario(f"{ctx}-{i}", ctx, {"depth": 10.0 if ok else 99.0}, 1.0))
    base = jig()
    users = (UserProfile("a", {"control": 0.8}, frozenset({"c1"}), w1, 150.0),
             UserProfile("b", {"control": 0.8}, frozenset({"c2"}), w2, 150.0))
    return replace(base, users=users, contexts=(UsageContext("c1"), UsageContext("c2")), scenarios=tuple(scen))


class TestUCIPopulation:
    def test_equal_weights(self):
        spec = two_users(1.0, 1.0, [1, 1, 0, 0, 0], [1, 1, 1, 1, 0])
        assert uci_population(spec, ["a", "b"], "p").uci == pytest.approx(0.6, abs=1e-15)

    def test_unequal_weights(self):
        spec = two_users(3.0, 1.0, [1, 1, 0, 0, 0], [1, 1, 1, 1, 0])
        assert uci_population(spec, ["a", "b"], "p").uci == 0.5

    def test_single_user_identity(self):
        spec = two_users(2.0, 1.0, [1, 0, 0], [1])
        assert uci_population(spec, ["a"], "p").uci == uci_single(spec, "a", "p").uci

    def test_empty_user_list(self):
        with pytest.raises(ModelError):
            uci_population(jig(), [], "p")

    def test_zero_total_weight(self):
        with pytest.raises(ModelError):
            uci_population(two_users(0.0, 0.0, [1], [1]), ["a", "b"], "p")

    def test_self_consistent(self, demo):
        r = uci_population(demo, [u.id for u in demo.users], "jf-family")
        assert r.recompute() == r.uci


def test_uci_bounds_and_family_monotonicity_randomized():
    rng = random.Random(21)
    for _ in range(300):
        spec = random_spec(rng, n_products=4, family_size=rng.randint(1, 3))
        fam = spec.families[0]
        extra = rng.choice([p.id for p in spec.products])
        bigger = ScaleBasedFamily("fam+", tuple(dict.fromkeys(fam.member_ids + (extra,))))
        spec = replace(spec, families=(fam, bigger))
        for u in spec.users:
            small = uci_family(spec, u.id, "fam").uci
            large = uci_family(spec, u.id, "fam+").uci
            assert 0.0 <= small <= large <= 1.0
