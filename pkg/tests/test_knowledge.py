import json
from dataclasses import replace
from importlib import resources

import pytest

from extruplan.domain import (
    DieDesign,
    DiePartKind,
    DieType,
    FeatureKind,
    PressCapacity,
    Process,
    ProfileSpec,
    ProfileType,
)
from extruplan.errors import ConfigError, InternalError, NoRule
from extruplan.knowledge import (
    DieStack,
    Rule,
    classify_die_type,
    construct_design,
    derive_plan,
    derive_extrusion_ratio,
    evaluate_rules,
    load_kb,
    parse_kb,
    part_feature_set,
    parts_for_die_type,
    profile_facts,
    select_num_orifices,
    select_processes,
    standard_route,
)

MANDREL_CHAINS = {
    FeatureKind.OPEN_POCKET_CIRCULAR: [
        "rough turning",
        "semi-finish turning",
        "finish turning",
        "rough facing",
        "semi-finish facing",
        "finish facing",
    ],
    FeatureKind.EDGE_CHAMFER: ["round chamfering"],
    FeatureKind.BLIND_HOLE: ["centering", "drilling"],
    FeatureKind.TAP: ["tapping"],
    FeatureKind.CLOSED_POCKET_SCULPTURED: [
        "rough milling",
        "semi-finish milling",
        "finish milling",
    ],
}

DIE_CAP_CHAINS = {
    FeatureKind.OPEN_POCKET_CIRCULAR: MANDREL_CHAINS[FeatureKind.OPEN_POCKET_CIRCULAR],
    FeatureKind.BLIND_HOLE: ["centering", "drilling"],
    FeatureKind.COUNTER_BORE: ["centering", "drilling", "counter boring"],
    FeatureKind.CLOSED_POCKET_SCULPTURED: ["EDM sparking"],
    FeatureKind.CLOSED_POCKET_PLANE: [
        "rough milling",
        "semi-finish milling",
        "finish milling",
    ],
    FeatureKind.DEEP_HOLE: ["rough wire cutting", "finish wire cutting"],
}


def profile(**overrides) -> ProfileSpec:
    base = dict(
        profile_type=ProfileType.SOLID,
        shape_class=5,
        wall_thickness=2.3,
        width=24.0,
        height=15.3,
        cross_section_area=1.7,
        perimeter=20.32,
        tongue_ratio=4.0,
    )
    base.update(overrides)
    return ProfileSpec(**base)


class TestRuleEngine:
    RULES = (
        Rule("low", 10, (("x", "gt", 5.0),), {"tag": "low"}),
        Rule("high", 90, (("x", "gt", 50.0),), {"tag": "high"}),
        Rule("alpha", 90, (("y", "eq", "a"),), {"tag": "alpha"}),
    )

    def test_priority_then_id_order(self):
        fired = evaluate_rules({"x": 60.0, "y": "a"}, self.RULES)
        assert [c["tag"] for c in fired] == ["alpha", "high", "low"]

    def test_missing_fact_is_false(self):
        fired = evaluate_rules({"x": 60.0}, self.RULES)
        assert [c["tag"] for c in fired] == ["high", "low"]

    def test_no_rule_fires(self):
        assert evaluate_rules({"x": 1.0}, self.RULES) == []

    def test_membership_operator(self):
        rules = (Rule("in", 0, (("kind", "in", ["a", "b"]),), {"tag": "in"}),)
        assert evaluate_rules({"kind": "a"}, rules)
        assert not evaluate_rules({"kind": "c"}, rules)


class TestClassification:
    def test_hollow(self, kb):
        spec = profile(profile_type=ProfileType.HOLLOW, shape_class=10)
        assert classify_die_type(spec, kb) is DieType.HOLLOW

    def test_semi_hollow(self, kb):
        spec = profile(profile_type=ProfileType.SEMI_HOLLOW, shape_class=13)
        assert classify_die_type(spec, kb) is DieType.SEMI_HOLLOW

    def test_solid(self, kb):
        assert classify_die_type(profile(), kb) is DieType.SOLID

    def test_solid_with_high_tongue_ratio_promoted(self, kb):
        spec = profile(tongue_ratio=5.5)
        assert classify_die_type(spec, kb) is DieType.SEMI_HOLLOW

    def test_tongue_ratio_cutoff_is_exclusive(self, kb):
        assert classify_die_type(profile(tongue_ratio=5.0), kb) is DieType.SOLID

    def test_facts_cover_every_rule_field(self, kb):
        facts = profile_facts(profile(press_capacity=PressCapacity.T660))
        fields = {pred[0] for rule in kb.rules for pred in rule.antecedent}
        assert fields <= set(facts)


class TestDecisionTable:
    def test_mandrel_chains(self, kb):
        for kind, chain in MANDREL_CHAINS.items():
            ops = select_processes(kind, DiePartKind.MANDREL, kb)
            assert [op.operation for op in ops] == chain

    def test_die_cap_chains(self, kb):
        for kind, chain in DIE_CAP_CHAINS.items():
            ops = select_processes(kind, DiePartKind.DIE_CAP, kb)
            assert [op.operation for op in ops] == chain

    def test_same_feature_differs_by_part(self, kb):
        mandrel = select_processes(
            FeatureKind.CLOSED_POCKET_SCULPTURED, DiePartKind.MANDREL, kb
        )
        cap = select_processes(
            FeatureKind.CLOSED_POCKET_SCULPTURED, DiePartKind.DIE_CAP, kb
        )
        assert [o.operation for o in mandrel] != [o.operation for o in cap]

    def test_unmapped_pair_raises(self, kb):
        with pytest.raises(NoRule) as err:
            select_processes(FeatureKind.TAP, DiePartKind.DIE_CAP, kb)
        assert "tap" in str(err.value) and "die_cap" in str(err.value)

    def test_every_standard_feature_is_covered(self, kb):
        for part in DiePartKind:
            for kind in part_feature_set(part, kb):
                select_processes(kind, part, kb)


class TestRoutes:
    def test_routes_are_process_permutations(self, kb):
        for part in DiePartKind:
            route = standard_route(part, kb)
            assert sorted(route, key=lambda p: p.value) == sorted(
                Process, key=lambda p: p.value
            )

    def test_heat_treatment_precedes_grinding(self, kb):
        for part in DiePartKind:
            route = standard_route(part, kb)
            assert route.index(Process.HEAT_TREATMENT) < route.index(Process.GRINDING)


class TestDerivePlan:
    def test_mandrel_block_order(self, kb, stack, cfg):
        spec = profile(profile_type=ProfileType.HOLLOW, shape_class=10, tongue_ratio=1.4)
        design = construct_design(spec, kb, stack, cfg)
        plan = derive_plan(design, kb)
        mandrel = plan.parts[0]
        assert mandrel.part is DiePartKind.MANDREL
        labels = [s.feature.kind if s.feature else None for s in mandrel.steps]
        assert labels == [
            FeatureKind.OPEN_POCKET_CIRCULAR,
            FeatureKind.EDGE_CHAMFER,
            FeatureKind.BLIND_HOLE,
            FeatureKind.TAP,
            FeatureKind.CLOSED_POCKET_SCULPTURED,
            None,
            None,
        ]

    def test_part_level_steps_are_heat_treatment_then_grinding(self, kb, stack, cfg):
        spec = profile(profile_type=ProfileType.HOLLOW, shape_class=10, tongue_ratio=1.4)
        plan = derive_plan(construct_design(spec, kb, stack, cfg), kb)
        for part_plan in plan.parts:
            part_ops = [
                s.operations[0].operation for s in part_plan.steps if s.feature is None
            ]
            assert part_ops == ["heat treatment", "grinding"]

    def test_operations_follow_route_order(self, kb, stack, cfg):
        spec = profile(profile_type=ProfileType.HOLLOW, shape_class=10, tongue_ratio=1.4)
        plan = derive_plan(construct_design(spec, kb, stack, cfg), kb)
        for part_plan in plan.parts:
            route = standard_route(part_plan.part, kb)
            ranks = [route.index(s.operations[0].process) for s in part_plan.steps]
            assert ranks == sorted(ranks)

    def test_parts_in_canonical_order(self, kb, stack, cfg):
        plan = derive_plan(construct_design(profile(), kb, stack, cfg), kb)
        assert [p.part for p in plan.parts] == [
            DiePartKind.FEEDER,
            DiePartKind.DIE_PLATE,
            DiePartKind.BACKER,
        ]


class TestDieStack:
    def test_press_ladder(self, stack):
        assert stack.press_for_area(5.0) is PressCapacity.T660
        assert stack.press_for_area(15.0) is PressCapacity.T880
        assert stack.press_for_area(30.0) is PressCapacity.T1800

    def test_ladder_boundaries_are_half_open(self, stack):
        assert stack.press_for_area(10.0) is PressCapacity.T880
        assert stack.press_for_area(25.0) is PressCapacity.T1800

    def test_bad_section_rejected(self, cfg):
        broken = replace(cfg, die_stack={"container_area_cm2": {}})
        with pytest.raises(ConfigError):
            DieStack.from_config(broken)


class TestOrificeSelection:
    def test_default_is_one(self, kb):
        assert select_num_orifices(profile(), PressCapacity.T660, kb) == 1

    def test_heavy_press_small_section(self, kb):
        spec = profile(cross_section_area=3.0)
        assert select_num_orifices(spec, PressCapacity.T1800, kb) == 4

    def test_heavy_press_medium_section(self, kb):
        spec = profile(cross_section_area=8.0)
        assert select_num_orifices(spec, PressCapacity.T1800, kb) == 2

    def test_mid_press_small_section(self, kb):
        spec = profile(cross_section_area=3.0)
        assert select_num_orifices(spec, PressCapacity.T880, kb) == 2


class TestExtrusionRatio:
    def test_profile_value_wins(self, kb, stack, cfg):
        spec = profile(extrusion_ratio=40.0)
        assert derive_extrusion_ratio(spec, 1, PressCapacity.T660, stack, cfg) == 40.0

    def test_derived_value_snaps_to_bin_representative(self, stack, cfg):
        # 248.8 / (1 * 3.4) = 73.2 -> nearest representative 70
        spec = profile(cross_section_area=3.4)
        got = derive_extrusion_ratio(spec, 1, PressCapacity.T660, stack, cfg)
        assert got == pytest.approx(70.0)


class TestConstructDesign:
    def test_solid_design(self, kb, stack, cfg):
        design = construct_design(profile(), kb, stack, cfg)
        assert design.die_type is DieType.SOLID
        assert design.num_orifices == 1
        assert [p.kind for p in design.parts] == list(
            parts_for_die_type(DieType.SOLID)
        )
        assert design.part(DiePartKind.FEEDER).thickness == pytest.approx(37.5)
        assert design.part(DiePartKind.BACKER).thickness == pytest.approx(62.5)

    def test_hollow_design_uses_templates(self, kb, stack, cfg):
        spec = profile(profile_type=ProfileType.HOLLOW, shape_class=10, tongue_ratio=1.4)
        design = construct_design(spec, kb, stack, cfg)
        mandrel = design.part(DiePartKind.MANDREL)
        assert [f.kind for f in mandrel.features] == list(
            kb.design_templates[DiePartKind.MANDREL]
        )

    def test_feature_source_override(self, kb, stack, cfg):
        spec = profile(profile_type=ProfileType.HOLLOW, shape_class=10, tongue_ratio=1.4)
        design = construct_design(
            spec, kb, stack, cfg, feature_source=kb.part_feature_sets
        )
        mandrel = design.part(DiePartKind.MANDREL)
        assert [f.kind for f in mandrel.features] == list(
            kb.part_feature_sets[DiePartKind.MANDREL]
        )

    def test_press_scales_part_thickness(self, kb, stack, cfg):
        big = profile(
            cross_section_area=28.0,
            width=290.0,
            height=120.0,
            perimeter=80.0,
        )
        design = construct_design(big, kb, stack, cfg)
        assert design.part(DiePartKind.FEEDER).thickness == pytest.approx(87.5)


class TestKbParsing:
    def packaged(self):
        with resources.files("extruplan.data").joinpath("kb.json").open() as fh:
            return json.load(fh)

    def test_packaged_kb_parses(self):
        parse_kb(self.packaged())

    def test_fingerprint_is_stable(self):
        assert parse_kb(self.packaged()).fingerprint == load_kb().fingerprint

    def test_fingerprint_tracks_content(self):
        data = self.packaged()
        data["tongue_ratio_cutoff"] = 6.0
        assert parse_kb(data).fingerprint != load_kb().fingerprint

    def test_unknown_operation_rejected(self):
        data = self.packaged()
        data["decision_table"][0]["operations"] = ["levitating"]
        with pytest.raises(ConfigError) as err:
            parse_kb(data)
        assert "levitating" in str(err.value)

    def test_duplicate_rows_rejected(self):
        data = self.packaged()
        data["decision_table"].append(dict(data["decision_table"][0]))
        with pytest.raises(ConfigError) as err:
            parse_kb(data)
        assert "duplicate" in str(err.value)

    def test_incomplete_route_rejected(self):
        data = self.packaged()
        data["routes"]["mandrel"] = data["routes"]["mandrel"][:-1]
        with pytest.raises(ConfigError):
            parse_kb(data)

    def test_missing_coverage_rejected(self):
        data = self.packaged()
        data["decision_table"] = [
            row
            for row in data["decision_table"]
            if not (row["feature"] == "tap" and row["part"] == "mandrel")
        ]
        with pytest.raises(ConfigError) as err:
            parse_kb(data)
        assert "tap" in str(err.value)

    def test_out_of_route_order_rejected(self):
        data = self.packaged()
        for row in data["decision_table"]:
            if row["feature"] == "open pocket circular" and row["part"] == "mandrel":
                row["operations"] = list(reversed(row["operations"]))
        with pytest.raises(ConfigError):
            parse_kb(data)
