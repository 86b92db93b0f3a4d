import pytest

from extruplan.domain import (
    CaseProvenance,
    CaseRecord,
    DieDesign,
    DieFeature,
    DiePart,
    DiePartKind,
    DieType,
    FeatureCategory,
    FeatureGeometry,
    FeatureKind,
    MachiningOperation,
    OPERATION_PROCESS,
    PARTS_BY_DIE_TYPE,
    PlanStep,
    ProcessPlan,
    PartPlan,
    Process,
    ProfileSpec,
    ProfileType,
    make_operation,
    validate_design,
    validate_plan,
    validate_profile,
)


def solid_profile(**overrides) -> ProfileSpec:
    base = dict(
        profile_type=ProfileType.SOLID,
        shape_class=5,
        wall_thickness=2.3,
        width=24.0,
        height=15.3,
        cross_section_area=1.7,
        perimeter=20.32,
        tongue_ratio=4.0,
        ccd=28.5,
    )
    base.update(overrides)
    return ProfileSpec(**base)


class TestEnums:
    def test_part_declaration_order_is_canonical(self):
        assert [k.value for k in DiePartKind] == [
            "feeder",
            "die_plate",
            "backer",
            "mandrel",
            "die_cap",
        ]

    def test_process_declaration_order_is_route_order(self):
        assert [p.value for p in Process] == [
            "turning",
            "facing",
            "drilling",
            "milling",
            "heat_treatment",
            "grinding",
            "edm_spark",
            "edm_wire",
        ]

    def test_parts_by_die_type(self):
        assert PARTS_BY_DIE_TYPE[DieType.SOLID] == (
            DiePartKind.FEEDER,
            DiePartKind.DIE_PLATE,
            DiePartKind.BACKER,
        )
        assert PARTS_BY_DIE_TYPE[DieType.HOLLOW] == (
            DiePartKind.MANDREL,
            DiePartKind.DIE_CAP,
        )
        assert PARTS_BY_DIE_TYPE[DieType.SEMI_HOLLOW] == PARTS_BY_DIE_TYPE[DieType.SOLID]

    def test_every_feature_kind_has_a_category(self):
        for kind in FeatureKind:
            assert isinstance(kind.category, FeatureCategory)

    def test_hole_kinds_categorised_as_holes(self):
        assert FeatureKind.BLIND_HOLE.category is FeatureCategory.HOLE
        assert FeatureKind.DEEP_HOLE.category is FeatureCategory.HOLE
        assert FeatureKind.OPEN_POCKET_CIRCULAR.category is FeatureCategory.POCKET
        assert FeatureKind.CLOSED_POCKET_SCULPTURED.category is FeatureCategory.POCKET
        assert FeatureKind.EDGE_CHAMFER.category is FeatureCategory.EDGE


class TestOperations:
    def test_vocabulary_is_consistent(self):
        for name, process in OPERATION_PROCESS.items():
            op = make_operation(name)
            assert op.operation == name
            assert op.process is process

    def test_unknown_operation_rejected(self):
        with pytest.raises(ValueError):
            make_operation("polishing")

    def test_mismatched_process_rejected(self):
        with pytest.raises(ValueError):
            MachiningOperation(process=Process.MILLING, operation="rough turning")


class TestProfileValidation:
    def test_reference_profile_is_clean(self):
        assert validate_profile(solid_profile()) == []

    def test_nonpositive_dimensions_flagged(self):
        violations = validate_profile(solid_profile(width=0.0, wall_thickness=-1.0))
        assert any("width" in v for v in violations)
        assert any("wall_thickness" in v for v in violations)

    def test_ccd_must_cover_bounding_box(self):
        violations = validate_profile(solid_profile(ccd=10.0))
        assert any("ccd" in v for v in violations)

    def test_ccd_optional(self):
        assert validate_profile(solid_profile(ccd=None)) == []

    def test_shape_class_range(self):
        assert any("shape_class" in v for v in validate_profile(solid_profile(shape_class=20)))
        assert any("shape_class" in v for v in validate_profile(solid_profile(shape_class=-1)))

    def test_extrusion_ratio_must_exceed_one(self):
        violations = validate_profile(solid_profile(extrusion_ratio=0.8))
        assert any("extrusion_ratio" in v for v in violations)

    def test_negative_external_perimeter_flagged(self):
        violations = validate_profile(solid_profile(external_perimeter=-2.0))
        assert any("external_perimeter" in v for v in violations)


class TestProfileSerialization:
    def test_round_trip(self):
        spec = solid_profile()
        assert ProfileSpec.from_dict(spec.to_dict()) == spec

    def test_perimeter_unit_mm_converts(self):
        data = solid_profile().to_dict()
        data["perimeter"] = 203.2
        data["external_perimeter"] = 0.0
        data["perimeter_unit"] = "mm"
        spec = ProfileSpec.from_dict(data)
        assert spec.perimeter == pytest.approx(20.32)

    def test_unknown_perimeter_unit_rejected(self):
        data = solid_profile().to_dict()
        data["perimeter_unit"] = "furlong"
        with pytest.raises(ValueError):
            ProfileSpec.from_dict(data)


def hollow_design() -> DieDesign:
    return DieDesign(
        die_type=DieType.HOLLOW,
        num_orifices=1,
        extrusion_ratio=40.0,
        parts=(
            DiePart(kind=DiePartKind.MANDREL, thickness=87.5, features=()),
            DiePart(kind=DiePartKind.DIE_CAP, thickness=87.5, features=()),
        ),
    )


class TestDesignValidation:
    def test_reference_design_is_clean(self):
        assert validate_design(hollow_design()) == []

    def test_wrong_part_set_flagged(self):
        design = DieDesign(
            die_type=DieType.HOLLOW,
            num_orifices=1,
            extrusion_ratio=40.0,
            parts=(DiePart(kind=DiePartKind.FEEDER, thickness=37.5, features=()),),
        )
        assert any("part" in v for v in validate_design(design))

    def test_duplicate_parts_flagged(self):
        design = DieDesign(
            die_type=DieType.HOLLOW,
            num_orifices=1,
            extrusion_ratio=40.0,
            parts=(
                DiePart(kind=DiePartKind.MANDREL, thickness=87.5, features=()),
                DiePart(kind=DiePartKind.MANDREL, thickness=87.5, features=()),
            ),
        )
        assert any("duplicate" in v for v in validate_design(design))

    def test_orifice_count_positive(self):
        design = DieDesign(
            die_type=DieType.HOLLOW,
            num_orifices=0,
            extrusion_ratio=40.0,
            parts=hollow_design().parts,
        )
        assert any("orifice" in v for v in validate_design(design))

    def test_part_lookup(self):
        design = hollow_design()
        assert design.part(DiePartKind.MANDREL).thickness == 87.5
        with pytest.raises(KeyError):
            design.part(DiePartKind.FEEDER)

    def test_round_trip(self):
        design = hollow_design()
        assert DieDesign.from_dict(design.to_dict()) == design


class TestPlanValidation:
    def test_plan_feature_must_exist_on_design(self):
        feature = DieFeature(kind=FeatureKind.TAP)
        plan = ProcessPlan(
            parts=(
                PartPlan(
                    part=DiePartKind.MANDREL,
                    steps=(
                        PlanStep(
                            feature=feature,
                            operations=(make_operation("tapping"),),
                        ),
                    ),
                ),
            )
        )
        violations = validate_plan(plan, hollow_design())
        assert any("tap" in v for v in violations)

    def test_part_level_steps_always_allowed(self):
        plan = ProcessPlan(
            parts=(
                PartPlan(
                    part=DiePartKind.MANDREL,
                    steps=(
                        PlanStep(feature=None, operations=(make_operation("grinding"),)),
                    ),
                ),
            )
        )
        assert validate_plan(plan, hollow_design()) == []

    def test_round_trip(self):
        plan = ProcessPlan(
            parts=(
                PartPlan(
                    part=DiePartKind.DIE_CAP,
                    steps=(
                        PlanStep(
                            feature=DieFeature(
                                kind=FeatureKind.DEEP_HOLE,
                                attributes=FeatureGeometry(depth=60.0),
                            ),
                            operations=(
                                make_operation("rough wire cutting"),
                                make_operation("finish wire cutting"),
                            ),
                        ),
                    ),
                ),
            ),
            total_time=12.5,
            total_cost=31.25,
        )
        assert ProcessPlan.from_dict(plan.to_dict()) == plan


class TestCaseRecord:
    def test_round_trip(self):
        record = CaseRecord(
            case_id="case-1",
            profile=solid_profile(),
            design=hollow_design(),
            plan=ProcessPlan(parts=()),
            provenance=CaseProvenance.SYNTHETIC,
            created="2026-01-01T00:00:00+00:00",
        )
        assert CaseRecord.from_dict(record.to_dict()) == record
