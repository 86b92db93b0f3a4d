"""Domain types shared across the planning system.

Profiles, die features, die designs, machining operations, process plans
and case records. All types are plain immutable dataclasses with JSON
round-trip helpers; units follow industry convention for each attribute
(mm for lengths, cm2 for section areas, cm for perimeters).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ProfileType(Enum):
    """Section classification of an extruded profile."""

    SOLID = "solid"
    SEMI_HOLLOW = "semi_hollow"
    HOLLOW = "hollow"


class PressCapacity(Enum):
    """Press machine capacity in tonnes."""

    T660 = "T660"
    T880 = "T880"
    T1800 = "T1800"


class DieType(Enum):
    """Die construction style, one per profile type."""

    SOLID = "solid"
    SEMI_HOLLOW = "semi_hollow"
    HOLLOW = "hollow"


class DiePartKind(Enum):
    """Die stack parts. Declaration order is canonical: it indexes the
    per-part thickness, feature-group and route segments of the output
    vector, so it must never be reordered."""

    FEEDER = "feeder"
    DIE_PLATE = "die_plate"
    BACKER = "backer"
    MANDREL = "mandrel"
    DIE_CAP = "die_cap"


#: Part composition per die type. Solid and semi-hollow dies share the
#: flat-die stack; hollow dies split into mandrel and die cap.
PARTS_BY_DIE_TYPE: dict[DieType, tuple[DiePartKind, ...]] = {
    DieType.SOLID: (DiePartKind.FEEDER, DiePartKind.DIE_PLATE, DiePartKind.BACKER),
    DieType.SEMI_HOLLOW: (DiePartKind.FEEDER, DiePartKind.DIE_PLATE, DiePartKind.BACKER),
    DieType.HOLLOW: (DiePartKind.MANDREL, DiePartKind.DIE_CAP),
}


class FeatureCategory(Enum):
    HOLE = "hole"
    EDGE = "edge"
    GROOVE = "groove"
    POCKET = "pocket"


class FeatureKind(Enum):
    """Machinable die features: four categories with fixed subkinds."""

    BLIND_HOLE = "blind hole"
    THROUGH_HOLE = "through hole"
    TAP = "tap"
    COUNTERSINK = "countersink"
    COUNTER_BORE = "counter bore"
    DEEP_HOLE = "deep hole"
    EDGE_CHAMFER = "edge chamfer"
    EDGE_FILLET = "edge fillet"
    V_GROOVE = "v groove"
    ROUND_GROOVE = "round groove"
    RECTANGULAR_GROOVE = "rectangular groove"
    OPEN_POCKET_PLANE = "open pocket plane"
    OPEN_POCKET_CIRCULAR = "open pocket circular"
    OPEN_POCKET_SCULPTURED = "open pocket sculptured"
    CLOSED_POCKET_PLANE = "closed pocket plane"
    CLOSED_POCKET_CIRCULAR = "closed pocket circular"
    CLOSED_POCKET_SCULPTURED = "closed pocket sculptured"

    @property
    def category(self) -> FeatureCategory:
        return _FEATURE_CATEGORY[self]


_FEATURE_CATEGORY = {
    FeatureKind.BLIND_HOLE: FeatureCategory.HOLE,
    FeatureKind.THROUGH_HOLE: FeatureCategory.HOLE,
    FeatureKind.TAP: FeatureCategory.HOLE,
    FeatureKind.COUNTERSINK: FeatureCategory.HOLE,
    FeatureKind.COUNTER_BORE: FeatureCategory.HOLE,
    FeatureKind.DEEP_HOLE: FeatureCategory.HOLE,
    FeatureKind.EDGE_CHAMFER: FeatureCategory.EDGE,
    FeatureKind.EDGE_FILLET: FeatureCategory.EDGE,
    FeatureKind.V_GROOVE: FeatureCategory.GROOVE,
    FeatureKind.ROUND_GROOVE: FeatureCategory.GROOVE,
    FeatureKind.RECTANGULAR_GROOVE: FeatureCategory.GROOVE,
    FeatureKind.OPEN_POCKET_PLANE: FeatureCategory.POCKET,
    FeatureKind.OPEN_POCKET_CIRCULAR: FeatureCategory.POCKET,
    FeatureKind.OPEN_POCKET_SCULPTURED: FeatureCategory.POCKET,
    FeatureKind.CLOSED_POCKET_PLANE: FeatureCategory.POCKET,
    FeatureKind.CLOSED_POCKET_CIRCULAR: FeatureCategory.POCKET,
    FeatureKind.CLOSED_POCKET_SCULPTURED: FeatureCategory.POCKET,
}


class Process(Enum):
    """Machining processes in standard die-making route order."""

    TURNING = "turning"
    FACING = "facing"
    DRILLING = "drilling"
    MILLING = "milling"
    HEAT_TREATMENT = "heat_treatment"
    GRINDING = "grinding"
    EDM_SPARK = "edm_spark"
    EDM_WIRE = "edm_wire"


#: Fixed operation vocabulary: every named machining step and the single
#: process it belongs to. Plans may only contain these names.
OPERATION_PROCESS: dict[str, Process] = {
    "rough turning": Process.TURNING,
    "semi-finish turning": Process.TURNING,
    "finish turning": Process.TURNING,
    "round chamfering": Process.TURNING,
    "round grooving": Process.TURNING,
    "rough facing": Process.FACING,
    "semi-finish facing": Process.FACING,
    "finish facing": Process.FACING,
    "centering": Process.DRILLING,
    "drilling": Process.DRILLING,
    "boring": Process.DRILLING,
    "reaming": Process.DRILLING,
    "tapping": Process.DRILLING,
    "counter boring": Process.DRILLING,
    "countersinking": Process.DRILLING,
    "rough milling": Process.MILLING,
    "semi-finish milling": Process.MILLING,
    "finish milling": Process.MILLING,
    "heat treatment": Process.HEAT_TREATMENT,
    "grinding": Process.GRINDING,
    "EDM sparking": Process.EDM_SPARK,
    "rough wire cutting": Process.EDM_WIRE,
    "finish wire cutting": Process.EDM_WIRE,
}


class CaseProvenance(Enum):
    INDUSTRIAL = "industrial"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class ProfileSpec:
    """Characteristics of an extruded profile, the semantic input of the
    retrieval network.

    Lengths (wall_thickness, width, height, ccd) are mm; cross_section_area
    is cm2; perimeter and external_perimeter are cm. ``external_perimeter``
    of 0 means the profile has none; ``ccd``, ``press_capacity`` and
    ``extrusion_ratio`` are optional and may be absent (None).
    """

    profile_type: ProfileType
    shape_class: int
    wall_thickness: float
    width: float
    height: float
    cross_section_area: float
    perimeter: float
    tongue_ratio: float
    ccd: float | None = None
    press_capacity: PressCapacity | None = None
    extrusion_ratio: float | None = None
    external_perimeter: float = 0.0

    def to_dict(self) -> dict:
        d = {
            "profile_type": self.profile_type.value,
            "shape_class": self.shape_class,
            "wall_thickness": self.wall_thickness,
            "width": self.width,
            "height": self.height,
            "cross_section_area": self.cross_section_area,
            "perimeter": self.perimeter,
            "tongue_ratio": self.tongue_ratio,
            "ccd": self.ccd,
            "press_capacity": self.press_capacity.value if self.press_capacity else None,
            "extrusion_ratio": self.extrusion_ratio,
            "external_perimeter": self.external_perimeter,
        }
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ProfileSpec":
        """Build from a JSON dict.

        An optional ``perimeter_unit`` key ("cm", the default, or "mm")
        normalizes perimeter and external_perimeter at ingest; sources
        disagree on the unit for older profile sheets, so it is explicit
        rather than guessed.
        """
        scale = 1.0
        unit = data.get("perimeter_unit", "cm")
        if unit == "mm":
            scale = 0.1
        elif unit != "cm":
            raise ValueError(f"unknown perimeter_unit {unit!r}")
        press = data.get("press_capacity")
        return cls(
            profile_type=ProfileType(data["profile_type"]),
            shape_class=int(data["shape_class"]),
            wall_thickness=float(data["wall_thickness"]),
            width=float(data["width"]),
            height=float(data["height"]),
            cross_section_area=float(data["cross_section_area"]),
            perimeter=float(data["perimeter"]) * scale,
            tongue_ratio=float(data["tongue_ratio"]),
            ccd=None if data.get("ccd") is None else float(data["ccd"]),
            press_capacity=PressCapacity(press) if press else None,
            extrusion_ratio=(
                None if data.get("extrusion_ratio") is None else float(data["extrusion_ratio"])
            ),
            external_perimeter=float(data.get("external_perimeter", 0.0)) * scale,
        )


def validate_profile(spec: ProfileSpec) -> list[str]:
    """Check every ProfileSpec invariant.

    Returns an empty list iff the profile is valid, otherwise one message
    per violated invariant. Diagnostics are the return value; nothing is
    raised.
    """
    violations = []
    for name in ("width", "height", "wall_thickness", "cross_section_area", "perimeter"):
        if getattr(spec, name) <= 0:
            violations.append(f"{name} > 0")
    if spec.external_perimeter < 0:
        violations.append("external_perimeter >= 0")
    if spec.tongue_ratio < 0:
        violations.append("tongue_ratio >= 0")
    if spec.ccd is not None and spec.ccd < max(spec.width, spec.height):
        violations.append("ccd >= max(width, height)")
    if spec.extrusion_ratio is not None and spec.extrusion_ratio <= 1:
        violations.append("extrusion_ratio > 1")
    if not 0 <= spec.shape_class <= 19:
        violations.append("shape_class in 0..19")
    return violations


@dataclass(frozen=True)
class FeatureGeometry:
    """Optional feature geometry, used only by the time estimator."""

    diameter: float | None = None
    depth: float | None = None
    removal_volume: float | None = None  # mm3

    def to_dict(self) -> dict:
        return {
            "diameter": self.diameter,
            "depth": self.depth,
            "removal_volume": self.removal_volume,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureGeometry":
        return cls(
            diameter=data.get("diameter"),
            depth=data.get("depth"),
            removal_volume=data.get("removal_volume"),
        )


@dataclass(frozen=True)
class DieFeature:
    """A single machinable feature on a die part."""

    kind: FeatureKind
    attributes: FeatureGeometry = field(default_factory=FeatureGeometry)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "attributes": self.attributes.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "DieFeature":
        return cls(
            kind=FeatureKind(data["kind"]),
            attributes=FeatureGeometry.from_dict(data.get("attributes", {})),
        )


def validate_feature(feature: DieFeature) -> list[str]:
    violations = []
    vol = feature.attributes.removal_volume
    if vol is not None and vol <= 0:
        violations.append("removal_volume > 0")
    return violations


@dataclass(frozen=True)
class DiePart:
    """One part of the die stack with its thickness and feature set."""

    kind: DiePartKind
    thickness: float  # mm
    features: tuple[DieFeature, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "thickness": self.thickness,
            "features": [f.to_dict() for f in self.features],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiePart":
        return cls(
            kind=DiePartKind(data["kind"]),
            thickness=float(data["thickness"]),
            features=tuple(DieFeature.from_dict(f) for f in data.get("features", [])),
        )


@dataclass(frozen=True)
class DieDesign:
    """A die design: type, orifice layout and the part stack."""

    die_type: DieType
    num_orifices: int
    extrusion_ratio: float
    parts: tuple[DiePart, ...]

    def part(self, kind: DiePartKind) -> DiePart:
        for p in self.parts:
            if p.kind == kind:
                return p
        raise KeyError(kind)

    def to_dict(self) -> dict:
        return {
            "die_type": self.die_type.value,
            "num_orifices": self.num_orifices,
            "extrusion_ratio": self.extrusion_ratio,
            "parts": [p.to_dict() for p in self.parts],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DieDesign":
        return cls(
            die_type=DieType(data["die_type"]),
            num_orifices=int(data["num_orifices"]),
            extrusion_ratio=float(data["extrusion_ratio"]),
            parts=tuple(DiePart.from_dict(p) for p in data["parts"]),
        )


def validate_design(design: DieDesign) -> list[str]:
    """Check every DieDesign invariant; empty list means valid."""
    violations = []
    kinds = [p.kind for p in design.parts]
    expected = PARTS_BY_DIE_TYPE[design.die_type]
    if set(kinds) != set(expected):
        violations.append(
            f"{design.die_type.value} die requires parts "
            f"{{{', '.join(k.value for k in expected)}}}"
        )
    if len(set(kinds)) != len(kinds):
        violations.append("no duplicate part kinds")
    for p in design.parts:
        if p.thickness <= 0:
            violations.append(f"{p.kind.value} thickness > 0")
        for f in p.features:
            violations.extend(validate_feature(f))
    if design.num_orifices < 1:
        violations.append("num_orifices >= 1")
    if design.extrusion_ratio <= 1:
        violations.append("extrusion_ratio > 1")
    return violations


@dataclass(frozen=True)
class MachiningOperation:
    """A named machining step; time/cost stay None until estimation runs."""

    process: Process
    operation: str
    estimated_time: float | None = None  # minutes
    estimated_cost: float | None = None

    def __post_init__(self):
        expected = OPERATION_PROCESS.get(self.operation)
        if expected is None:
            raise ValueError(f"unknown operation name {self.operation!r}")
        if expected != self.process:
            raise ValueError(
                f"operation {self.operation!r} belongs to {expected.value}, "
                f"not {self.process.value}"
            )

    def to_dict(self) -> dict:
        return {
            "process": self.process.value,
            "operation": self.operation,
            "estimated_time": self.estimated_time,
            "estimated_cost": self.estimated_cost,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MachiningOperation":
        return cls(
            process=Process(data["process"]),
            operation=data["operation"],
            estimated_time=data.get("estimated_time"),
            estimated_cost=data.get("estimated_cost"),
        )


def make_operation(name: str) -> MachiningOperation:
    """Build an operation from its vocabulary name."""
    process = OPERATION_PROCESS.get(name)
    if process is None:
        raise ValueError(f"unknown machining operation {name!r}")
    return MachiningOperation(process=process, operation=name)


@dataclass(frozen=True)
class PlanStep:
    """Operations for one feature; ``feature`` is None for part-level
    steps (heat treatment, grinding) that are not tied to any feature."""

    feature: DieFeature | None
    operations: tuple[MachiningOperation, ...]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.to_dict() if self.feature else None,
            "operations": [op.to_dict() for op in self.operations],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlanStep":
        feat = data.get("feature")
        return cls(
            feature=DieFeature.from_dict(feat) if feat else None,
            operations=tuple(MachiningOperation.from_dict(o) for o in data["operations"]),
        )


@dataclass(frozen=True)
class PartPlan:
    part: DiePartKind
    steps: tuple[PlanStep, ...]

    def to_dict(self) -> dict:
        return {"part": self.part.value, "steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, data: dict) -> "PartPlan":
        return cls(
            part=DiePartKind(data["part"]),
            steps=tuple(PlanStep.from_dict(s) for s in data["steps"]),
        )


@dataclass(frozen=True)
class ProcessPlan:
    """Ordered machining plan over die parts; totals come from estimation."""

    parts: tuple[PartPlan, ...]
    total_time: float | None = None  # minutes
    total_cost: float | None = None

    def to_dict(self) -> dict:
        return {
            "parts": [p.to_dict() for p in self.parts],
            "total_time": self.total_time,
            "total_cost": self.total_cost,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProcessPlan":
        return cls(
            parts=tuple(PartPlan.from_dict(p) for p in data["parts"]),
            total_time=data.get("total_time"),
            total_cost=data.get("total_cost"),
        )


def validate_plan(plan: ProcessPlan, design: DieDesign) -> list[str]:
    """Check plan/design consistency: every planned feature must exist on
    the corresponding design part."""
    violations = []
    for part_plan in plan.parts:
        try:
            part = design.part(part_plan.part)
        except KeyError:
            violations.append(f"plan part {part_plan.part.value} not in design")
            continue
        available = list(part.features)
        for step in part_plan.steps:
            if step.feature is None:
                continue
            if step.feature in available:
                available.remove(step.feature)
            else:
                violations.append(
                    f"feature {step.feature.kind.value} on {part_plan.part.value} "
                    "not in design"
                )
    return violations


@dataclass(frozen=True)
class CaseRecord:
    """A stored die-manufacturing case: profile, design and plan."""

    case_id: str
    profile: ProfileSpec
    design: DieDesign
    plan: ProcessPlan
    provenance: CaseProvenance
    created: str  # ISO-8601 timestamp

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "profile": self.profile.to_dict(),
            "design": self.design.to_dict(),
            "plan": self.plan.to_dict(),
            "provenance": self.provenance.value,
            "created": self.created,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CaseRecord":
        return cls(
            case_id=data["case_id"],
            profile=ProfileSpec.from_dict(data["profile"]),
            design=DieDesign.from_dict(data["design"]),
            plan=ProcessPlan.from_dict(data["plan"]),
            provenance=CaseProvenance(data["provenance"]),
            created=data["created"],
        )


def validate_case(record: CaseRecord) -> list[str]:
    violations = validate_profile(record.profile)
    violations += validate_design(record.design)
    violations += validate_plan(record.plan, record.design)
    if not record.case_id:
        violations.append("case_id non-empty")
    return violations
