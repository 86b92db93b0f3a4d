"""Rule-based die design and process planning knowledge.

Holds the IF-THEN rule engine (die-type classification, orifice-count
heuristics), the decision table mapping (feature, part) pairs to ordered
machining operations, the standard per-part process routes, and the die
construction helper that turns a profile into a concrete design. All
knowledge is data, loaded from a versioned JSON file, so shops can edit
thresholds and operation chains without touching code.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from .codec import EncodingConfig, Segment
from .domain import (
    OPERATION_PROCESS,
    PARTS_BY_DIE_TYPE,
    DieDesign,
    DieFeature,
    DiePart,
    DiePartKind,
    DieType,
    FeatureKind,
    MachiningOperation,
    PlanStep,
    PartPlan,
    PressCapacity,
    Process,
    ProcessPlan,
    ProfileSpec,
    make_operation,
    validate_design,
)
from .errors import ConfigError, InternalError, NoRule

Predicate = tuple[str, str, object]

_COMPARATORS = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "in": lambda a, b: a in b,
}


@dataclass(frozen=True)
class Rule:
    """An IF-THEN rule: conjunction of fact predicates, one consequent."""

    rule_id: str
    priority: int
    antecedent: tuple[Predicate, ...]
    consequent: dict


def _holds(antecedent: tuple[Predicate, ...], facts: dict) -> bool:
    for field, op, ref in antecedent:
        if field not in facts:
            return False
        if not _COMPARATORS[op](facts[field], ref):
            return False
    return True


def evaluate_rules(facts: dict, rules: Sequence[Rule]) -> list[dict]:
    """Single forward-chaining pass: every rule whose antecedent holds
    fires; consequents come back ordered by descending priority, then
    rule id. A predicate over a missing fact is false."""
    fired = [r for r in rules if _holds(r.antecedent, facts)]
    fired.sort(key=lambda r: (-r.priority, r.rule_id))
    return [r.consequent for r in fired]


@dataclass(frozen=True)
class KnowledgeBase:
    kb_version: str
    tongue_cutoff: float
    rules: tuple[Rule, ...]
    part_feature_sets: dict[DiePartKind, tuple[FeatureKind, ...]]
    design_templates: dict[DiePartKind, tuple[FeatureKind, ...]]
    routes: dict[DiePartKind, tuple[Process, ...]]
    decision_table: dict[tuple[FeatureKind, DiePartKind], tuple[str, ...]]
    row_provenance: dict[tuple[FeatureKind, DiePartKind], str]
    fingerprint: str


def _parse_rules(raw: list, problems: list[str]) -> list[Rule]:
    rules = []
    seen_ids = set()
    for i, entry in enumerate(raw):
        where = f"rule #{i}"
        if not isinstance(entry, dict):
            problems.append(f"{where}: must be an object")
            continue
        rid = entry.get("id")
        if not isinstance(rid, str) or not rid:
            problems.append(f"{where}: missing id")
            continue
        where = f"rule {rid!r}"
        if rid in seen_ids:
            problems.append(f"{where}: duplicate id")
            continue
        seen_ids.add(rid)
        priority = entry.get("priority", 0)
        if not isinstance(priority, int):
            problems.append(f"{where}: priority must be an integer")
            continue
        when = entry.get("when")
        if not isinstance(when, list) or not when:
            problems.append(f"{where}: antecedent must be a non-empty list")
            continue
        antecedent = []
        ok = True
        for pred in when:
            if (
                not isinstance(pred, list)
                or len(pred) != 3
                or not isinstance(pred[0], str)
                or pred[1] not in _COMPARATORS
            ):
                problems.append(f"{where}: bad predicate {pred!r}")
                ok = False
                break
            antecedent.append((pred[0], pred[1], pred[2]))
        if not ok:
            continue
        then = entry.get("then")
        if not isinstance(then, dict) or len(then) != 1:
            problems.append(f"{where}: consequent must set exactly one value")
            continue
        key = next(iter(then))
        if key not in ("die_type", "num_orifices"):
            problems.append(f"{where}: unknown consequent kind {key!r}")
            continue
        rules.append(Rule(rid, priority, tuple(antecedent), then))
    return rules


def _parse_feature_map(
    raw: dict, what: str, problems: list[str]
) -> dict[DiePartKind, tuple[FeatureKind, ...]]:
    out: dict[DiePartKind, tuple[FeatureKind, ...]] = {}
    if not isinstance(raw, dict):
        problems.append(f"{what} must be an object")
        return out
    for part in DiePartKind:
        feats = raw.get(part.value)
        if not isinstance(feats, list) or not feats:
            problems.append(f"{what}: missing or empty entry for {part.value!r}")
            continue
        kinds = []
        for f in feats:
            try:
                kinds.append(FeatureKind(f))
            except ValueError:
                problems.append(f"{what}[{part.value}]: unknown feature {f!r}")
        out[part] = tuple(kinds)
    return out


def parse_kb(data: dict) -> KnowledgeBase:
    """Validate a parsed KB document; raises ConfigError listing every
    problem found."""
    problems: list[str] = []
    version = data.get("kb_version")
    if not isinstance(version, str) or not version:
        problems.append("kb_version must be a non-empty string")
        version = ""
    cutoff = data.get("tongue_ratio_cutoff")
    if not isinstance(cutoff, (int, float)) or cutoff <= 0:
        problems.append("tongue_ratio_cutoff must be > 0")
        cutoff = 5.0

    rules = _parse_rules(data.get("rules", []), problems)
    feature_sets = _parse_feature_map(
        data.get("part_feature_sets", {}), "part_feature_sets", problems
    )
    templates = _parse_feature_map(
        data.get("design_templates", {}), "design_templates", problems
    )

    routes: dict[DiePartKind, tuple[Process, ...]] = {}
    raw_routes = data.get("routes", {})
    if not isinstance(raw_routes, dict):
        problems.append("routes must be an object")
        raw_routes = {}
    for part in DiePartKind:
        order = raw_routes.get(part.value)
        if not isinstance(order, list):
            problems.append(f"routes: missing entry for {part.value!r}")
            continue
        try:
            procs = tuple(Process(p) for p in order)
        except ValueError:
            problems.append(f"routes[{part.value}]: unknown process name")
            continue
        if sorted(p.value for p in procs) != sorted(p.value for p in Process):
            problems.append(
                f"routes[{part.value}]: must order all {len(Process)} processes "
                "exactly once"
            )
            continue
        if procs.index(Process.HEAT_TREATMENT) > procs.index(Process.GRINDING):
            problems.append(
                f"routes[{part.value}]: heat treatment must precede grinding"
            )
            continue
        routes[part] = procs

    table: dict[tuple[FeatureKind, DiePartKind], tuple[str, ...]] = {}
    row_provenance: dict[tuple[FeatureKind, DiePartKind], str] = {}
    raw_table = data.get("decision_table", [])
    if not isinstance(raw_table, list):
        problems.append("decision_table must be a list")
        raw_table = []
    for i, entry in enumerate(raw_table):
        where = f"decision_table row #{i}"
        if not isinstance(entry, dict):
            problems.append(f"{where}: must be an object")
            continue
        try:
            feature = FeatureKind(entry.get("feature"))
            part = DiePartKind(entry.get("part"))
        except ValueError:
            problems.append(f"{where}: unknown feature or part")
            continue
        key = (feature, part)
        if key in table:
            problems.append(
                f"{where}: duplicate row for ({feature.value}, {part.value})"
            )
            continue
        ops = entry.get("operations")
        if not isinstance(ops, list) or not ops:
            problems.append(f"{where}: operations must be a non-empty list")
            continue
        unknown = [op for op in ops if op not in OPERATION_PROCESS]
        if unknown:
            problems.append(f"{where}: unknown operations {unknown}")
            continue
        provenance = entry.get("provenance")
        if provenance not in ("table4", "extrapolated"):
            problems.append(f"{where}: provenance must be 'table4' or 'extrapolated'")
            continue
        route = routes.get(part)
        if route is not None:
            ranks = [route.index(OPERATION_PROCESS[op]) for op in ops]
            if ranks != sorted(ranks):
                problems.append(
                    f"{where}: operations do not follow the {part.value} route order"
                )
                continue
        table[key] = tuple(ops)
        row_provenance[key] = provenance

    # Totality: every feature the KB may assign to a part needs a row.
    for source_name, mapping in (
        ("part_feature_sets", feature_sets),
        ("design_templates", templates),
    ):
        for part, feats in mapping.items():
            for f in feats:
                if (f, part) not in table:
                    problems.append(
                        f"decision_table: no row for {source_name} pair "
                        f"({f.value}, {part.value})"
                    )

    if problems:
        raise ConfigError("invalid knowledge base:\n  " + "\n  ".join(problems))
    fingerprint = hashlib.sha256(
        json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return KnowledgeBase(
        kb_version=version,
        tongue_cutoff=float(cutoff),
        rules=tuple(rules),
        part_feature_sets=feature_sets,
        design_templates=templates,
        routes=routes,
        decision_table=table,
        row_provenance=row_provenance,
        fingerprint=fingerprint,
    )


def load_kb(path: str | None = None) -> KnowledgeBase:
    """Load and validate a KB file; None loads the packaged default."""
    if path is None:
        text = resources.files("extruplan.data").joinpath("kb.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"knowledge base is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("knowledge base root must be a JSON object")
    return parse_kb(data)


def profile_facts(spec: ProfileSpec) -> dict:
    """Fact dictionary the rule antecedents are written against."""
    facts = {
        "profile_type": spec.profile_type.value,
        "tongue_ratio": spec.tongue_ratio,
        "area": spec.cross_section_area,
        "width": spec.width,
        "height": spec.height,
        "thickness": spec.wall_thickness,
    }
    if spec.press_capacity is not None:
        facts["press"] = spec.press_capacity.value
    return facts


def classify_die_type(spec: ProfileSpec, kb: KnowledgeBase) -> DieType:
    """Classify the die type for a profile via the KB rules: hollow
    profiles take hollow dies, and solid profiles with tongue ratio above
    the cutoff are promoted to semi-hollow."""
    for consequent in evaluate_rules(profile_facts(spec), kb.rules):
        if "die_type" in consequent:
            return DieType(consequent["die_type"])
    raise InternalError(
        f"no classification rule fired for profile type {spec.profile_type.value!r}"
    )


def parts_for_die_type(die_type: DieType) -> tuple[DiePartKind, ...]:
    """Part stack for a die type: flat stack for solid and semi-hollow,
    mandrel plus die cap for hollow."""
    return PARTS_BY_DIE_TYPE[die_type]


def part_feature_set(kind: DiePartKind, kb: KnowledgeBase) -> tuple[FeatureKind, ...]:
    """The standard machinable feature set of a die part."""
    return kb.part_feature_sets[kind]


def select_processes(
    feature: FeatureKind, part: DiePartKind, kb: KnowledgeBase
) -> tuple[MachiningOperation, ...]:
    """Decision-table dispatch: the ordered operation chain for machining
    `feature` on `part`. Dispatch is part-dependent: the same feature can
    map to different chains on different parts (a sculptured closed
    pocket is milled on a mandrel but spark-eroded on a die cap)."""
    ops = kb.decision_table.get((feature, part))
    if ops is None:
        raise NoRule(feature.value, part.value)
    return tuple(make_operation(op) for op in ops)


def standard_route(kind: DiePartKind, kb: KnowledgeBase) -> tuple[Process, ...]:
    """Total process order governing operation sequencing on a part."""
    return kb.routes[kind]


_CANONICAL_PART_ORDER = {kind: i for i, kind in enumerate(DiePartKind)}


def derive_plan(design: DieDesign, kb: KnowledgeBase) -> ProcessPlan:
    """Expand a die design into its machining plan.

    Per part: each feature expands to its decision-table chain, feature
    blocks are stably sorted by the route rank of their first operation
    (features of equal rank keep design order), and heat treatment and
    grinding are inserted as whole-part steps at their route positions.
    Sorting is at block granularity; a block's internal chain is kept
    verbatim even where it spans several processes."""
    part_plans = []
    for part in sorted(design.parts, key=lambda p: _CANONICAL_PART_ORDER[p.kind]):
        route = kb.routes[part.kind]
        blocks: list[tuple[int, PlanStep]] = []
        for feature in part.features:
            ops = select_processes(feature.kind, part.kind, kb)
            rank = route.index(ops[0].process)
            blocks.append((rank, PlanStep(feature=feature, operations=ops)))
        for name in ("heat treatment", "grinding"):
            op = make_operation(name)
            blocks.append((route.index(op.process), PlanStep(None, (op,))))
        blocks.sort(key=lambda item: item[0])
        part_plans.append(PartPlan(part.kind, tuple(step for _, step in blocks)))
    return ProcessPlan(parts=tuple(part_plans))


@dataclass(frozen=True)
class DieStack:
    """Press-dependent die stack dimensioning data from the config file."""

    container_area_cm2: dict[PressCapacity, float]
    press_by_area_cm2: tuple[tuple[float | None, PressCapacity], ...]
    part_thickness_mm: dict[PressCapacity, dict[DiePartKind, float]]

    @classmethod
    def from_config(cls, cfg: EncodingConfig) -> "DieStack":
        raw = cfg.die_stack
        problems: list[str] = []

        containers: dict[PressCapacity, float] = {}
        raw_cont = raw.get("container_area_cm2", {})
        for press in PressCapacity:
            area = raw_cont.get(press.value) if isinstance(raw_cont, dict) else None
            if not isinstance(area, (int, float)) or area <= 0:
                problems.append(f"die_stack.container_area_cm2.{press.value} must be > 0")
            else:
                containers[press] = float(area)

        ladder: list[tuple[float | None, PressCapacity]] = []
        raw_ladder = raw.get("press_by_area_cm2")
        if not isinstance(raw_ladder, list) or not raw_ladder:
            problems.append("die_stack.press_by_area_cm2 must be a non-empty list")
        else:
            prev = 0.0
            for entry in raw_ladder:
                if not isinstance(entry, list) or len(entry) != 2:
                    problems.append("die_stack.press_by_area_cm2: entries are [limit, press]")
                    continue
                limit, press_name = entry
                try:
                    press = PressCapacity(press_name)
                except ValueError:
                    problems.append(f"die_stack.press_by_area_cm2: unknown press {press_name!r}")
                    continue
                if limit is not None:
                    if not isinstance(limit, (int, float)) or limit <= prev:
                        problems.append(
                            "die_stack.press_by_area_cm2: limits must be ascending"
                        )
                        continue
                    prev = float(limit)
                ladder.append((None if limit is None else float(limit), press))
            if ladder and ladder[-1][0] is not None:
                problems.append(
                    "die_stack.press_by_area_cm2: last entry must have limit null"
                )

        thickness: dict[PressCapacity, dict[DiePartKind, float]] = {}
        raw_thick = raw.get("part_thickness_mm", {})
        for press in PressCapacity:
            per_press = raw_thick.get(press.value) if isinstance(raw_thick, dict) else None
            if not isinstance(per_press, dict):
                problems.append(f"die_stack.part_thickness_mm.{press.value} missing")
                continue
            thickness[press] = {}
            for part in DiePartKind:
                t = per_press.get(part.value)
                if not isinstance(t, (int, float)) or t <= 0:
                    problems.append(
                        f"die_stack.part_thickness_mm.{press.value}.{part.value} must be > 0"
                    )
                else:
                    thickness[press][part] = float(t)

        if problems:
            raise ConfigError("invalid die stack config:\n  " + "\n  ".join(problems))
        return cls(containers, tuple(ladder), thickness)

    def press_for_area(self, area_cm2: float) -> PressCapacity:
        for limit, press in self.press_by_area_cm2:
            if limit is None or area_cm2 < limit:
                return press
        return self.press_by_area_cm2[-1][1]


def select_num_orifices(spec: ProfileSpec, press: PressCapacity, kb: KnowledgeBase) -> int:
    """Orifice count from the heuristic KB rules; 1 when none fire."""
    facts = profile_facts(spec)
    facts["press"] = press.value
    for consequent in evaluate_rules(facts, kb.rules):
        if "num_orifices" in consequent:
            return int(consequent["num_orifices"])
    return 1


def _snap_to_bins(value: float, seg: Segment) -> float:
    """Nearest bin representative; ties and out-of-range clamp inward."""
    reps = [seg.rep_value(i) for i in range(seg.size)]
    return min(reps, key=lambda r: (abs(r - value), r))


def derive_extrusion_ratio(
    spec: ProfileSpec,
    num_orifices: int,
    press: PressCapacity,
    stack: DieStack,
    cfg: EncodingConfig,
) -> float:
    """Extrusion ratio: the profile's own value when supplied, otherwise
    container area over total orifice area, snapped to the output bin
    grid so the resulting design stays encodable."""
    if spec.extrusion_ratio is not None:
        return spec.extrusion_ratio
    ratio = stack.container_area_cm2[press] / (num_orifices * spec.cross_section_area)
    return _snap_to_bins(ratio, cfg.output_segment("extrusion_ratio"))


def construct_design(
    spec: ProfileSpec,
    kb: KnowledgeBase,
    stack: DieStack,
    cfg: EncodingConfig,
    feature_source: dict[DiePartKind, tuple[FeatureKind, ...]] | None = None,
) -> DieDesign:
    """Build a full die design for a profile from knowledge alone.

    Die type comes from classification, press from the profile or the
    area ladder, orifice count from the heuristic rules, extrusion ratio
    from the profile or the container-area quotient, part thicknesses
    from the per-press stack lookup, and part features from the design
    templates (or `feature_source` when given).
    """
    die_type = classify_die_type(spec, kb)
    press = spec.press_capacity or stack.press_for_area(spec.cross_section_area)
    num_orifices = select_num_orifices(spec, press, kb)
    ratio = derive_extrusion_ratio(spec, num_orifices, press, stack, cfg)
    features_by_part = feature_source or kb.design_templates
    parts = tuple(
        DiePart(
            kind=kind,
            thickness=stack.part_thickness_mm[press][kind],
            features=tuple(DieFeature(kind=f) for f in features_by_part[kind]),
        )
        for kind in parts_for_die_type(die_type)
    )
    design = DieDesign(
        die_type=die_type,
        num_orifices=num_orifices,
        extrusion_ratio=ratio,
        parts=parts,
    )
    violations = validate_design(design)
    if violations:
        raise InternalError(
            "constructed design failed validation: " + "; ".join(violations)
        )
    return design
