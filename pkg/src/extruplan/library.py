"""Case library: persistence, retrieval and synthetic corpus generation.

Stores complete die-manufacturing cases (profile, design, plan) in a
versioned JSON file, retrieves neighbors by Hamming distance between
encoded profiles, and can generate a deterministic synthetic corpus that
uses the knowledge base as its labeling oracle. The well-documented
hollow-die case from the industrial validation always rides along as
case "reference-case" so every corpus anchors to a known-good answer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .codec import EncodingConfig, encode_design, encode_profile
from .domain import (
    CaseProvenance,
    CaseRecord,
    DieDesign,
    DieFeature,
    DiePart,
    DiePartKind,
    DieType,
    PressCapacity,
    ProfileSpec,
    ProfileType,
    validate_case,
)
from .errors import (
    BinOutOfRange,
    EmptyLibrary,
    InternalError,
    SchemaMismatch,
    VersionMismatch,
)
from .knowledge import DieStack, KnowledgeBase, construct_design, derive_plan

LIBRARY_SCHEMA = "extruplan-library"

#: Timestamp stamped on generated cases. Constant by design: corpora are
#: functions of (n, seed, config, kb) and nothing else, so regenerating
#: must be byte-identical.
GENERATED_AT = "2026-01-01T00:00:00+00:00"

REFERENCE_CASE_ID = "reference-case"


@dataclass(frozen=True)
class Library:
    """Immutable ordered collection of cases plus codec/KB provenance."""

    cases: tuple[CaseRecord, ...]
    codec_version: str
    kb_fingerprint: str

    def __len__(self) -> int:
        return len(self.cases)

    def case(self, case_id: str) -> CaseRecord:
        for record in self.cases:
            if record.case_id == case_id:
                return record
        raise KeyError(case_id)

    def with_case(self, record: CaseRecord) -> "Library":
        if any(c.case_id == record.case_id for c in self.cases):
            raise SchemaMismatch(f"duplicate case_id {record.case_id!r}")
        violations = validate_case(record)
        if violations:
            raise SchemaMismatch(
                f"case {record.case_id!r} invalid: " + "; ".join(violations)
            )
        return replace(self, cases=self.cases + (record,))


def save_library(lib: Library, path: str):
    doc = {
        "schema": LIBRARY_SCHEMA,
        "codec_version": lib.codec_version,
        "kb_fingerprint": lib.kb_fingerprint,
        "cases": [c.to_dict() for c in lib.cases],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_library(path: str, cfg: EncodingConfig) -> Library:
    """Load a library file, rejecting wrong codec versions, duplicate ids
    and records that fail domain validation."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"library file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != LIBRARY_SCHEMA:
        raise SchemaMismatch("not a library file (missing schema marker)")
    stored_version = doc.get("codec_version", "")
    if stored_version != cfg.codec_version:
        raise VersionMismatch(stored_version, cfg.codec_version)
    raw_cases = doc.get("cases")
    if not isinstance(raw_cases, list):
        raise SchemaMismatch("library cases must be a list")
    records = []
    seen: set[str] = set()
    for raw in raw_cases:
        try:
            record = CaseRecord.from_dict(raw)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaMismatch(f"malformed case record: {exc}") from exc
        if record.case_id in seen:
            raise SchemaMismatch(f"duplicate case_id {record.case_id!r}")
        seen.add(record.case_id)
        violations = validate_case(record)
        if violations:
            raise SchemaMismatch(
                f"case {record.case_id!r} invalid: " + "; ".join(violations)
            )
        records.append(record)
    return Library(
        cases=tuple(records),
        codec_version=stored_version,
        kb_fingerprint=doc.get("kb_fingerprint", ""),
    )


def nearest_neighbors(
    query: np.ndarray, lib: Library, cfg: EncodingConfig, k: int = 1
) -> list[tuple[str, int]]:
    """The k stored cases whose encoded profiles are closest to `query`
    by Hamming distance, ascending; equal distances order by case_id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not lib.cases:
        raise EmptyLibrary("cannot retrieve from an empty library")
    scored = []
    for record in lib.cases:
        encoded = encode_profile(record.profile, cfg)
        distance = int(np.sum(encoded != query))
        scored.append((distance, record.case_id))
    scored.sort()
    return [(case_id, distance) for distance, case_id in scored[:k]]


def reference_case(kb: KnowledgeBase, stack: DieStack, cfg: EncodingConfig) -> CaseRecord:
    """The hollow rectangular-tube case used for industrial validation:
    3.4 cm2 section, 50 x 14.7 mm, one cavity, extrusion ratio 40,
    mandrel and die cap at the small-press stack thickness."""
    profile = ProfileSpec(
        profile_type=ProfileType.HOLLOW,
        shape_class=cfg.shape_catalog.index("rectangle_tube"),
        wall_thickness=2.3,
        width=50.0,
        height=14.7,
        cross_section_area=3.4,
        perimeter=30.37,
        external_perimeter=19.24,
        tongue_ratio=1.4,
    )
    design = replace(
        construct_design(profile, kb, stack, cfg),
        extrusion_ratio=40.0,
    )
    record = CaseRecord(
        case_id=REFERENCE_CASE_ID,
        profile=profile,
        design=design,
        plan=derive_plan(design, kb),
        provenance=CaseProvenance.INDUSTRIAL,
        created=GENERATED_AT,
    )
    violations = validate_case(record)
    if violations:
        raise InternalError("reference case invalid: " + "; ".join(violations))
    return record


#: Shape catalog indexes plausible for each profile type.
_CLOSED_SHAPES = (9, 10, 11, 12, 16, 17)
_OPEN_SHAPES = (0, 1, 2, 3, 4, 5, 6, 7, 8, 13, 14, 15, 18, 19)

_TYPE_DRAW = (
    (ProfileType.SOLID, 0.45),
    (ProfileType.SEMI_HOLLOW, 0.20),
    (ProfileType.HOLLOW, 0.35),
)


def _draw_bin(rng, seg, jitter: bool) -> float:
    index = int(rng.integers(0, seg.size))
    if jitter:
        lo, hi = seg.edges[index], seg.edges[index + 1]
        return float(lo + rng.uniform(0.0, 1.0) * (hi - lo))
    return seg.rep_value(index)


def _draw_profile(rng, cfg: EncodingConfig, jitter: bool) -> ProfileSpec:
    p = np.array([w for _, w in _TYPE_DRAW])
    ptype = _TYPE_DRAW[int(rng.choice(len(_TYPE_DRAW), p=p / p.sum()))][0]
    shapes = _CLOSED_SHAPES if ptype == ProfileType.HOLLOW else _OPEN_SHAPES
    shape = int(shapes[int(rng.integers(0, len(shapes)))])

    width = _draw_bin(rng, cfg.input_segment("width"), jitter)
    height = _draw_bin(rng, cfg.input_segment("height"), jitter)
    ccd_seg = cfg.input_segment("ccd")
    floor = max(width, height)
    candidates = [i for i in range(ccd_seg.size) if ccd_seg.edges[i] >= floor]
    ccd_index = candidates[int(rng.integers(0, len(candidates)))]
    if jitter:
        lo, hi = ccd_seg.edges[ccd_index], ccd_seg.edges[ccd_index + 1]
        ccd = float(lo + rng.uniform(0.0, 1.0) * (hi - lo))
    else:
        ccd = ccd_seg.rep_value(ccd_index)

    if ptype == ProfileType.SOLID:
        external = 0.0
    else:
        external = _draw_bin(rng, cfg.input_segment("external_perimeter"), jitter)
        if external == 0.0:
            external = cfg.input_segment("external_perimeter").rep_value(0)

    return ProfileSpec(
        profile_type=ptype,
        shape_class=shape,
        wall_thickness=_draw_bin(rng, cfg.input_segment("thickness"), jitter),
        width=width,
        height=height,
        cross_section_area=_draw_bin(rng, cfg.input_segment("area"), jitter),
        perimeter=_draw_bin(rng, cfg.input_segment("perimeter"), jitter),
        tongue_ratio=_draw_bin(rng, cfg.input_segment("tongue_ratio"), jitter),
        ccd=ccd,
        press_capacity=PressCapacity(cfg.press_catalog[int(rng.integers(0, 3))]),
        extrusion_ratio=None,
        external_perimeter=external,
    )


def generate_synthetic_cases(
    n: int,
    seed: int,
    cfg: EncodingConfig,
    kb: KnowledgeBase,
    jitter: bool = False,
) -> list[CaseRecord]:
    """Deterministically generate n cases (the reference case plus n - 1
    sampled ones) labeled by the knowledge base.

    Profile attributes are drawn at bin representatives so encodings are
    exact; `jitter` spreads them uniformly within their bin instead, for
    robustness testing (designs stay on the bin grid either way). Every
    case gets a distinct input encoding; duplicates are re-drawn.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    stack = DieStack.from_config(cfg)
    records = [reference_case(kb, stack, cfg)]
    seen = {encode_profile(records[0].profile, cfg).tobytes()}
    rng = np.random.default_rng(seed)
    index = 1
    while len(records) < n:
        profile = _draw_profile(rng, cfg, jitter)
        design = construct_design(
            profile, kb, stack, cfg, feature_source=kb.part_feature_sets
        )
        # the derived ratio becomes a profile attribute so the input and
        # output encodings stay consistent for training
        profile = replace(profile, extrusion_ratio=design.extrusion_ratio)
        key = encode_profile(profile, cfg).tobytes()
        if key in seen:
            continue
        seen.add(key)
        record = CaseRecord(
            case_id=f"syn-{index:04d}",
            profile=profile,
            design=design,
            plan=derive_plan(design, kb),
            provenance=CaseProvenance.SYNTHETIC,
            created=GENERATED_AT,
        )
        violations = validate_case(record)
        if violations:
            raise InternalError(
                f"generated case {record.case_id} invalid: " + "; ".join(violations)
            )
        records.append(record)
        index += 1
    return records


def build_dataset(
    lib: Library, cfg: EncodingConfig
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Encode every case into an (input, output) training pair, in
    library order."""
    pairs = []
    for record in lib.cases:
        try:
            pairs.append(
                (encode_profile(record.profile, cfg), encode_design(record.design, cfg))
            )
        except BinOutOfRange as exc:
            raise BinOutOfRange(
                exc.segment, exc.value, context=f"case {record.case_id!r}"
            ) from exc
    return pairs
