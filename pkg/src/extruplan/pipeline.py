"""End-to-end planning pipeline and evaluation metrics.

A profile travels encode -> network -> decode -> plan derivation -> time
and cost annotation. When the network output fails validation the
pipeline falls back to nearest-neighbor retrieval, and failing that to
direct knowledge-base construction, so a plan document always comes back
and its provenance trail says exactly which path produced it.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .codec import (
    DesignSkeleton,
    EncodingConfig,
    encode_design,
    encode_profile,
    output_diagnostics,
    decode_output,
)
from .domain import (
    DieDesign,
    DieFeature,
    DiePart,
    ProcessPlan,
    ProfileSpec,
    validate_profile,
)
from .errors import EmptyLibrary, InvalidProfile, PlannerError
from .estimator import EstimatorParams, estimate_plan
from .knowledge import (
    DieStack,
    KnowledgeBase,
    construct_design,
    derive_plan,
    parts_for_die_type,
)
from .library import Library, nearest_neighbors
from .network import MLPModel, forward, predict_binary

#: Provenance labels for the three design sources.
NN_PREDICTION = "NnPrediction"
KNN_FALLBACK = "KnnFallback"
KB_DIRECT = "KbDirect"


@dataclass(frozen=True)
class PlanDocument:
    """The pipeline's deliverable: input echo, design, priced plan, and
    an audit trail of how the design was obtained."""

    profile: ProfileSpec
    design: DieDesign
    plan: ProcessPlan
    provenance: tuple[str, ...]
    confidence: dict[str, float] | None
    diagnostics: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.to_dict(),
            "design": self.design.to_dict(),
            "plan": self.plan.to_dict(),
            "provenance": list(self.provenance),
            "confidence": self.confidence,
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlanDocument":
        return cls(
            profile=ProfileSpec.from_dict(data["profile"]),
            design=DieDesign.from_dict(data["design"]),
            plan=ProcessPlan.from_dict(data["plan"]),
            provenance=tuple(data["provenance"]),
            confidence=data.get("confidence"),
            diagnostics=tuple(data.get("diagnostics", ())),
        )


@contextmanager
def _stage(name: str):
    """Tag errors escaping a pipeline stage with the stage name."""
    try:
        yield
    except PlannerError as exc:
        if exc.args and isinstance(exc.args[0], str) and not exc.args[0].startswith("["):
            exc.args = (f"[{name}] {exc.args[0]}",) + exc.args[1:]
        raise


def validate_output(vec: np.ndarray, cfg: EncodingConfig) -> list[PlannerError]:
    """Diagnostics for an output vector; empty list iff it is decodable
    as far as the output-layout invariants go."""
    return output_diagnostics(vec, cfg)


def materialize_design(skeleton: DesignSkeleton, kb: KnowledgeBase) -> DieDesign:
    """Flesh a decoded skeleton out into a full design by attaching each
    part's template feature list from the knowledge base."""
    parts = tuple(
        DiePart(
            kind=kind,
            thickness=skeleton.part_thickness[kind],
            features=tuple(DieFeature(kind=f) for f in kb.design_templates[kind]),
        )
        for kind in parts_for_die_type(skeleton.die_type)
    )
    return DieDesign(
        die_type=skeleton.die_type,
        num_orifices=skeleton.num_orifices,
        extrusion_ratio=skeleton.extrusion_ratio,
        parts=parts,
    )


def segment_confidence(raw: np.ndarray, cfg: EncodingConfig) -> dict[str, float]:
    """Max output activation per segment: how decisively the network
    committed to its choice in each segment."""
    return {
        seg.name: float(np.max(raw[seg.slice()])) for seg in cfg.output_segments
    }


def plan(
    spec: ProfileSpec,
    model: MLPModel | None,
    kb: KnowledgeBase,
    lib: Library,
    cfg: EncodingConfig,
    threshold: float = 0.5,
) -> PlanDocument:
    """Produce a priced process plan for a profile.

    Design source order: network prediction when its decoded output is
    valid, else the nearest stored case, else direct KB construction.
    The provenance trail records the attempts; rejected network output
    leaves its diagnostics in the document.
    """
    with _stage("validate"):
        violations = validate_profile(spec)
        if violations:
            raise InvalidProfile(violations)
    with _stage("encode"):
        x = encode_profile(spec, cfg)

    trail: list[str] = []
    diagnostics: list[str] = []
    confidence: dict[str, float] | None = None
    design: DieDesign | None = None

    if model is None:
        trail.append("no-model")
    else:
        with _stage("predict"):
            raw = forward(model, x)
            vec = predict_binary(model, x, threshold)
            confidence = segment_confidence(raw, cfg)
        try:
            skeleton = decode_output(vec, cfg)
        except PlannerError as exc:
            trail.append("nn-output-rejected")
            diagnostics.append(str(exc))
        else:
            trail.append(NN_PREDICTION)
            with _stage("materialize"):
                design = materialize_design(skeleton, kb)

    if design is None:
        try:
            with _stage("retrieve"):
                case_id, distance = nearest_neighbors(x, lib, cfg, k=1)[0]
        except EmptyLibrary:
            trail.append("library-empty")
        else:
            trail.append(KNN_FALLBACK)
            diagnostics.append(f"nearest case {case_id!r} at Hamming distance {distance}")
            design = lib.case(case_id).design

    if design is None:
        with _stage("construct"):
            stack = DieStack.from_config(cfg)
            design = construct_design(spec, kb, stack, cfg)
        trail.append(KB_DIRECT)

    with _stage("derive"):
        bare_plan = derive_plan(design, kb)
    with _stage("estimate"):
        params = EstimatorParams.from_config(cfg.estimator)
        priced = estimate_plan(bare_plan, params)

    return PlanDocument(
        profile=spec,
        design=design,
        plan=priced,
        provenance=tuple(trail),
        confidence=confidence,
        diagnostics=tuple(diagnostics),
    )


def _segment_diffs(
    predicted: np.ndarray, expected: np.ndarray, cfg: EncodingConfig
) -> dict[str, dict[str, list[int]]]:
    """Per-segment active-column diffs (1-based), only where they differ."""
    diffs: dict[str, dict[str, list[int]]] = {}
    for seg in cfg.output_segments:
        window = seg.slice()
        if not np.array_equal(predicted[window], expected[window]):
            diffs[seg.name] = {
                "predicted": [seg.start + int(i) for i in np.nonzero(predicted[window])[0]],
                "expected": [seg.start + int(i) for i in np.nonzero(expected[window])[0]],
            }
    return diffs


def evaluate(
    model: MLPModel,
    lib: Library,
    cfg: EncodingConfig,
    kb: KnowledgeBase,
    threshold: float = 0.5,
) -> dict:
    """Score a model over a library.

    Bit-level metrics compare thresholded predictions against the stored
    design encodings. Plan agreement compares the plan reached through
    the network (decode + template materialization) with the plan from
    direct KB construction on the same profile; disagreeing cases are
    listed with per-segment encoding diffs.
    """
    if not lib.cases:
        raise EmptyLibrary("cannot evaluate on an empty library")
    stack = DieStack.from_config(cfg)
    total_bits = 0
    correct_bits = 0
    exact = 0
    die_type_hits = 0
    segment_hits = {seg.name: 0 for seg in cfg.output_segments}
    agreements = 0
    disagreements = []

    for record in lib.cases:
        x = encode_profile(record.profile, cfg)
        target = encode_design(record.design, cfg)
        predicted = predict_binary(model, x, threshold)

        total_bits += target.size
        correct_bits += int(np.sum(predicted == target))
        if np.array_equal(predicted, target):
            exact += 1
        for seg in cfg.output_segments:
            if np.array_equal(predicted[seg.slice()], target[seg.slice()]):
                segment_hits[seg.name] += 1
        die_seg = cfg.output_segment("die_type")
        if np.array_equal(predicted[die_seg.slice()], target[die_seg.slice()]):
            die_type_hits += 1

        reference = construct_design(record.profile, kb, stack, cfg)
        reference_plan = derive_plan(reference, kb)
        try:
            nn_design = materialize_design(decode_output(predicted, cfg), kb)
        except PlannerError as exc:
            disagreements.append(
                {
                    "case_id": record.case_id,
                    "reason": str(exc),
                    "segments": _segment_diffs(
                        predicted, encode_design(reference, cfg), cfg
                    ),
                }
            )
            continue
        if derive_plan(nn_design, kb) == reference_plan:
            agreements += 1
        else:
            disagreements.append(
                {
                    "case_id": record.case_id,
                    "reason": "plans differ",
                    "segments": _segment_diffs(
                        predicted, encode_design(reference, cfg), cfg
                    ),
                }
            )

    n = len(lib.cases)
    disagreements.sort(key=lambda d: d["case_id"])
    return {
        "cases": n,
        "bit_accuracy": correct_bits / total_bits,
        "exact_match_rate": exact / n,
        "die_type_accuracy": die_type_hits / n,
        "per_segment_accuracy": {
            name: hits / n for name, hits in segment_hits.items()
        },
        "plan_agreement_rate": agreements / n,
        "disagreements": disagreements,
    }
