"""Binary vector codec for profiles and die designs.

Profiles encode to a 170-node input vector and die designs to a 93-node
output vector. Both layouts are segmented: each segment is a contiguous
column range holding a one-hot choice (category, catalog entry, count or
numeric bin) or a set of per-part flags. Segment tables, bin edges and
catalogs come from a JSON config file; columns are 1-based in every
serialized form and diagnostic, matching die-shop vector sheets.
"""
from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .domain import (
    PARTS_BY_DIE_TYPE,
    DieDesign,
    DiePartKind,
    DieType,
    ProfileSpec,
    ProfileType,
)
from .errors import (
    AmbiguousSegment,
    BinOutOfRange,
    ConfigError,
    DimensionMismatch,
    InconsistentParts,
    PlannerError,
    UnknownShape,
)

INPUT_WIDTH = 170
OUTPUT_WIDTH = 93

#: Order of per-part thickness segments in the output layout.
PART_THICKNESS_SEGMENTS: tuple[tuple[DiePartKind, str], ...] = (
    (DiePartKind.FEEDER, "thickness_feeder"),
    (DiePartKind.DIE_PLATE, "thickness_die"),
    (DiePartKind.BACKER, "thickness_back"),
    (DiePartKind.MANDREL, "thickness_mandrel"),
    (DiePartKind.DIE_CAP, "thickness_diecap"),
)

#: Canonical part order for the feature-group and route flag segments.
FLAG_PART_ORDER: tuple[DiePartKind, ...] = tuple(k for k, _ in PART_THICKNESS_SEGMENTS)

_PROFILE_TYPE_ORDER = (ProfileType.SOLID, ProfileType.SEMI_HOLLOW, ProfileType.HOLLOW)
_DIE_TYPE_ORDER = (DieType.SOLID, DieType.SEMI_HOLLOW, DieType.HOLLOW)

_SEGMENT_KINDS = ("category", "catalog", "count", "bins", "flags")


@dataclass(frozen=True)
class Segment:
    """One contiguous column range of a vector layout."""

    name: str
    start: int  # first column, 1-based
    size: int
    kind: str
    edges: tuple[float, ...] | None = None
    representative: str = "midpoint"

    @property
    def stop(self) -> int:
        """Last column, inclusive."""
        return self.start + self.size - 1

    def slice(self) -> slice:
        """0-based slice of this segment within its vector."""
        return slice(self.start - 1, self.start - 1 + self.size)

    def rep_value(self, index: int) -> float:
        """Scalar stand-in for bin `index` when decoding."""
        lo, hi = self.edges[index], self.edges[index + 1]
        if self.representative == "lower":
            return lo
        return (lo + hi) / 2.0


@dataclass(frozen=True)
class EncodingConfig:
    """Validated segment layout plus the catalogs both codecs share.

    Sections other than the codec's own (die_stack, estimator,
    cli_defaults) ride along as plain dicts for their owning modules.
    """

    codec_version: str
    input_segments: tuple[Segment, ...]
    output_segments: tuple[Segment, ...]
    shape_catalog: tuple[str, ...]
    press_catalog: tuple[str, ...]
    die_stack: dict
    estimator: dict
    cli_defaults: dict

    def input_segment(self, name: str) -> Segment:
        for seg in self.input_segments:
            if seg.name == name:
                return seg
        raise KeyError(name)

    def output_segment(self, name: str) -> Segment:
        for seg in self.output_segments:
            if seg.name == name:
                return seg
        raise KeyError(name)


def bin_lookup(value: float, edges: tuple[float, ...]) -> int:
    """Index of the half-open interval [edges[i], edges[i+1]) holding value.

    Raises BinOutOfRange (with a placeholder segment name) when the value
    falls outside [edges[0], edges[-1]); callers re-raise with the segment.
    """
    if value < edges[0] or value >= edges[-1]:
        raise BinOutOfRange("<unnamed>", value)
    return bisect_right(edges, value) - 1


def _parse_segment(raw: dict, table: str, problems: list[str]) -> Segment | None:
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        problems.append(f"{table}: segment without a name: {raw!r}")
        return None
    where = f"{table} segment {name!r}"
    kind = raw.get("kind")
    if kind not in _SEGMENT_KINDS:
        problems.append(f"{where}: unknown kind {kind!r}")
        return None
    start = raw.get("start")
    if not isinstance(start, int) or start < 1:
        problems.append(f"{where}: start must be a column number >= 1, got {start!r}")
        return None
    rep = raw.get("representative", "midpoint")
    if rep not in ("midpoint", "lower"):
        problems.append(f"{where}: representative must be 'midpoint' or 'lower'")
        return None
    if kind == "bins":
        edges = raw.get("edges")
        if not isinstance(edges, list) or len(edges) < 2:
            problems.append(f"{where}: bins need at least 2 edges")
            return None
        if not all(isinstance(e, (int, float)) for e in edges):
            problems.append(f"{where}: bin edges must be numbers")
            return None
        for i in range(len(edges) - 1):
            if not edges[i] < edges[i + 1]:
                problems.append(
                    f"{where}: bin edges not strictly increasing at index {i} "
                    f"({edges[i]!r} >= {edges[i + 1]!r})"
                )
                return None
        size = len(edges) - 1
        declared = raw.get("size")
        if declared is not None and declared != size:
            problems.append(
                f"{where}: declared size {declared} but {size} bins configured"
            )
            return None
        return Segment(name, start, size, kind, tuple(float(e) for e in edges), rep)
    size = raw.get("size")
    if not isinstance(size, int) or size < 1:
        problems.append(f"{where}: size must be an integer >= 1, got {size!r}")
        return None
    return Segment(name, start, size, kind, None, rep)


def _check_layout(segments: list[Segment], table: str, total: int, problems: list[str]):
    names = [s.name for s in segments]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        problems.append(f"{table}: duplicate segment names {dupes}")
    column = 1
    for seg in segments:
        if seg.start != column:
            problems.append(
                f"{table} segment {seg.name!r} starts at column {seg.start}, "
                f"expected {column} (segments must be contiguous)"
            )
            column = seg.start  # resync so later messages stay meaningful
        column += seg.size
    covered = column - 1
    if covered != total:
        problems.append(f"{table}: segments cover {covered} columns, expected {total}")


_REQUIRED_INPUT = {
    "profile_type": "category",
    "shape": "catalog",
    "thickness": "bins",
    "width": "bins",
    "height": "bins",
    "ccd": "bins",
    "area": "bins",
    "press": "category",
    "extrusion_ratio": "bins",
    "perimeter": "bins",
    "external_perimeter": "bins",
    "tongue_ratio": "bins",
}

_REQUIRED_OUTPUT = {
    "die_type": "category",
    "num_orifices": "count",
    "extrusion_ratio": "bins",
    "thickness_feeder": "bins",
    "thickness_die": "bins",
    "thickness_back": "bins",
    "thickness_mandrel": "bins",
    "thickness_diecap": "bins",
    "feature_groups": "flags",
    "process_routes": "flags",
}


def _check_roles(segments: list[Segment], required: dict, table: str, problems: list[str]):
    by_name = {s.name: s for s in segments}
    for name, kind in required.items():
        seg = by_name.get(name)
        if seg is None:
            problems.append(f"{table}: required segment {name!r} missing")
        elif seg.kind != kind:
            problems.append(
                f"{table} segment {name!r}: kind {seg.kind!r}, expected {kind!r}"
            )


def parse_config(data: dict) -> EncodingConfig:
    """Validate a parsed config document; collect every problem found and
    raise one ConfigError naming all of them."""
    problems: list[str] = []
    version = data.get("codec_version")
    if not isinstance(version, str) or not version:
        problems.append("codec_version must be a non-empty string")
        version = ""
    default_rep = data.get("representative", "midpoint")
    if default_rep not in ("midpoint", "lower"):
        problems.append("representative must be 'midpoint' or 'lower'")
        default_rep = "midpoint"

    shape_catalog = data.get("shape_catalog")
    if not isinstance(shape_catalog, list) or len(shape_catalog) != 20:
        got = len(shape_catalog) if isinstance(shape_catalog, list) else shape_catalog
        problems.append(f"shape_catalog must list exactly 20 shapes, got {got!r}")
        shape_catalog = []
    press_catalog = data.get("press_catalog")
    if not isinstance(press_catalog, list) or len(press_catalog) != 3:
        problems.append("press_catalog must list exactly 3 press capacities")
        press_catalog = []

    def load_table(key: str, required: dict, total: int) -> list[Segment]:
        raws = data.get(key)
        if not isinstance(raws, list) or not raws:
            problems.append(f"{key} must be a non-empty list")
            return []
        segs = []
        for raw in raws:
            if not isinstance(raw, dict):
                problems.append(f"{key}: segment entries must be objects")
                continue
            if "representative" not in raw:
                raw = {**raw, "representative": default_rep}
            seg = _parse_segment(raw, key, problems)
            if seg is not None:
                segs.append(seg)
        if segs:
            _check_layout(segs, key, total, problems)
            _check_roles(segs, required, key, problems)
        return segs

    input_segments = load_table("input_segments", _REQUIRED_INPUT, INPUT_WIDTH)
    output_segments = load_table("output_segments", _REQUIRED_OUTPUT, OUTPUT_WIDTH)

    by_name = {s.name: s for s in input_segments}
    shape = by_name.get("shape")
    if shape is not None and shape_catalog and shape.size != len(shape_catalog):
        problems.append(
            f"input_segments segment 'shape': {shape.size} nodes but shape_catalog "
            f"has {len(shape_catalog)} entries"
        )
    press = by_name.get("press")
    if press is not None and press_catalog and press.size != len(press_catalog):
        problems.append(
            "input_segments segment 'press': size must match press_catalog length"
        )

    for key in ("die_stack", "estimator", "cli_defaults"):
        if not isinstance(data.get(key, {}), dict):
            problems.append(f"{key} must be an object")

    if problems:
        raise ConfigError("invalid encoding config:\n  " + "\n  ".join(problems))
    return EncodingConfig(
        codec_version=version,
        input_segments=tuple(input_segments),
        output_segments=tuple(output_segments),
        shape_catalog=tuple(shape_catalog),
        press_catalog=tuple(press_catalog),
        die_stack=data.get("die_stack", {}),
        estimator=data.get("estimator", {}),
        cli_defaults=data.get("cli_defaults", {}),
    )


def load_config(path: str | None = None) -> EncodingConfig:
    """Load and validate a config file; None loads the packaged default."""
    if path is None:
        text = resources.files("extruplan.data").joinpath("config.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)


def _set_bin(vec: np.ndarray, seg: Segment, value: float):
    try:
        index = bin_lookup(value, seg.edges)
    except BinOutOfRange:
        raise BinOutOfRange(seg.name, value) from None
    vec[seg.start - 1 + index] = 1


def encode_profile(spec: ProfileSpec, cfg: EncodingConfig) -> np.ndarray:
    """Encode a profile into the 170-node input vector.

    Optional attributes that are absent (ccd, press capacity, extrusion
    ratio, and external perimeter when 0) leave their whole segment zero;
    every other segment gets exactly one active node.
    """
    vec = np.zeros(INPUT_WIDTH, dtype=np.int64)
    seg = cfg.input_segment("profile_type")
    vec[seg.start - 1 + _PROFILE_TYPE_ORDER.index(spec.profile_type)] = 1

    seg = cfg.input_segment("shape")
    if not 0 <= spec.shape_class < len(cfg.shape_catalog):
        raise UnknownShape(spec.shape_class, len(cfg.shape_catalog))
    vec[seg.start - 1 + spec.shape_class] = 1

    _set_bin(vec, cfg.input_segment("thickness"), spec.wall_thickness)
    _set_bin(vec, cfg.input_segment("width"), spec.width)
    _set_bin(vec, cfg.input_segment("height"), spec.height)
    if spec.ccd is not None:
        _set_bin(vec, cfg.input_segment("ccd"), spec.ccd)
    _set_bin(vec, cfg.input_segment("area"), spec.cross_section_area)
    if spec.press_capacity is not None:
        seg = cfg.input_segment("press")
        vec[seg.start - 1 + cfg.press_catalog.index(spec.press_capacity.value)] = 1
    if spec.extrusion_ratio is not None:
        _set_bin(vec, cfg.input_segment("extrusion_ratio"), spec.extrusion_ratio)
    _set_bin(vec, cfg.input_segment("perimeter"), spec.perimeter)
    if spec.external_perimeter > 0:
        _set_bin(vec, cfg.input_segment("external_perimeter"), spec.external_perimeter)
    _set_bin(vec, cfg.input_segment("tongue_ratio"), spec.tongue_ratio)
    return vec


def encode_design(design: DieDesign, cfg: EncodingConfig) -> np.ndarray:
    """Encode a die design into the 93-node output vector.

    Thickness, feature-group and route nodes are populated exactly for
    the parts present in the design; segments of absent parts stay zero.
    """
    vec = np.zeros(OUTPUT_WIDTH, dtype=np.int64)
    seg = cfg.output_segment("die_type")
    vec[seg.start - 1 + _DIE_TYPE_ORDER.index(design.die_type)] = 1

    seg = cfg.output_segment("num_orifices")
    if not 1 <= design.num_orifices <= seg.size:
        raise BinOutOfRange("num_orifices", design.num_orifices)
    vec[seg.start - 1 + design.num_orifices - 1] = 1

    _set_bin(vec, cfg.output_segment("extrusion_ratio"), design.extrusion_ratio)

    present = {p.kind for p in design.parts}
    for kind, seg_name in PART_THICKNESS_SEGMENTS:
        if kind in present:
            _set_bin(vec, cfg.output_segment(seg_name), design.part(kind).thickness)
    for seg_name in ("feature_groups", "process_routes"):
        seg = cfg.output_segment(seg_name)
        for i, kind in enumerate(FLAG_PART_ORDER):
            if kind in present:
                vec[seg.start - 1 + i] = 1
    return vec


@dataclass(frozen=True)
class DesignSkeleton:
    """Decoded content of an output vector: the design minus features.

    Numeric fields are bin representatives; feature_parts and route_parts
    list the parts whose feature-group and route flags are set.
    """

    die_type: DieType
    num_orifices: int
    extrusion_ratio: float
    part_thickness: dict[DiePartKind, float]
    feature_parts: tuple[DiePartKind, ...]
    route_parts: tuple[DiePartKind, ...]


def _active(vec: np.ndarray, seg: Segment) -> list[int]:
    """0-based indexes of active nodes within the segment."""
    window = vec[seg.slice()]
    return [int(i) for i in np.nonzero(window)[0]]


def _check_length(vec: np.ndarray, expected: int):
    if vec.shape != (expected,):
        raise DimensionMismatch(expected, int(np.size(vec)), "output vector")


def decode_output(vec: np.ndarray, cfg: EncodingConfig) -> DesignSkeleton:
    """Decode an output vector into a design skeleton, strictly.

    Raises AmbiguousSegment when any required one-hot segment holds zero
    or multiple active nodes, and InconsistentParts when populated part
    segments contradict the decoded die type.
    """
    _check_length(vec, OUTPUT_WIDTH)
    seg = cfg.output_segment("die_type")
    active = _active(vec, seg)
    if len(active) != 1:
        raise AmbiguousSegment("die_type", len(active))
    die_type = _DIE_TYPE_ORDER[active[0]]
    parts = PARTS_BY_DIE_TYPE[die_type]

    seg = cfg.output_segment("num_orifices")
    active = _active(vec, seg)
    if len(active) != 1:
        raise AmbiguousSegment("num_orifices", len(active))
    num_orifices = active[0] + 1

    seg = cfg.output_segment("extrusion_ratio")
    active = _active(vec, seg)
    if len(active) != 1:
        raise AmbiguousSegment("extrusion_ratio", len(active))
    extrusion_ratio = seg.rep_value(active[0])

    part_thickness: dict[DiePartKind, float] = {}
    for kind, seg_name in PART_THICKNESS_SEGMENTS:
        seg = cfg.output_segment(seg_name)
        active = _active(vec, seg)
        if kind in parts:
            if len(active) != 1:
                raise AmbiguousSegment(seg_name, len(active))
            part_thickness[kind] = seg.rep_value(active[0])
        elif active:
            raise InconsistentParts(
                f"{seg_name} populated but {die_type.value} die has no {kind.value}"
            )

    flag_parts: dict[str, tuple[DiePartKind, ...]] = {}
    for seg_name in ("feature_groups", "process_routes"):
        seg = cfg.output_segment(seg_name)
        flagged = tuple(
            kind
            for i, kind in enumerate(FLAG_PART_ORDER)
            if vec[seg.start - 1 + i]
        )
        if set(flagged) != set(parts):
            raise InconsistentParts(
                f"{seg_name} flags {sorted(k.value for k in flagged)} do not match "
                f"{die_type.value} die parts {sorted(k.value for k in parts)}"
            )
        flag_parts[seg_name] = flagged

    return DesignSkeleton(
        die_type=die_type,
        num_orifices=num_orifices,
        extrusion_ratio=extrusion_ratio,
        part_thickness=part_thickness,
        feature_parts=flag_parts["feature_groups"],
        route_parts=flag_parts["process_routes"],
    )


def output_diagnostics(vec: np.ndarray, cfg: EncodingConfig) -> list[PlannerError]:
    """List every violated output-vector invariant without raising.

    Checks the invariants of the vector type itself: die-type one-hot and
    the part-dependent segments. When the die type is undecidable the
    part checks cannot run and only that violation is reported.
    """
    _check_length(vec, OUTPUT_WIDTH)
    problems: list[PlannerError] = []
    seg = cfg.output_segment("die_type")
    active = _active(vec, seg)
    if len(active) != 1:
        return [AmbiguousSegment("die_type", len(active))]
    die_type = _DIE_TYPE_ORDER[active[0]]
    parts = PARTS_BY_DIE_TYPE[die_type]

    for kind, seg_name in PART_THICKNESS_SEGMENTS:
        seg = cfg.output_segment(seg_name)
        active = _active(vec, seg)
        if kind in parts and len(active) != 1:
            problems.append(AmbiguousSegment(seg_name, len(active)))
        elif kind not in parts and active:
            problems.append(
                InconsistentParts(
                    f"{seg_name} populated but {die_type.value} die has no {kind.value}"
                )
            )
    for seg_name in ("feature_groups", "process_routes"):
        seg = cfg.output_segment(seg_name)
        flagged = {
            kind for i, kind in enumerate(FLAG_PART_ORDER) if vec[seg.start - 1 + i]
        }
        if flagged != set(parts):
            problems.append(
                InconsistentParts(
                    f"{seg_name} flags {sorted(k.value for k in flagged)} do not "
                    f"match {die_type.value} die parts {sorted(k.value for k in parts)}"
                )
            )
    return problems


def active_columns(vec: np.ndarray) -> list[int]:
    """1-based columns of the active nodes, for reports and tests."""
    return [int(i) + 1 for i in np.nonzero(vec)[0]]


def vector_to_json(vec: np.ndarray) -> list[int]:
    return [int(v) for v in vec]


def vector_from_json(data: list, expected: int) -> np.ndarray:
    if not isinstance(data, list) or len(data) != expected:
        raise DimensionMismatch(expected, len(data) if isinstance(data, list) else 0)
    if any(v not in (0, 1) for v in data):
        raise ValueError("vector entries must be 0 or 1")
    return np.asarray(data, dtype=np.int64)
