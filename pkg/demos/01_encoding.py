"""Feature encoding walk-through.

A profile is described by a dozen attributes (type, shape class, wall
thickness, envelope, section area, perimeters, tongue ratio, optionally
press and extrusion ratio). The codec turns that description into a
170-node binary vector: one segment per attribute, one active node per
known value. This script encodes two reference profiles and shows how
the segments light up, then encodes a die design into the 93-node
output vector and decodes it back.
"""
from extruplan.codec import (
    active_columns,
    decode_output,
    encode_design,
    encode_profile,
    load_config,
)
from extruplan.domain import ProfileSpec, ProfileType
from extruplan.knowledge import DieStack, construct_design, load_kb

cfg = load_config()
kb = load_kb()
stack = DieStack.from_config(cfg)

# The input layout: twelve contiguous segments covering columns 1..170.
print("input segments:")
for seg in cfg.input_segments:
    print(f"  {seg.name:<20} columns {seg.start:>3}..{seg.stop:>3}  ({seg.kind})")

# A solid rectangular bar. It has no press assignment and no extrusion
# ratio yet, so those segments stay dark; every known attribute
# activates exactly one node.
solid = ProfileSpec(
    profile_type=ProfileType.SOLID,
    shape_class=cfg.shape_catalog.index("rectangle"),
    wall_thickness=2.3,
    width=24.0,
    height=15.3,
    cross_section_area=1.7,
    perimeter=20.32,
    tongue_ratio=4.0,
    ccd=28.5,
)
vec = encode_profile(solid, cfg)
print("\nsolid bar -> active columns:", active_columns(vec))

# A hollow rectangular tube. Hollow profiles carry an external
# perimeter but no circumscribing-circle diameter here, so a different
# set of segments is active.
hollow = ProfileSpec(
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
vec = encode_profile(hollow, cfg)
print("hollow tube -> active columns:", active_columns(vec))

for seg in cfg.input_segments:
    bits = vec[seg.slice()]
    state = "-" if bits.sum() == 0 else f"node {int(bits.argmax()) + 1} of {seg.size}"
    print(f"  {seg.name:<20} {state}")

# The output side works the same way: die type, orifice count, the
# extrusion ratio bin, one thickness segment per die part, and two
# five-flag blocks saying which parts exist.
design = construct_design(hollow, kb, stack, cfg)
out = encode_design(design, cfg)
print("\nhollow design -> active output columns:", active_columns(out))

# Decoding recovers the design skeleton; numeric fields come back as
# bin representatives, which is all the retrieval network ever sees.
skeleton = decode_output(out, cfg)
print("decoded:", skeleton.die_type.value, "die,", skeleton.num_orifices, "orifice,")
for kind, thickness in skeleton.part_thickness.items():
    print(f"  {kind.value:<10} {thickness} mm")
