"""The planning pipeline and its fallback ladder.

Given a profile, the planner tries three strategies in order:

  1. NnPrediction - encode the profile, run the trained network, decode
     its thresholded output into a design skeleton. Works only when the
     output is a clean segment-wise one-hot pattern.
  2. KnnFallback  - nearest stored case by Hamming distance over the
     input encoding; reuse that case's design.
  3. KbDirect     - construct the design from scratch with the rule
     base and die-stack tables. Always succeeds for a valid profile.

Whatever produced the design, the machining plan is then derived from
the knowledge base and priced. The provenance trail in the returned
document records exactly which strategies ran.
"""
from extruplan.codec import load_config
from extruplan.domain import ProfileSpec, ProfileType
from extruplan.knowledge import load_kb
from extruplan.library import Library, build_dataset, generate_synthetic_cases
from extruplan.network import TrainConfig, init_model, train
from extruplan.pipeline import plan

cfg = load_config()
kb = load_kb()

cases = generate_synthetic_cases(150, 42, cfg, kb)
library = Library(
    cases=tuple(cases),
    codec_version=cfg.codec_version,
    kb_fingerprint=kb.fingerprint,
)
tc = TrainConfig(learning_rate=0.1, momentum=0.7, hidden_size=32, epochs=600, seed=42)
dataset = build_dataset(library, cfg)
model = init_model(170, 93, tc)
model, _ = train(model, dataset, tc)

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


def show(label, doc):
    print(f"\n--- {label} ---")
    print("provenance:", " -> ".join(doc.provenance))
    for line in doc.diagnostics:
        print("note:", line)
    design = doc.design
    print(
        f"design: {design.die_type.value} die, {design.num_orifices} orifice(s), "
        f"extrusion ratio {design.extrusion_ratio}"
    )
    for part_plan in doc.plan.parts:
        print(f"  {part_plan.part.value}:")
        for step in part_plan.steps:
            what = step.feature.kind.value if step.feature else "(whole part)"
            ops = ", ".join(op.operation for op in step.operations)
            print(f"    {what:<26} {ops}")
    print(
        f"totals: {doc.plan.total_time:.1f} min, "
        f"{doc.plan.total_cost:.2f} (shop currency)"
    )


# Full stack available: the network answers directly.
show("trained network", plan(profile, model, kb, library, cfg))

# No model on hand: the library answers by nearest-neighbour retrieval.
show("case retrieval", plan(profile, None, kb, library, cfg))

# Nothing but the rule base: the design is constructed generatively.
empty = Library(cases=(), codec_version=cfg.codec_version, kb_fingerprint="")
show("rule base only", plan(profile, None, kb, empty, cfg))
