"""Machining time and cost estimation.

Times come from material-removal-rate formulas: turning and facing are
computed in imperial units (diameter, depth of cut, feed per rev,
spindle rpm), milling and grinding in metric, EDM from empirical
removal rates. The estimator converts per-feature removal volumes into
minutes via the configured rate for each operation's process, then
prices minutes plus a per-operation setup allowance at hourly shop
rates.
"""
from extruplan.codec import load_config
from extruplan.domain import DieFeature, FeatureGeometry, FeatureKind, Process
from extruplan.estimator import (
    EstimatorParams,
    Quantity,
    estimate_plan,
    machining_time,
    mrr_milling,
    mrr_turning,
    spindle_speed,
    to_cubic_millimetres,
    wire_edm_linear_speed,
)
from extruplan.knowledge import DieStack, construct_design, derive_plan, load_kb
from extruplan.library import reference_case

cfg = load_config()
kb = load_kb()
stack = DieStack.from_config(cfg)
params = EstimatorParams.from_config(cfg.estimator)

# The primitive formulas, at the numbers used throughout the test
# suite. Turning works on a 4-inch bar at 500 rpm; wire cutting quotes
# an area rate over the workpiece thickness.
print("turning MRR (D=4, d=0.1, f=0.01, N=500):", mrr_turning(4, 0.1, 0.01, 500), "in3/min")
print("spindle speed for V=100 sfm on D=4:", spindle_speed(100, 4), "rpm")
print("milling MRR (w=10, d=2, v=50):", mrr_milling(10, 2, 50), "mm3/min")
print("wire speed (18000 mm2/hr over 50 mm):", wire_edm_linear_speed(18000, 50), "mm/min")

# Rates are unit-tagged quantities; time computation refuses to mix
# unit systems silently.
volume = to_cubic_millimetres(Quantity(0.5, "in3"))
rate = params.process_mrr(Process.MILLING)
print(f"\n0.5 in3 = {volume.value:.0f} mm3; at {rate.value:.0f} {rate.unit}:",
      f"{machining_time(volume, rate):.2f} min")

# A single feature with an explicit removal volume.
pocket = DieFeature(
    kind=FeatureKind.CLOSED_POCKET_PLANE,
    attributes=FeatureGeometry(removal_volume=12000.0),
)
print("\nper-process rates from the shipped parameter set:")
for process in Process:
    if process is Process.HEAT_TREATMENT:
        print(f"  {process.value:<15} fixed {params.heat_treatment_min:.0f} min cycle")
        continue
    q = params.process_mrr(process)
    print(f"  {process.value:<15} {q.value:>10.2f} {q.unit}")

# Price the full reference plan: construct the design, derive the
# machining plan, estimate every operation.
record = reference_case(kb, stack, cfg)
design = construct_design(record.profile, kb, stack, cfg)
priced = estimate_plan(derive_plan(design, kb), params)

print("\npriced plan for the hollow reference die:")
for part_plan in priced.parts:
    print(f"  {part_plan.part.value}:")
    for step in part_plan.steps:
        what = step.feature.kind.value if step.feature else "(whole part)"
        minutes = sum(op.estimated_time for op in step.operations)
        cost = sum(op.estimated_cost for op in step.operations)
        print(f"    {what:<26} {minutes:>8.1f} min {cost:>9.2f}")
print(f"  total: {priced.total_time:.1f} min, {priced.total_cost:.2f}")
