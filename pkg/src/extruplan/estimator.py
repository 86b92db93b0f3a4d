"""Material removal rates, machining times and cost annotation.

The removal-rate formulas keep the unit conventions of the shop handbook
they come from: turning works in inches (diameters and feeds in inches,
rates in in3/min), milling and grinding in millimetres. Every quantity
that crosses the module boundary carries an explicit unit tag and the
in3/mm3 conversion is a named utility, so a mismatch raises instead of
silently producing garbage hours.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .domain import (
    DieFeature,
    FeatureKind,
    MachiningOperation,
    PartPlan,
    PlanStep,
    Process,
    ProcessPlan,
)
from .errors import ConfigError, MissingParams, NonPositiveInput, UnitMismatch

MM3_PER_IN3 = 25.4 ** 3  # 16387.064

SPARK_RATE_RANGE = (2.0, 400.0)  # mm3/min, usable spark-erosion window


def _require_positive(**values: float):
    for name, value in values.items():
        if value <= 0:
            raise NonPositiveInput(name, value)


def mrr_turning(D: float, d: float, f: float, N: float) -> float:
    """Removal rate in turning: pi * D * d * f * N (in3/min).

    D is the outer (or average) workpiece diameter in inches, d depth of
    cut in inches, f feed in inches per revolution, N spindle rpm."""
    _require_positive(D=D, d=d, f=f, N=N)
    return math.pi * D * d * f * N


def spindle_speed(V: float, D: float) -> float:
    """Spindle speed from cutting speed: 12 * V / (pi * D) rpm, with V in
    feet per minute and D in inches."""
    _require_positive(V=V, D=D)
    return 12.0 * V / (math.pi * D)


def mrr_turning_v(d: float, f: float, V: float) -> float:
    """Turning removal rate expressed via cutting speed: 12 * d * f * V
    (in3/min). Equals mrr_turning with the spindle speed substituted."""
    _require_positive(d=d, f=f, V=V)
    return 12.0 * d * f * V


def mrr_straight_turning(D_o: float, D_f: float, f: float, N: float) -> float:
    """Straight-turning removal rate from outer and final diameters:
    pi * (D_o^2 - D_f^2) / 4 * f * N (in3/min)."""
    _require_positive(D_o=D_o, D_f=D_f, f=f, N=N)
    if D_o <= D_f:
        raise NonPositiveInput("D_o - D_f", D_o - D_f)
    return math.pi * (D_o ** 2 - D_f ** 2) / 4.0 * f * N


def milling_cutting_speed(D: float, N: float) -> float:
    """Milling cutting speed as the handbook prints it: pi * D * N.

    With D in mm and N in rpm this is mm/min, despite the handbook
    labelling it m/min; use milling_cutting_speed_m_per_min for the
    dimensionally consistent variant."""
    _require_positive(D=D, N=N)
    return math.pi * D * N


def milling_cutting_speed_m_per_min(D: float, N: float) -> float:
    """Milling cutting speed in m/min: pi * D * N / 1000 for D in mm."""
    return milling_cutting_speed(D, N) / 1000.0


def feed_per_tooth(v: float, N: float, n: int) -> float:
    """Feed per tooth: v / (N * n) mm, from table feed v (mm/min),
    cutter speed N (rpm) and tooth count n."""
    _require_positive(v=v, N=N, n=n)
    return v / (N * n)


def mrr_milling(w: float, d: float, v: float) -> float:
    """Removal rate in milling: w * d * v (mm3/min) from width and depth
    of cut (mm) and feed rate (mm/min)."""
    _require_positive(w=w, d=d, v=v)
    return w * d * v


def mrr_grinding(d: float, w: float, v: float) -> float:
    """Removal rate in grinding: d * w * v (mm3/min) from depth of cut,
    wheel width (mm) and feed rate (mm/min)."""
    _require_positive(d=d, w=w, v=v)
    return d * w * v


def wire_edm_linear_speed(area_rate: float, thickness: float) -> float:
    """Linear wire-cutting speed in mm/min from the area rate (mm2/hr)
    and workpiece thickness (mm): area_rate / thickness / 60."""
    _require_positive(area_rate=area_rate, thickness=thickness)
    return area_rate / thickness / 60.0


@dataclass(frozen=True)
class Quantity:
    """A number with its unit tag; arithmetic across tags is refused."""

    value: float
    unit: str


_VOLUME_SYSTEM = {"mm3": "metric", "in3": "imperial"}
_RATE_SYSTEM = {"mm3/min": "metric", "in3/min": "imperial"}


def to_cubic_inches(volume: Quantity) -> Quantity:
    if volume.unit == "in3":
        return volume
    if volume.unit == "mm3":
        return Quantity(volume.value / MM3_PER_IN3, "in3")
    raise UnitMismatch(volume.unit, "mm3 or in3")


def to_cubic_millimetres(volume: Quantity) -> Quantity:
    if volume.unit == "mm3":
        return volume
    if volume.unit == "in3":
        return Quantity(volume.value * MM3_PER_IN3, "mm3")
    raise UnitMismatch(volume.unit, "mm3 or in3")


def machining_time(volume: Quantity, mrr: Quantity) -> float:
    """Minutes to remove `volume` at rate `mrr`; unit systems must agree."""
    vol_system = _VOLUME_SYSTEM.get(volume.unit)
    rate_system = _RATE_SYSTEM.get(mrr.unit)
    if vol_system is None or rate_system is None or vol_system != rate_system:
        raise UnitMismatch(volume.unit, mrr.unit)
    _require_positive(volume=volume.value, mrr=mrr.value)
    return volume.value / mrr.value


@dataclass(frozen=True)
class CostModel:
    """Hourly rates and fixed per-operation setup times, per process."""

    hourly_rate: dict[Process, float]
    setup_min: dict[Process, float]

    def operation_cost(self, process: Process, minutes: float) -> float:
        return (minutes + self.setup_min[process]) / 60.0 * self.hourly_rate[process]


def _checked_quantity(raw: dict, where: str, expected_unit: str, problems: list[str]) -> float:
    if not isinstance(raw, dict):
        problems.append(f"{where}: expected {{value, unit}}, got {raw!r}")
        return 1.0
    unit = raw.get("unit")
    if unit != expected_unit:
        problems.append(f"{where}: expected unit {expected_unit!r}, got {unit!r}")
    value = raw.get("value")
    if not isinstance(value, (int, float)) or value <= 0:
        problems.append(f"{where}: value must be > 0, got {value!r}")
        return 1.0
    return float(value)


#: Expected parameter names and units for each process's config block.
_PARAM_UNITS: dict[Process, dict[str, str]] = {
    Process.TURNING: {"D": "in", "d": "in", "f": "in/rev", "N": "rpm"},
    Process.FACING: {"D": "in", "d": "in", "f": "in/rev", "N": "rpm"},
    Process.DRILLING: {"rate": "mm3/min"},
    Process.MILLING: {"w": "mm", "d": "mm", "v": "mm/min"},
    Process.GRINDING: {"d": "mm", "w": "mm", "v": "mm/min"},
    Process.EDM_SPARK: {"rate": "mm3/min"},
    Process.EDM_WIRE: {"area_rate": "mm2/hr", "thickness": "mm", "kerf": "mm"},
}


@dataclass(frozen=True)
class EstimatorParams:
    """Validated estimator section of the config file."""

    process_params: dict[Process, dict[str, float]]
    feature_volumes_mm3: dict[FeatureKind, float]
    heat_treatment_min: float
    grinding_stock_mm3: float
    cost_model: CostModel

    @classmethod
    def from_config(cls, section: dict) -> "EstimatorParams":
        problems: list[str] = []
        if not isinstance(section, dict):
            raise ConfigError("estimator section must be an object")

        rates: dict[Process, float] = {}
        setups: dict[Process, float] = {}
        for name, target, label in (
            ("hourly_rates", rates, "hourly rate"),
            ("setup_time_min", setups, "setup time"),
        ):
            raw = section.get(name, {})
            for process in Process:
                value = raw.get(process.value) if isinstance(raw, dict) else None
                if not isinstance(value, (int, float)) or value < 0:
                    problems.append(
                        f"estimator.{name}.{process.value}: {label} must be >= 0"
                    )
                else:
                    target[process] = float(value)

        params: dict[Process, dict[str, float]] = {}
        raw_params = section.get("process_params", {})
        for process, units in _PARAM_UNITS.items():
            block = raw_params.get(process.value) if isinstance(raw_params, dict) else None
            if not isinstance(block, dict):
                problems.append(f"estimator.process_params.{process.value} missing")
                continue
            params[process] = {}
            for pname, unit in units.items():
                params[process][pname] = _checked_quantity(
                    block.get(pname),
                    f"estimator.process_params.{process.value}.{pname}",
                    unit,
                    problems,
                )
        spark = params.get(Process.EDM_SPARK, {}).get("rate")
        if spark is not None and not SPARK_RATE_RANGE[0] <= spark <= SPARK_RATE_RANGE[1]:
            problems.append(
                f"estimator.process_params.edm_spark.rate: {spark} outside the "
                f"usable range {list(SPARK_RATE_RANGE)} mm3/min"
            )

        volumes: dict[FeatureKind, float] = {}
        raw_volumes = section.get("feature_volumes_mm3", {})
        if not isinstance(raw_volumes, dict):
            problems.append("estimator.feature_volumes_mm3 must be an object")
            raw_volumes = {}
        for key, value in raw_volumes.items():
            try:
                kind = FeatureKind(key)
            except ValueError:
                problems.append(f"estimator.feature_volumes_mm3: unknown feature {key!r}")
                continue
            if not isinstance(value, (int, float)) or value <= 0:
                problems.append(f"estimator.feature_volumes_mm3.{key}: must be > 0")
                continue
            volumes[kind] = float(value)

        ht = _checked_quantity(
            section.get("heat_treatment_duration"),
            "estimator.heat_treatment_duration",
            "min",
            problems,
        )
        stock = _checked_quantity(
            section.get("grinding_stock"),
            "estimator.grinding_stock",
            "mm3",
            problems,
        )
        if problems:
            raise ConfigError("invalid estimator config:\n  " + "\n  ".join(problems))
        return cls(
            process_params=params,
            feature_volumes_mm3=volumes,
            heat_treatment_min=ht,
            grinding_stock_mm3=stock,
            cost_model=CostModel(hourly_rate=rates, setup_min=setups),
        )

    def process_mrr(self, process: Process) -> Quantity:
        """Removal rate for one process under the configured parameters."""
        p = self.process_params[process]
        if process in (Process.TURNING, Process.FACING):
            return Quantity(mrr_turning(p["D"], p["d"], p["f"], p["N"]), "in3/min")
        if process == Process.MILLING:
            return Quantity(mrr_milling(p["w"], p["d"], p["v"]), "mm3/min")
        if process == Process.GRINDING:
            return Quantity(mrr_grinding(p["d"], p["w"], p["v"]), "mm3/min")
        if process == Process.DRILLING:
            return Quantity(p["rate"], "mm3/min")
        if process == Process.EDM_SPARK:
            rate = p["rate"]
            if not SPARK_RATE_RANGE[0] <= rate <= SPARK_RATE_RANGE[1]:
                raise ConfigError(
                    f"spark erosion rate {rate} mm3/min outside {list(SPARK_RATE_RANGE)}"
                )
            return Quantity(rate, "mm3/min")
        if process == Process.EDM_WIRE:
            linear = wire_edm_linear_speed(p["area_rate"], p["thickness"])
            return Quantity(linear * p["thickness"] * p["kerf"], "mm3/min")
        raise MissingParams(process.value, "no removal-rate model for this process")


def _step_volume_mm3(step: PlanStep, params: EstimatorParams) -> float:
    feature: DieFeature | None = step.feature
    if feature is None:
        # part-level step: grinding stock; heat treatment never gets here
        return params.grinding_stock_mm3
    if feature.attributes.removal_volume is not None:
        return feature.attributes.removal_volume
    volume = params.feature_volumes_mm3.get(feature.kind)
    if volume is None:
        raise MissingParams(
            step.operations[0].operation,
            f"no removal volume configured for feature {feature.kind.value!r}",
        )
    return volume


def estimate_operation(
    op: MachiningOperation, volume_mm3: float, params: EstimatorParams
) -> MachiningOperation:
    """Annotate one operation with time (minutes) and cost."""
    if op.process == Process.HEAT_TREATMENT:
        minutes = params.heat_treatment_min
    else:
        mrr = params.process_mrr(op.process)
        volume = Quantity(volume_mm3, "mm3")
        if mrr.unit == "in3/min":
            volume = to_cubic_inches(volume)
        minutes = machining_time(volume, mrr)
    cost = params.cost_model.operation_cost(op.process, minutes)
    return MachiningOperation(
        process=op.process,
        operation=op.operation,
        estimated_time=minutes,
        estimated_cost=cost,
    )


def estimate_plan(plan: ProcessPlan, params: EstimatorParams) -> ProcessPlan:
    """Annotate every operation of a plan with time and cost.

    A feature's removal volume (from its attributes, or the per-feature
    config default) is split evenly across the operations of its block;
    part-level grinding uses the configured stock allowance and heat
    treatment a fixed duration. Totals accumulate in minutes and cost.
    """
    annotated_parts = []
    total_time = 0.0
    total_cost = 0.0
    for part_plan in plan.parts:
        steps = []
        for step in part_plan.steps:
            if step.operations and step.operations[0].process == Process.HEAT_TREATMENT:
                share = 0.0  # fixed-duration step, volume unused
            else:
                share = _step_volume_mm3(step, params) / len(step.operations)
            ops = []
            for op in step.operations:
                annotated = estimate_operation(op, share, params)
                total_time += annotated.estimated_time
                total_cost += annotated.estimated_cost
                ops.append(annotated)
            steps.append(PlanStep(feature=step.feature, operations=tuple(ops)))
        annotated_parts.append(PartPlan(part=part_plan.part, steps=tuple(steps)))
    return ProcessPlan(
        parts=tuple(annotated_parts), total_time=total_time, total_cost=total_cost
    )
