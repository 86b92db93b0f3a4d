"""Training the retrieval network.

The planner's memory is a one-hidden-layer sigmoid network mapping the
170-node profile encoding to the 93-node design encoding. Training is
plain stochastic backpropagation in pattern mode with a momentum term,
nothing exotic: the point is that a small net memorizes a case library
well enough to act as an associative index into it.

This script builds a deterministic synthetic corpus, trains two nets
(the small one from the original recipe and a wider one), and writes
the learning curves side by side.
"""
import csv
import tempfile
from pathlib import Path

from extruplan.codec import load_config
from extruplan.knowledge import load_kb
from extruplan.library import Library, build_dataset, generate_synthetic_cases
from extruplan.network import TrainConfig, init_model, train
from extruplan.pipeline import evaluate

cfg = load_config()
kb = load_kb()

# 150 cases, seeded: rerunning this script reproduces the same corpus
# byte for byte. The curated industrial case is always injected first.
cases = generate_synthetic_cases(150, 42, cfg, kb)
library = Library(
    cases=tuple(cases),
    codec_version=cfg.codec_version,
    kb_fingerprint=kb.fingerprint,
)
dataset = build_dataset(library, cfg)
print(f"corpus: {len(dataset)} cases, {dataset[0][0].size} -> {dataset[0][1].size} bits")

histories = {}
models = {}
for hidden, epochs in ((5, 2000), (32, 600)):
    tc = TrainConfig(
        learning_rate=0.1, momentum=0.7, hidden_size=hidden, epochs=epochs, seed=42
    )
    model = init_model(dataset[0][0].size, dataset[0][1].size, tc)
    model, history = train(model, dataset, tc)
    histories[hidden] = history
    models[hidden] = model
    print(
        f"hidden={hidden:>2}: mse {history[0]:.4f} -> {history[-1]:.6f} "
        f"over {epochs} epochs"
    )

# Learning curves as CSV, one row per epoch (blank where a run is over).
out_dir = Path(tempfile.mkdtemp(prefix="extruplan-demo-"))
curve_path = out_dir / "learning_curves.csv"
with open(curve_path, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["epoch", "mse_hidden5", "mse_hidden32"])
    for epoch in range(max(len(h) for h in histories.values())):
        writer.writerow(
            [epoch]
            + [
                histories[h][epoch] if epoch < len(histories[h]) else ""
                for h in (5, 32)
            ]
        )
print(f"\nlearning curves written to {curve_path}")

# How good is the wider net as an index? Score it against the library
# it was trained on: bit accuracy, exact-vector rate, and whether the
# plan you get from its predictions matches the rule-engine plan.
metrics = evaluate(models[32], library, cfg, kb)
print("\nwide net on its training corpus:")
for key in (
    "bit_accuracy",
    "exact_match_rate",
    "die_type_accuracy",
    "plan_agreement_rate",
):
    print(f"  {key:<20} {metrics[key]:.4f}")
