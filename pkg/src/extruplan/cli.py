"""Command-line interface for the die planning toolchain.

Subcommands cover the full workflow: encode a profile, generate a case
corpus, train and inspect retrieval models, predict raw network output,
produce priced plan documents, re-estimate existing plans, and score a
model against a library. All I/O is JSON on files or stdout. Exit codes:
0 success, 1 validation failure, 2 I/O or schema failure, 3 internal
invariant breach.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .codec import EncodingConfig, encode_profile, load_config, vector_to_json
from .domain import ProfileSpec, validate_profile
from .errors import (
    ConfigError,
    InternalError,
    InvalidProfile,
    PlannerError,
    SchemaMismatch,
    VersionMismatch,
)
from .estimator import EstimatorParams, estimate_plan
from .knowledge import KnowledgeBase, load_kb
from .library import (
    Library,
    build_dataset,
    generate_synthetic_cases,
    load_library,
    save_library,
)
from .network import (
    TrainConfig,
    forward,
    init_model,
    load_model,
    predict_binary,
    save_model,
    train,
)
from .pipeline import PlanDocument, evaluate, plan

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RESOURCE = 2
EXIT_INTERNAL = 3

CONFIG_ENV_VAR = "EXTRUPLAN_CONFIG"
CASES_FILENAME = "cases.json"


def _resolve_config(args) -> EncodingConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    return load_config(path)


def _resolve_kb(args) -> KnowledgeBase:
    return load_kb(getattr(args, "kb", None))


def _default(args, cfg: EncodingConfig, flag: str, key: str, fallback):
    """Flag value if given, else the config's cli_defaults, else fallback."""
    value = getattr(args, flag, None)
    if value is not None:
        return value
    return cfg.cli_defaults.get(key, fallback)


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_profile(path: str) -> ProfileSpec:
    data = _read_json(path)
    try:
        spec = ProfileSpec.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidProfile([f"unreadable profile: {exc}"]) from exc
    violations = validate_profile(spec)
    if violations:
        raise InvalidProfile(violations)
    return spec


def _print_json(doc):
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _cases_path(directory: str) -> str:
    return os.path.join(directory, CASES_FILENAME)


def _load_cases(args, cfg: EncodingConfig) -> Library:
    directory = getattr(args, "cases", None)
    if directory is None:
        return Library(cases=(), codec_version=cfg.codec_version, kb_fingerprint="")
    return load_library(_cases_path(directory), cfg)


def cmd_encode(args) -> int:
    cfg = _resolve_config(args)
    spec = _read_profile(args.profile)
    _print_json(vector_to_json(encode_profile(spec, cfg)))
    return EXIT_OK


def cmd_gen_cases(args) -> int:
    cfg = _resolve_config(args)
    kb = _resolve_kb(args)
    records = generate_synthetic_cases(args.n, args.seed, cfg, kb, jitter=args.jitter)
    lib = Library(
        cases=tuple(records),
        codec_version=cfg.codec_version,
        kb_fingerprint=kb.fingerprint,
    )
    os.makedirs(args.out, exist_ok=True)
    path = _cases_path(args.out)
    save_library(lib, path)
    print(f"wrote {len(records)} cases to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    lib = load_library(_cases_path(args.cases), cfg)
    dataset = build_dataset(lib, cfg)
    train_cfg = TrainConfig(
        learning_rate=_default(args, cfg, "lr", "lr", 0.1),
        momentum=_default(args, cfg, "momentum", "momentum", 0.7),
        hidden_size=_default(args, cfg, "hidden", "hidden", 5),
        epochs=_default(args, cfg, "epochs", "epochs", 500),
        seed=_default(args, cfg, "seed", "seed", 42),
    )
    model = init_model(dataset[0][0].size, dataset[0][1].size, train_cfg)
    model, history = train(model, dataset, train_cfg)
    save_model(model, args.model_out)
    if args.history_out:
        with open(args.history_out, "w", encoding="utf-8") as fh:
            fh.write("epoch,mse\n")
            for epoch, mse in enumerate(history):
                fh.write(f"{epoch},{mse!r}\n")
    print(
        f"trained {'x'.join(str(s) for s in model.layer_sizes)} model "
        f"for {train_cfg.epochs} epochs, final mse {history[-1]:.6f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _resolve_config(args)
    spec = _read_profile(args.profile)
    model = load_model(args.model)
    threshold = _default(args, cfg, "threshold", "threshold", 0.5)
    x = encode_profile(spec, cfg)
    raw = forward(model, x)
    binary = predict_binary(model, x, threshold)
    _print_json(
        {
            "raw": [float(v) for v in raw],
            "binary": vector_to_json(binary),
        }
    )
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = _resolve_config(args)
    kb = _resolve_kb(args)
    spec = _read_profile(args.profile)
    model = load_model(args.model) if args.model else None
    lib = _load_cases(args, cfg)
    threshold = _default(args, cfg, "threshold", "threshold", 0.5)
    document = plan(spec, model, kb, lib, cfg, threshold)
    _print_json(document.to_dict())
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _resolve_config(args)
    data = _read_json(args.plan)
    try:
        document = PlanDocument.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"unreadable plan document: {exc}") from exc
    section = cfg.estimator
    if args.cost_model:
        section = _read_json(args.cost_model)
    params = EstimatorParams.from_config(section)
    priced = estimate_plan(document.plan, params)
    updated = PlanDocument(
        profile=document.profile,
        design=document.design,
        plan=priced,
        provenance=document.provenance + ("re-estimated",),
        confidence=document.confidence,
        diagnostics=document.diagnostics,
    )
    _print_json(updated.to_dict())
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    kb = _resolve_kb(args)
    model = load_model(args.model)
    lib = load_library(_cases_path(args.cases), cfg)
    threshold = _default(args, cfg, "threshold", "threshold", 0.5)
    _print_json(evaluate(model, lib, cfg, kb, threshold))
    return EXIT_OK


def cmd_inspect_model(args) -> int:
    model = load_model(args.model)
    _print_json(
        {
            "layer_sizes": list(model.layer_sizes),
            "hidden_activation": model.hidden_activation,
            "output_activation": model.output_activation,
            "metadata": model.metadata,
        }
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extruplan",
        description="Process planning for aluminum extrusion dies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help=f"config file (default: ${CONFIG_ENV_VAR} or packaged)")

    p = sub.add_parser("encode", help="encode a profile into the input vector")
    p.add_argument("--profile", required=True, help="profile JSON file")
    add_config(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("gen-cases", help="generate a synthetic case corpus")
    p.add_argument("--n", type=int, required=True, help="number of cases")
    p.add_argument("--seed", type=int, required=True, help="generator seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jitter", action="store_true", help="draw attributes within bins")
    p.add_argument("--kb", help="knowledge base file")
    add_config(p)
    p.set_defaults(func=cmd_gen_cases)

    p = sub.add_parser("train", help="train a retrieval model on a corpus")
    p.add_argument("--cases", required=True, help="corpus directory")
    p.add_argument("--model-out", required=True, help="model output file")
    p.add_argument("--epochs", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--momentum", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--history-out", help="write per-epoch MSE as CSV")
    add_config(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="raw and thresholded network output")
    p.add_argument("--profile", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float)
    add_config(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("plan", help="produce a priced plan document")
    p.add_argument("--profile", required=True)
    p.add_argument("--model", help="trained model file (optional)")
    p.add_argument("--cases", help="corpus directory for fallback retrieval")
    p.add_argument("--kb", help="knowledge base file")
    p.add_argument("--threshold", type=float)
    add_config(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("estimate", help="re-price an existing plan document")
    p.add_argument("--plan", required=True, help="plan document JSON file")
    p.add_argument("--cost-model", help="estimator section override JSON")
    add_config(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("eval", help="score a model against a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--kb", help="knowledge base file")
    add_config(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect-model", help="show model dimensions and metadata")
    p.add_argument("model", help="model file")
    p.set_defaults(func=cmd_inspect_model)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaMismatch, VersionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (PlannerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
