"""Command-line interface for data preparation, training, evaluation, and sampling.

Every command that writes files also writes a manifest recording the
command, its flags, the master seed, SHA-256 digests of its inputs, and
the artifact names, so a run can be reproduced bit-for-bit.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric/degeneracy
error.
"""

import argparse
import hashlib
import json
import re
import sys
from pathlib import Path

from . import __version__
from .classify import Classifier, evaluate, split_indices, train_classifier
from .learning import TrainConfig
from .model import (
    EFF,
    STANDARD,
    DataFormatError,
    DegeneracyError,
    LabeledDataset,
    load_model,
    model_from_dict,
    save_model,
    validate,
)
from .pipelines import (
    IRIS_ATTRIBUTES,
    bounding_box_ratio,
    fit_bins,
    iris_trend_sequence,
    ratio_trend_sequence,
    read_iris_csv,
    read_ratio_csv,
    read_sequence_file,
    read_track_csv,
    sample_sequence,
    write_sequence_file,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DEGENERATE = 3

_SAFE_LABEL = re.compile(r"^[A-Za-z0-9_.-]+$")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this CLI reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(path: Path, command: str, flags: dict, seed: int | None,
                    inputs: list, artifacts: list) -> None:
    doc = {
        "command": command,
        "flags": flags,
        "seed": seed,
        "inputs": {str(p): _digest(p) for p in inputs},
        "artifacts": sorted(str(a) for a in artifacts),
        "version": __version__,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _cmd_iris_prep(args) -> int:
    records = read_iris_csv(args.input)
    if args.train_only_bins:
        train_idx, _ = split_indices(
            [r.species for r in records], args.train_per_class, args.seed
        )
        fit_records = [records[i] for i in train_idx]
    else:
        fit_records = records
    spec = fit_bins(fit_records)
    sequences = [(r.species, iris_trend_sequence(r, spec)) for r in records]
    output = Path(args.output)
    write_sequence_file(output, sequences)
    for attr in IRIS_ATTRIBUTES:
        print(
            f"{attr}: range [{spec.lower[attr]:.12g}, {spec.upper[attr]:.12g}], "
            f"bin width {spec.width(attr):.12g}"
        )
    print(f"wrote {len(sequences)} sequences to {output}")
    _write_manifest(
        output.with_name(output.name + ".manifest.json"),
        command="iris-prep",
        flags={
            "input": args.input,
            "output": args.output,
            "train_only_bins": bool(args.train_only_bins),
            "train_per_class": args.train_per_class,
        },
        seed=args.seed,
        inputs=[args.input],
        artifacts=[output.name],
    )
    return EXIT_OK


def _cmd_track_prep(args) -> int:
    if args.mode == "points":
        tracked = read_track_csv(args.input)
        per_activity = []
        for label, frames in tracked:
            try:
                per_activity.append((label, [bounding_box_ratio(f) for f in frames]))
            except DegeneracyError as exc:
                raise DegeneracyError(f"activity {label!r}: {exc}") from exc
    else:
        per_activity = read_ratio_csv(args.input)
    sequences = []
    for label, ratios in per_activity:
        try:
            sequences.append((label, ratio_trend_sequence(ratios)))
        except DegeneracyError as exc:
            raise DegeneracyError(f"activity {label!r}: {exc}") from exc
    output = Path(args.output)
    write_sequence_file(output, sequences)
    print(f"wrote {len(sequences)} sequences to {output}")
    _write_manifest(
        output.with_name(output.name + ".manifest.json"),
        command="track-prep",
        flags={"input": args.input, "mode": args.mode, "output": args.output},
        seed=None,
        inputs=[args.input],
        artifacts=[output.name],
    )
    return EXIT_OK


def _cmd_train(args) -> int:
    dataset = read_sequence_file(args.data)
    labels = [label for _, label in dataset.items]
    if len(set(labels)) < 2:
        raise DataFormatError("training needs at least two classes")
    for label in sorted(set(labels)):
        if not _SAFE_LABEL.match(label):
            raise DataFormatError(
                f"label {label!r} is not filename-safe (allowed: letters, digits, _ . -)"
            )
    train_idx, test_idx = split_indices(labels, args.train_per_class, args.seed)
    train_set = LabeledDataset(
        items=tuple(dataset.items[i] for i in train_idx), n_symbols=dataset.n_symbols
    )
    config = TrainConfig(
        n_states=args.states,
        convergence_threshold=args.threshold,
        max_iterations=args.max_iters,
        smoothing_floor=args.epsilon,
        seed=args.seed,
        variant=args.variant,
    )
    classifier = train_classifier(train_set, config)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []
    for label in classifier.labels:
        model_path = out / f"model_{label}.json"
        save_model(classifier.models[label], model_path)
        artifacts.append(model_path.name)
        report = classifier.train_reports[label]
        status = "converged" if report.converged else "hit max iterations"
        print(f"{label}: {report.iterations_run} iterations ({status}), "
              f"final mean log-likelihood {report.log_likelihood_history[-1]:.6f}")

    by_label_train = {lab: [] for lab in classifier.labels}
    by_label_test = {lab: [] for lab in classifier.labels}
    for i in train_idx:
        by_label_train[labels[i]].append(i)
    for i in test_idx:
        by_label_test[labels[i]].append(i)
    split_doc = {
        "data_digest": _digest(args.data),
        "seed": args.seed,
        "train_per_class": args.train_per_class,
        "train": by_label_train,
        "test": by_label_test,
    }
    split_path = out / "split.json"
    split_path.write_text(json.dumps(split_doc, indent=2, sort_keys=True) + "\n")
    artifacts.append(split_path.name)
    print(f"split: {len(train_idx)} train / {len(test_idx)} test")

    from .figures import save_training_curves

    curves_path = out / "training_curves.png"
    save_training_curves(
        {lab: classifier.train_reports[lab].log_likelihood_history for lab in classifier.labels},
        curves_path,
    )
    artifacts.append(curves_path.name)

    _write_manifest(
        out / "manifest.json",
        command="train",
        flags={
            "data": args.data,
            "variant": args.variant,
            "states": args.states,
            "threshold": args.threshold,
            "max_iters": args.max_iters,
            "epsilon": args.epsilon,
            "train_per_class": args.train_per_class,
            "out": args.out,
        },
        seed=args.seed,
        inputs=[args.data],
        artifacts=artifacts,
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    models_dir = Path(args.models)
    model_paths = sorted(models_dir.glob("model_*.json"))
    if len(model_paths) < 2:
        raise DataFormatError(f"{models_dir} holds {len(model_paths)} model files; need at least 2")
    models = {p.stem[len("model_"):]: load_model(p) for p in model_paths}
    classifier = Classifier(models=models)

    try:
        split_doc = json.loads(Path(args.split).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{args.split}: invalid JSON: {exc.msg}") from exc
    if not isinstance(split_doc, dict) or "test" not in split_doc:
        raise DataFormatError(f'{args.split} is not a split file (no "test" section)')
    if split_doc.get("data_digest") != _digest(args.data):
        raise DataFormatError(
            f"split file {args.split} was made for different data (digest mismatch)"
        )
    dataset = read_sequence_file(args.data, n_symbols=classifier.n_symbols)
    test_idx = sorted(i for indices in split_doc["test"].values() for i in indices)
    if not test_idx:
        raise DataFormatError(f"split file {args.split} leaves no test items")
    if test_idx[0] < 0 or test_idx[-1] >= len(dataset.items):
        raise DataFormatError(f"split file {args.split} indexes outside the data file")
    test_set = LabeledDataset(
        items=tuple(dataset.items[i] for i in test_idx), n_symbols=dataset.n_symbols
    )
    report = evaluate(classifier, test_set, normalized=args.normalized)
    print(report.to_text())

    report_path = models_dir / "eval_report.json"
    report_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")

    from .figures import save_confusion_matrix

    figure_path = models_dir / "confusion_matrix.png"
    save_confusion_matrix(report, figure_path)

    _write_manifest(
        models_dir / "eval_manifest.json",
        command="eval",
        flags={
            "models": args.models,
            "data": args.data,
            "split": args.split,
            "normalized": bool(args.normalized),
        },
        seed=None,
        inputs=[args.data, args.split] + [str(p) for p in model_paths],
        artifacts=[report_path.name, figure_path.name],
    )
    return EXIT_OK


def _cmd_sample(args) -> int:
    model = load_model(args.model)
    label = Path(args.model).stem
    sequences = []
    for k in range(args.count):
        seq, _ = sample_sequence(model, args.length, seed=args.seed + k)
        sequences.append((label, seq))
    output = Path(args.out)
    write_sequence_file(output, sequences)
    print(f"wrote {len(sequences)} sequences of length {args.length} to {output}")
    _write_manifest(
        output.with_name(output.name + ".manifest.json"),
        command="sample",
        flags={
            "model": args.model,
            "length": args.length,
            "count": args.count,
            "out": args.out,
        },
        seed=args.seed,
        inputs=[args.model],
        artifacts=[output.name],
    )
    return EXIT_OK


def _cmd_inspect(args) -> int:
    text = Path(args.model).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    model = model_from_dict(data, check=False)
    print(f"variant: {model.variant}")
    print(f"states: {model.n_states}, symbols: {model.n_symbols}")
    print(f"initial: {model.pi.tolist()}")
    for name, arr in (("A", model.a), ("B", model.b)):
        print(f"{name} row sums: {[f'{s:.12g}' for s in arr.sum(axis=1)]}")
        print(f"{name} entries: min {arr.min():.12g}, max {arr.max():.12g}")
    print(f"C row sums: min {model.c.sum(axis=2).min():.12g}, max {model.c.sum(axis=2).max():.12g}")
    print(f"C entries: min {model.c.min():.12g}, max {model.c.max():.12g}")
    if model.variant == STANDARD:
        print("C degenerate (baseline mode)")
    violations = validate(model)
    if violations:
        print("validation: FAILED")
        for violation in violations:
            print(f"  - {violation}")
        return EXIT_DATA
    print("validation: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="effhmm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"effhmm {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = commands.add_parser("iris-prep", help="discretize iris measurements into trend sequences")
    p.add_argument("--input", required=True, help="iris CSV with a header row")
    p.add_argument("--output", required=True, help="sequence file to write")
    p.add_argument("--train-only-bins", action="store_true",
                   help="fit bins on the seeded training subset only (leakage-free mode)")
    p.add_argument("--train-per-class", type=_positive_int, default=10,
                   help="training items per class used with --train-only-bins (default 10)")
    p.add_argument("--seed", type=int, default=0,
                   help="split seed used with --train-only-bins (default 0)")
    p.set_defaults(func=_cmd_iris_prep)

    p = commands.add_parser("track-prep", help="turn point tracks or ratio lists into trend sequences")
    p.add_argument("--input", required=True, help="track CSV (points) or ratio CSV")
    p.add_argument("--mode", required=True, choices=("points", "ratios"))
    p.add_argument("--output", required=True, help="sequence file to write")
    p.set_defaults(func=_cmd_track_prep)

    p = commands.add_parser("train", help="train one model per class on a seeded split")
    p.add_argument("--data", required=True, help="labeled sequence file")
    p.add_argument("--variant", choices=(EFF, STANDARD), default=EFF)
    p.add_argument("--states", type=_positive_int, default=3, help="hidden states (default 3)")
    p.add_argument("--threshold", type=float, default=0.01,
                   help="stop when mean per-sequence log-likelihood improves by less (default 0.01)")
    p.add_argument("--max-iters", type=_positive_int, default=500)
    p.add_argument("--epsilon", type=float, default=1e-6, help="smoothing floor (default 1e-6)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--train-per-class", type=_positive_int, default=10)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_train)

    p = commands.add_parser("eval", help="evaluate trained models on the held-out split")
    p.add_argument("--models", required=True, help="directory holding model_<label>.json files")
    p.add_argument("--data", required=True, help="labeled sequence file")
    p.add_argument("--split", required=True, help="split file written by train")
    p.add_argument("--normalized", action="store_true",
                   help="compare per-symbol scores (log-likelihood / length)")
    p.set_defaults(func=_cmd_eval)

    p = commands.add_parser("sample", help="sample sequences from a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--length", type=_positive_int, required=True)
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="sequence file to write")
    p.set_defaults(func=_cmd_sample)

    p = commands.add_parser("inspect", help="print a model file and its validation result")
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegeneracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
