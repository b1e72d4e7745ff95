"""Maximum-likelihood multi-class classification.

One model is trained per class; a sequence is assigned to the class
whose model gives it the highest forward log-likelihood.  Scores are
compared raw by default (no length normalization), with an optional
per-symbol normalized mode.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .inference import forward
from .learning import TrainConfig, TrainReport, em_train
from .model import ClassLabel, EffHmmModel, LabeledDataset


@dataclass(frozen=True)
class Classifier:
    """One trained model per class; all models share alphabet and variant."""

    models: dict[ClassLabel, EffHmmModel]
    train_config: TrainConfig | None = None
    train_reports: dict[ClassLabel, TrainReport] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.models) < 2:
            raise ValueError("a classifier needs at least two classes")
        sizes = {m.n_symbols for m in self.models.values()}
        variants = {m.variant for m in self.models.values()}
        if len(sizes) > 1:
            raise ValueError(f"class models disagree on alphabet size: {sorted(sizes)}")
        if len(variants) > 1:
            raise ValueError(f"class models disagree on variant: {sorted(variants)}")

    @property
    def labels(self) -> tuple[ClassLabel, ...]:
        return tuple(sorted(self.models))

    @property
    def n_symbols(self) -> int:
        return next(iter(self.models.values())).n_symbols


@dataclass(frozen=True)
class Classification:
    """Predicted label plus the per-class log-likelihood map behind it."""

    label: ClassLabel
    scores: dict[ClassLabel, float]
    all_impossible: bool = False


@dataclass(frozen=True)
class EvalReport:
    """Confusion matrix and accuracies over a labeled test set.

    ``confusion[r, c]`` counts items of true class ``labels[r]``
    predicted as ``labels[c]``; accuracies are percentages.
    """

    labels: tuple[ClassLabel, ...]
    confusion: np.ndarray
    per_class_accuracy: tuple[float, ...]
    overall_accuracy: float
    scores: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "per_class_accuracy": {
                label: round(acc, 2) for label, acc in zip(self.labels, self.per_class_accuracy)
            },
            "overall_accuracy": round(self.overall_accuracy, 2),
            "scores": list(self.scores),
        }

    def to_text(self) -> str:
        width = max(len("class"), *(len(label) for label in self.labels), len("overall"))
        lines = [f"{'class'.ljust(width)}  accuracy"]
        for label, acc in zip(self.labels, self.per_class_accuracy):
            lines.append(f"{label.ljust(width)}  {acc:8.2f}")
        lines.append(f"{'overall'.ljust(width)}  {self.overall_accuracy:8.2f}")
        return "\n".join(lines)


def split_indices(labels, train_per_class: int, seed: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Seeded per-class shuffle split over a list of item labels.

    Returns (train, test) index tuples, each sorted ascending.  Classes
    are visited in sorted order so the split depends only on the label
    sequence, the count, and the seed.  A class with too few items
    contributes everything it has to the training side, with a warning.
    """
    if train_per_class < 1:
        raise ValueError("train_per_class must be at least 1")
    labels = list(labels)
    rng = np.random.default_rng(seed)
    train: list[int] = []
    test: list[int] = []
    for label in sorted(set(labels)):
        indices = [i for i, lab in enumerate(labels) if lab == label]
        order = rng.permutation(len(indices))
        take = min(train_per_class, len(indices))
        if take < train_per_class:
            warnings.warn(
                f"class {label!r} has only {len(indices)} items; "
                f"using all of them for training (requested {train_per_class})"
            )
        train.extend(indices[k] for k in order[:take])
        test.extend(indices[k] for k in order[take:])
    return tuple(sorted(train)), tuple(sorted(test))


def split_dataset(
    dataset: LabeledDataset, train_per_class: int, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Split a dataset into train/test parts with ``split_indices``."""
    train_idx, test_idx = split_indices(
        [label for _, label in dataset.items], train_per_class, seed
    )
    pick = lambda idx: LabeledDataset(
        items=tuple(dataset.items[i] for i in idx), n_symbols=dataset.n_symbols
    )
    return pick(train_idx), pick(test_idx)


def train_classifier(dataset: LabeledDataset, config: TrainConfig) -> Classifier:
    """Train one model per class label, independently, on that class's sequences.

    Per-class seeds are derived as ``config.seed + ordinal`` with classes
    ordered lexicographically, so a run is fully determined by
    (dataset, config).
    """
    labels = dataset.labels
    if len(labels) < 2:
        raise ValueError("training needs at least two classes")
    models: dict[ClassLabel, EffHmmModel] = {}
    reports: dict[ClassLabel, TrainReport] = {}
    for ordinal, label in enumerate(labels):
        sequences = dataset.sequences(label)
        if not sequences:
            raise ValueError(f"class {label!r} has no training sequences")
        class_config = TrainConfig(
            n_states=config.n_states,
            convergence_threshold=config.convergence_threshold,
            max_iterations=config.max_iterations,
            smoothing_floor=config.smoothing_floor,
            seed=config.seed + ordinal,
            variant=config.variant,
        )
        models[label], reports[label] = em_train(sequences, dataset.n_symbols, class_config)
    return Classifier(models=models, train_config=config, train_reports=reports)


def classify_sequence(classifier: Classifier, obs, normalized: bool = False) -> Classification:
    """Score a sequence under every class model and take the argmax.

    Ties break toward the lexicographically first class name.  -inf
    scores participate; if every class scores -inf the first class is
    returned with ``all_impossible`` set.
    """
    length = len(getattr(obs, "symbols", obs))
    scores = {}
    for label in classifier.labels:
        score = forward(classifier.models[label], obs).log_likelihood
        scores[label] = score / length if normalized else score
    # max() keeps the first of equal scores, so iterating sorted labels
    # implements the lexicographic tie-break
    best = max(classifier.labels, key=lambda lab: scores[lab])
    all_impossible = all(s == -np.inf for s in scores.values())
    if all_impossible:
        best = classifier.labels[0]
    return Classification(label=best, scores=scores, all_impossible=all_impossible)


def evaluate(classifier: Classifier, test_set: LabeledDataset, normalized: bool = False) -> EvalReport:
    """Classify every test item and assemble the confusion matrix."""
    if not len(test_set):
        raise ValueError("test set is empty")
    labels = classifier.labels
    index = {label: k for k, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=int)
    item_scores = []
    for seq, true_label in test_set.items:
        if true_label not in index:
            raise ValueError(f"test item has unknown class {true_label!r}")
        result = classify_sequence(classifier, seq, normalized=normalized)
        confusion[index[true_label], index[result.label]] += 1
        item_scores.append(
            {"label": true_label, "predicted": result.label, "scores": dict(result.scores)}
        )
    per_class = []
    for k in range(len(labels)):
        count = confusion[k].sum()
        per_class.append(100.0 * confusion[k, k] / count if count else 0.0)
    overall = 100.0 * np.trace(confusion) / confusion.sum()
    return EvalReport(
        labels=labels,
        confusion=confusion,
        per_class_accuracy=tuple(per_class),
        overall_accuracy=float(overall),
        scores=tuple(item_scores),
    )
