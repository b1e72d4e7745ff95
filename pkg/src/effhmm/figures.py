"""Matplotlib renderings written next to the delimited report outputs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .classify import EvalReport


def save_confusion_matrix(report: EvalReport, path) -> None:
    """Render the confusion matrix as an annotated heatmap PNG."""
    k = len(report.labels)
    fig, ax = plt.subplots(figsize=(1.2 * k + 2.5, 1.2 * k + 2))
    image = ax.imshow(report.confusion, cmap="Blues")
    ax.set_xticks(range(k), labels=report.labels, rotation=45, ha="right")
    ax.set_yticks(range(k), labels=report.labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = report.confusion.max() / 2 if report.confusion.max() else 0.5
    for r in range(k):
        for c in range(k):
            count = report.confusion[r, c]
            ax.text(
                c, r, str(count), ha="center", va="center",
                color="white" if count > threshold else "black",
            )
    ax.set_title(f"overall accuracy {report.overall_accuracy:.2f}%")
    fig.colorbar(image, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_training_curves(histories: dict, path) -> None:
    """Plot mean per-sequence log-likelihood per iteration, one line per class."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label in sorted(histories):
        ax.plot(range(len(histories[label])), histories[label], marker=".", label=label)
    ax.set_xlabel("re-estimation step")
    ax.set_ylabel("mean log-likelihood per sequence")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
