"""Turns raw tabular or track data into discrete trend sequences.

Two preparation pipelines share the three-symbol trend alphabet:

* iris measurements: each of the four attributes is quantized into ten
  equal-width bins fitted over the dataset; a flower becomes the length-3
  run of trends between consecutive attribute bins, in the fixed order
  sepal length -> sepal width -> petal length -> petal width.
* point tracks: each frame's five tracked extremity points define a tight
  bounding box; the height/width ratio falls into one of eleven groups,
  and consecutive group comparisons become the trend run.

A forward sampler for synthetic data lives here as well.
"""

import csv
from bisect import bisect_right
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .inference import StatePath
from .model import (
    ClassLabel,
    DataFormatError,
    DegeneracyError,
    EffHmmModel,
    LabeledDataset,
    ObservationSequence,
)


class TrendSymbol(IntEnum):
    """The shared three-symbol alphabet; values are the on-disk encoding."""

    INCREASE = 1
    DECREASE = 2
    NO_CHANGE = 3


TREND_ALPHABET_SIZE = 3

IRIS_ATTRIBUTES = ("sepal_length", "sepal_width", "petal_length", "petal_width")
IRIS_SPECIES = ("setosa", "versicolour", "virginica")

RATIO_GROUP_COUNT = 11
_GROUP_BOUNDS = tuple(k / 10 for k in range(1, 11))


@dataclass(frozen=True)
class IrisRecord:
    """One flower: four measurements in centimeters plus its species label."""

    sepal_length: float
    sepal_width: float
    petal_length: float
    petal_width: float
    species: ClassLabel

    def __post_init__(self):
        for attr in IRIS_ATTRIBUTES:
            if not getattr(self, attr) > 0:
                raise ValueError(f"{attr} must be positive")


@dataclass(frozen=True)
class BinSpec:
    """Per-attribute equal-width bin layout fitted from data.

    Bin 1 covers [lower, lower + width]; bin k >= 2 covers
    (lower + (k-1) width, lower + k width]; out-of-range values clamp to
    the end bins.
    """

    lower: dict[str, float]
    upper: dict[str, float]
    bin_count: int = 10

    def width(self, attribute: str) -> float:
        return (self.upper[attribute] - self.lower[attribute]) / self.bin_count


@dataclass(frozen=True)
class PointFrame:
    """Five tracked 2-d points (hands, feet, head) from one frame."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) != 5:
            raise ValueError(f"a point frame holds exactly five points, got {len(pts)}")
        object.__setattr__(self, "points", pts)


def fit_bins(records, bin_count: int = 10) -> BinSpec:
    """Fit per-attribute ranges over all records; ten equal-width bins each."""
    records = list(records)
    if not records:
        raise ValueError("cannot fit bins on an empty record list")
    lower, upper = {}, {}
    for attr in IRIS_ATTRIBUTES:
        values = [getattr(r, attr) for r in records]
        lo, hi = min(values), max(values)
        if hi == lo:
            raise DegeneracyError(f"degenerate range: {attr} is constant at {lo:.12g}")
        lower[attr], upper[attr] = lo, hi
    return BinSpec(lower=lower, upper=upper, bin_count=bin_count)


def bin_index(value: float, attribute: str, spec: BinSpec) -> int:
    """Map a value to its 1-based bin; values outside the range clamp to the end bins."""
    lo = spec.lower[attribute]
    width = spec.width(attribute)
    if value <= lo:
        return 1
    for k in range(1, spec.bin_count + 1):
        if value <= lo + k * width:
            return k
    return spec.bin_count


def _trend(current: int, following: int) -> TrendSymbol:
    if following > current:
        return TrendSymbol.INCREASE
    if following < current:
        return TrendSymbol.DECREASE
    return TrendSymbol.NO_CHANGE


def iris_trend_sequence(record: IrisRecord, spec: BinSpec) -> ObservationSequence:
    """Three trend symbols comparing consecutive attribute bins (SL->SW->PL->PW)."""
    bins = [bin_index(getattr(record, attr), attr, spec) for attr in IRIS_ATTRIBUTES]
    return ObservationSequence(tuple(_trend(cur, nxt) for cur, nxt in zip(bins, bins[1:])))


def bounding_box_ratio(frame: PointFrame) -> float:
    """Height over width of the tight axis-aligned box around the five points."""
    xs = [p[0] for p in frame.points]
    ys = [p[1] for p in frame.points]
    width = max(xs) - min(xs)
    height = max(ys) - min(ys)
    if width <= 0 or height <= 0:
        raise DegeneracyError("degenerate box: bounding box has zero width or height")
    return height / width


def ratio_group(ratio: float) -> int:
    """Quantize a positive ratio into groups 1..11.

    Group 1 is below 0.1, group k (2..10) is [0.1(k-1), 0.1k), and group
    11 is everything at or above 1.0.
    """
    if not ratio > 0:
        raise ValueError("ratio must be positive")
    return 1 + bisect_right(_GROUP_BOUNDS, ratio)


def ratio_trend_sequence(ratios) -> ObservationSequence:
    """Trend symbols between consecutive ratio groups; magnitude is discarded."""
    groups = [ratio_group(r) for r in ratios]
    if len(groups) < 2:
        raise DegeneracyError("need at least 2 frames to produce a trend sequence")
    return ObservationSequence(tuple(_trend(cur, nxt) for cur, nxt in zip(groups, groups[1:])))


def sample_sequence(model: EffHmmModel, length: int, seed: int) -> tuple[ObservationSequence, StatePath]:
    """Ancestral sampling, deterministic given the seed.

    States follow pi and A.  The first symbol follows the emission row;
    each later symbol k is drawn proportionally to
    ``b[state, k] * c[prev_state, prev_symbol, k]`` (the factor product
    renormalized, since the raw product is not itself a distribution).
    Returns the sequence and the sampled path with the joint log
    probability of (path, sequence) under the model's factor product.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = np.random.default_rng(seed)
    states = np.empty(length, dtype=np.intp)
    symbols = np.empty(length, dtype=np.intp)
    states[0] = rng.choice(model.n_states, p=model.pi)
    symbols[0] = rng.choice(model.n_symbols, p=model.b[states[0]])
    log_probability = float(np.log(model.pi[states[0]]) + np.log(model.b[states[0], symbols[0]]))
    for t in range(1, length):
        prev_q, prev_o = states[t - 1], symbols[t - 1]
        q = rng.choice(model.n_states, p=model.a[prev_q])
        weights = model.b[q] * model.c[prev_q, prev_o]
        total = weights.sum()
        if total <= 0.0:
            raise DegeneracyError(
                "unsamplable: emission and evidence-link supports are disjoint "
                f"(state {q + 1}, previous symbol {prev_o + 1})"
            )
        o = rng.choice(model.n_symbols, p=weights / total)
        states[t], symbols[t] = q, o
        log_probability += float(
            np.log(model.a[prev_q, q])
            + np.log(model.b[q, o])
            + np.log(model.c[prev_q, prev_o, o])
        )
    return (
        ObservationSequence(tuple(int(s) + 1 for s in symbols)),
        StatePath(states=tuple(int(q) + 1 for q in states), log_probability=log_probability),
    )


# ---------------------------------------------------------------------------
# file formats


def normalize_species(raw: str) -> str:
    """Map raw class strings (e.g. "Iris-versicolor") onto the canonical species names."""
    name = raw.strip().lower()
    if name.startswith("iris-"):
        name = name[len("iris-"):]
    if name == "versicolor":
        name = "versicolour"
    if name not in IRIS_SPECIES:
        raise DataFormatError(f"unknown species {raw!r}")
    return name


def read_iris_csv(path) -> list[IrisRecord]:
    """Read the header-led iris CSV: sepal_length,sepal_width,petal_length,petal_width,species."""
    expected = list(IRIS_ATTRIBUTES) + ["species"]
    records = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected:
            raise DataFormatError(f"expected header {','.join(expected)!r} in {path}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise DataFormatError(f"{path} line {lineno}: expected 5 fields, got {len(row)}")
            try:
                values = [float(x) for x in row[:4]]
                records.append(IrisRecord(*values, species=normalize_species(row[4])))
            except (ValueError, DataFormatError) as exc:
                raise DataFormatError(f"{path} line {lineno}: {exc}") from exc
    if not records:
        raise DataFormatError(f"{path} contains no records")
    return records


def read_ratio_csv(path) -> list[tuple[ClassLabel, list[float]]]:
    """Read activities as lines of `label,r1 r2 ... rT` (space-separated ratios)."""
    activities = []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if "," not in line:
                raise DataFormatError(f"{path} line {lineno}: expected 'label,r1 r2 ...'")
            label, _, rest = line.partition(",")
            label = label.strip()
            if not label:
                raise DataFormatError(f"{path} line {lineno}: empty label")
            try:
                ratios = [float(x) for x in rest.split()]
            except ValueError as exc:
                raise DataFormatError(f"{path} line {lineno}: {exc}") from exc
            if not ratios:
                raise DataFormatError(f"{path} line {lineno}: no ratios")
            activities.append((label, ratios))
    if not activities:
        raise DataFormatError(f"{path} contains no activities")
    return activities


def read_track_csv(path) -> list[tuple[ClassLabel, list[PointFrame]]]:
    """Read point tracks as lines of `label,frame,x1,y1,...,x5,y5`.

    Consecutive lines with the same label belong to one activity; a frame
    index that does not increase starts a new activity under that label.
    """
    activities: list[tuple[ClassLabel, list[PointFrame]]] = []
    current_label = None
    current_frame = None
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 12:
                raise DataFormatError(
                    f"{path} line {lineno}: expected 'label,frame,x1,y1,...,x5,y5' (12 fields), "
                    f"got {len(parts)}"
                )
            label = parts[0].strip()
            if not label:
                raise DataFormatError(f"{path} line {lineno}: empty label")
            try:
                frame_no = int(parts[1])
                coords = [float(x) for x in parts[2:]]
            except ValueError as exc:
                raise DataFormatError(f"{path} line {lineno}: {exc}") from exc
            frame = PointFrame(tuple(zip(coords[0::2], coords[1::2])))
            new_activity = (
                label != current_label
                or current_frame is None
                or frame_no <= current_frame
            )
            if new_activity:
                activities.append((label, []))
            activities[-1][1].append(frame)
            current_label, current_frame = label, frame_no
    if not activities:
        raise DataFormatError(f"{path} contains no activities")
    return activities


def write_sequence_file(path, items) -> None:
    """Write labeled sequences as lines of `label,s1 s2 ... sT`."""
    lines = []
    for label, seq in items:
        if "," in label or not label:
            raise DataFormatError(f"label {label!r} cannot be written to a sequence file")
        symbols = getattr(seq, "symbols", seq)
        lines.append(f"{label},{' '.join(str(int(s)) for s in symbols)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_sequence_file(path, n_symbols: int | None = None) -> LabeledDataset:
    """Read a `label,s1 s2 ... sT` file.

    The format carries no alphabet size; pass ``n_symbols`` to enforce
    one (symbols beyond it are rejected), otherwise the largest symbol
    seen defines it.
    """
    items = []
    largest = 0
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if "," not in line:
                raise DataFormatError(f"{path} line {lineno}: expected 'label,s1 s2 ...'")
            label, _, rest = line.partition(",")
            label = label.strip()
            if not label:
                raise DataFormatError(f"{path} line {lineno}: empty label")
            try:
                symbols = tuple(int(x) for x in rest.split())
            except ValueError as exc:
                raise DataFormatError(f"{path} line {lineno}: {exc}") from exc
            if not symbols:
                raise DataFormatError(f"{path} line {lineno}: no symbols")
            if min(symbols) < 1:
                raise DataFormatError(f"{path} line {lineno}: symbols are 1-based")
            if n_symbols is not None and max(symbols) > n_symbols:
                raise DataFormatError(
                    f"{path} line {lineno}: symbol {max(symbols)} out of range 1..{n_symbols}"
                )
            largest = max(largest, max(symbols))
            items.append((ObservationSequence(symbols), label))
    if not items:
        raise DataFormatError(f"{path} contains no sequences")
    return LabeledDataset(items=tuple(items), n_symbols=n_symbols if n_symbols else largest)
