"""Model containers, validation, and JSON persistence.

An evidence feed-forward HMM extends the discrete HMM (pi, A, B) with a
per-state evidence-link tensor C: ``c[i, h, k]`` is the probability that
symbol k is observed next, given hidden state i and current symbol h.
The baseline HMM lives in the same container with every entry of C set
to 1, so both model families share a single code path and differ only
through the C factors.

States and symbols are 1-based wherever a human sees them (files, error
messages, decoded paths); array indices are 0-based internally.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EFF = "eff"
STANDARD = "standard"
VARIANTS = (EFF, STANDARD)

ROW_SUM_TOL = 1e-12

MODEL_FIELDS = ("variant", "n_states", "n_symbols", "pi", "a", "b", "c")

ClassLabel = str


class DataFormatError(ValueError):
    """Malformed or inconsistent input: bad files, bad schemas, symbols out of range."""


class DegeneracyError(ValueError):
    """Numerically degenerate situation: zero-likelihood posteriors, collapsed value ranges, unsamplable distributions."""


@dataclass(frozen=True, eq=False)
class EffHmmModel:
    """Parameter bundle for an evidence feed-forward HMM.

    pi[i]      probability of starting in hidden state i
    a[i, j]    probability of moving from state i to state j
    b[j, h]    probability of emitting symbol h from state j
    c[i, h, k] probability that symbol k follows symbol h while in state i

    ``variant`` selects between the full model ("eff") and the baseline
    HMM ("standard"), which is encoded as C identically 1.  Arrays are
    frozen after construction; instances are safe to share.
    """

    n_states: int
    n_symbols: int
    pi: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    variant: str = EFF

    def __post_init__(self):
        if self.n_states < 1 or self.n_symbols < 1:
            raise ValueError("n_states and n_symbols must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        n, m = self.n_states, self.n_symbols
        shapes = {"pi": (n,), "a": (n, n), "b": (n, m), "c": (n, m, m)}
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __eq__(self, other):
        if not isinstance(other, EffHmmModel):
            return NotImplemented
        return (
            self.n_states == other.n_states
            and self.n_symbols == other.n_symbols
            and self.variant == other.variant
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("pi", "a", "b", "c")
            )
        )


@dataclass(frozen=True)
class ObservationSequence:
    """A finite run of 1-based discrete symbols."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        syms = tuple(int(s) for s in self.symbols)
        if not syms:
            raise ValueError("an observation sequence needs at least one symbol")
        if any(s < 1 for s in syms):
            raise ValueError("symbols are 1-based; got a value below 1")
        object.__setattr__(self, "symbols", syms)

    def __len__(self):
        return len(self.symbols)


@dataclass(frozen=True)
class LabeledDataset:
    """Labeled observation sequences over a shared alphabet of size ``n_symbols``."""

    items: tuple[tuple[ObservationSequence, ClassLabel], ...]
    n_symbols: int

    def __post_init__(self):
        items = tuple((seq, str(label)) for seq, label in self.items)
        object.__setattr__(self, "items", items)
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be positive")
        for seq, label in items:
            if not label:
                raise ValueError("class labels must be nonempty")
            high = max(seq.symbols)
            if high > self.n_symbols:
                raise ValueError(
                    f"symbol {high} out of range 1..{self.n_symbols} in class {label!r}"
                )

    @property
    def labels(self) -> tuple[ClassLabel, ...]:
        return tuple(sorted({label for _, label in self.items}))

    def sequences(self, label: ClassLabel) -> tuple[ObservationSequence, ...]:
        return tuple(seq for seq, lab in self.items if lab == label)

    def __len__(self):
        return len(self.items)


def _check_row(violations: list[str], name: str, row: np.ndarray) -> None:
    total = float(row.sum())
    if abs(total - 1.0) > ROW_SUM_TOL:
        violations.append(f"{name} sums to {total:.12g}")
    for idx in np.flatnonzero((row < 0.0) | (row > 1.0)):
        violations.append(f"{name} entry {idx + 1} is {row[idx]:.12g}, outside [0, 1]")


def validate(model: EffHmmModel) -> list[str]:
    """Check every stochasticity invariant and return the violations.

    An empty list means the model is valid.  Violations are data, not
    exceptions; each names the offending row with 1-based coordinates,
    e.g. ``"A row 1 sums to 1.2"``.
    """
    violations: list[str] = []
    _check_row(violations, "initial", model.pi)
    for i in range(model.n_states):
        _check_row(violations, f"A row {i + 1}", model.a[i])
    for j in range(model.n_states):
        _check_row(violations, f"B row {j + 1}", model.b[j])
    if model.variant == EFF:
        for i in range(model.n_states):
            for h in range(model.n_symbols):
                _check_row(violations, f"C row (state {i + 1}, symbol {h + 1})", model.c[i, h])
    else:
        for i in range(model.n_states):
            for h in range(model.n_symbols):
                if not np.all(model.c[i, h] == 1.0):
                    violations.append(
                        f"C row (state {i + 1}, symbol {h + 1}) must be all ones in standard variant"
                    )
    return violations


def model_to_dict(model: EffHmmModel) -> dict:
    return {
        "variant": model.variant,
        "n_states": model.n_states,
        "n_symbols": model.n_symbols,
        "pi": model.pi.tolist(),
        "a": model.a.tolist(),
        "b": model.b.tolist(),
        "c": model.c.tolist(),
    }


def model_from_dict(data: dict, check: bool = True) -> EffHmmModel:
    """Build a model from the documented JSON object.

    With ``check`` (the default) the model is validated and rejected on
    any violation; ``check=False`` returns it as-is for diagnostics.
    """
    if not isinstance(data, dict):
        raise DataFormatError(f"model document must be a JSON object, got {type(data).__name__}")
    for field in MODEL_FIELDS:
        if field not in data:
            raise DataFormatError(f'missing field "{field}"')
    try:
        model = EffHmmModel(
            n_states=int(data["n_states"]),
            n_symbols=int(data["n_symbols"]),
            pi=data["pi"],
            a=data["a"],
            b=data["b"],
            c=data["c"],
            variant=str(data["variant"]),
        )
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"bad model document: {exc}") from exc
    if check:
        violations = validate(model)
        if violations:
            raise DataFormatError("model failed validation: " + "; ".join(violations))
    return model


def model_to_json(model: EffHmmModel) -> str:
    """Serialize with full round-trip float precision."""
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def save_model(model: EffHmmModel, destination) -> None:
    """Write the model as JSON to a path or a writable text file."""
    text = model_to_json(model)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)


def load_model(source) -> EffHmmModel:
    """Read a model from a path or readable text file; validates before returning."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return model_from_dict(data)
