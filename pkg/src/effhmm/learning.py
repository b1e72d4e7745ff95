"""Expectation-maximization training from one or more observation sequences.

The M-step re-estimates

    pi_i    = expected count of starting in state i / number of sequences
    a_ij    = expected i->j transitions / expected transitions out of i
    b_jh    = expected emissions of symbol h from state j / expected visits to j
    c_i(h,k)= expected (h then k) symbol pairs while in state i
              / expected visits to state i while observing h (t < T)

over statistics accumulated across all sequences (ratio of summed
numerators to summed denominators).  Each output row gets the smoothing
floor added and is renormalized exactly, so re-estimated models always
validate; rows with a zero denominator become uniform.  In the standard
variant the C tensor stays identically 1 and is never updated.
"""

from dataclasses import dataclass

import numpy as np

from .inference import forward, posteriors, symbol_indices
from .model import EFF, STANDARD, VARIANTS, EffHmmModel


@dataclass(frozen=True)
class SufficientStats:
    """Expected counts from one or more sequences, mergeable by addition.

    ``expected_state_visits`` sums gamma over t < T (the transition
    denominator); ``expected_state_visits_all`` sums over every t (the
    emission denominator).  ``expected_obs_visits`` counts state visits
    split by the symbol observed there, over t < T, so each of its
    entries equals the matching row sum of ``expected_obs_pairs``.
    """

    expected_initial: np.ndarray  # (N,)
    expected_transitions: np.ndarray  # (N, N)
    expected_state_visits: np.ndarray  # (N,)
    expected_state_visits_all: np.ndarray  # (N,)
    expected_emissions: np.ndarray  # (N, M)
    expected_obs_pairs: np.ndarray  # (N, M, M)
    expected_obs_visits: np.ndarray  # (N, M)
    sequence_count: int

    @classmethod
    def zeros(cls, n_states: int, n_symbols: int) -> "SufficientStats":
        return cls(
            expected_initial=np.zeros(n_states),
            expected_transitions=np.zeros((n_states, n_states)),
            expected_state_visits=np.zeros(n_states),
            expected_state_visits_all=np.zeros(n_states),
            expected_emissions=np.zeros((n_states, n_symbols)),
            expected_obs_pairs=np.zeros((n_states, n_symbols, n_symbols)),
            expected_obs_visits=np.zeros((n_states, n_symbols)),
            sequence_count=0,
        )


@dataclass(frozen=True)
class TrainConfig:
    """Training knobs; defaults follow the discretized-measurement protocol."""

    n_states: int
    convergence_threshold: float = 0.01
    max_iterations: int = 500
    smoothing_floor: float = 1e-6
    seed: int = 0
    variant: str = EFF

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("n_states must be positive")
        if not self.convergence_threshold > 0:
            raise ValueError("convergence_threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0.0 <= self.smoothing_floor <= 1e-3:
            raise ValueError("smoothing_floor must lie in [0, 1e-3]")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class TrainReport:
    """Mean per-sequence log-likelihood trajectory of a training run.

    ``log_likelihood_history[0]`` scores the freshly initialized model;
    entry k scores the model after k re-estimation steps.  The history
    never decreases beyond floating-point slack.
    """

    log_likelihood_history: tuple[float, ...]
    iterations_run: int
    converged: bool


def init_model(n_states: int, n_symbols: int, variant: str, seed: int) -> EffHmmModel:
    """Draw a random valid model, deterministic given the seed.

    Every row of pi, A, B (and of C in the eff variant) is independent
    uniform positive noise, row-normalized.  C is drawn last, so eff and
    standard initializations from the same seed share (pi, A, B).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    rng = np.random.default_rng(seed)

    def simplex_rows(shape):
        x = rng.random(shape)
        return x / x.sum(axis=-1, keepdims=True)

    pi = simplex_rows(n_states)
    a = simplex_rows((n_states, n_states))
    b = simplex_rows((n_states, n_symbols))
    if variant == EFF:
        c = simplex_rows((n_states, n_symbols, n_symbols))
    else:
        c = np.ones((n_states, n_symbols, n_symbols))
    return EffHmmModel(n_states=n_states, n_symbols=n_symbols, pi=pi, a=a, b=b, c=c, variant=variant)


def accumulate_stats(model: EffHmmModel, obs, trellis=None) -> SufficientStats:
    """Expected counts for a single sequence, from its posteriors."""
    o = symbol_indices(obs, model.n_symbols)
    post = posteriors(model, obs, trellis=trellis)
    gamma, xi = post.gamma, post.xi
    n, m = model.n_states, model.n_symbols

    emissions = np.zeros((m, n))
    np.add.at(emissions, o, gamma)

    pairs = np.zeros((m, m, n))
    visits = np.zeros((m, n))
    if len(o) > 1:
        np.add.at(pairs, (o[:-1], o[1:]), gamma[:-1])
        np.add.at(visits, o[:-1], gamma[:-1])

    return SufficientStats(
        expected_initial=gamma[0].copy(),
        expected_transitions=xi.sum(axis=0) if len(o) > 1 else np.zeros((n, n)),
        expected_state_visits=gamma[:-1].sum(axis=0),
        expected_state_visits_all=gamma.sum(axis=0),
        expected_emissions=emissions.T.copy(),
        expected_obs_pairs=np.moveaxis(pairs, 2, 0).copy(),
        expected_obs_visits=visits.T.copy(),
        sequence_count=1,
    )


def merge_stats(a: SufficientStats, b: SufficientStats) -> SufficientStats:
    """Componentwise sum; associative and commutative."""
    if a.expected_obs_pairs.shape != b.expected_obs_pairs.shape:
        raise ValueError(
            f"dimension mismatch: {a.expected_obs_pairs.shape} vs {b.expected_obs_pairs.shape}"
        )
    return SufficientStats(
        expected_initial=a.expected_initial + b.expected_initial,
        expected_transitions=a.expected_transitions + b.expected_transitions,
        expected_state_visits=a.expected_state_visits + b.expected_state_visits,
        expected_state_visits_all=a.expected_state_visits_all + b.expected_state_visits_all,
        expected_emissions=a.expected_emissions + b.expected_emissions,
        expected_obs_pairs=a.expected_obs_pairs + b.expected_obs_pairs,
        expected_obs_visits=a.expected_obs_visits + b.expected_obs_visits,
        sequence_count=a.sequence_count + b.sequence_count,
    )


def _ratio_rows(numer: np.ndarray, denom: np.ndarray) -> np.ndarray:
    # rows with a zero denominator become uniform
    k = numer.shape[-1]
    denom = denom[..., None]
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, numer / safe, 1.0 / k)


def _smooth_rows(rows: np.ndarray, epsilon: float) -> np.ndarray:
    rows = rows + epsilon
    return rows / rows.sum(axis=-1, keepdims=True)


def reestimate(stats: SufficientStats, variant: str, epsilon: float = 1e-6) -> EffHmmModel:
    """One M-step: turn accumulated counts into a valid model."""
    if stats.sequence_count < 1:
        raise ValueError("stats must cover at least one sequence")
    n, m = stats.expected_emissions.shape
    pi = _smooth_rows(stats.expected_initial / stats.sequence_count, epsilon)
    a = _smooth_rows(
        _ratio_rows(stats.expected_transitions, stats.expected_transitions.sum(axis=1)), epsilon
    )
    b = _smooth_rows(
        _ratio_rows(stats.expected_emissions, stats.expected_emissions.sum(axis=1)), epsilon
    )
    if variant == EFF:
        c = _smooth_rows(_ratio_rows(stats.expected_obs_pairs, stats.expected_obs_visits), epsilon)
    elif variant == STANDARD:
        c = np.ones((n, m, m))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return EffHmmModel(n_states=n, n_symbols=m, pi=pi, a=a, b=b, c=c, variant=variant)


def _expectation(model: EffHmmModel, sequences) -> tuple[SufficientStats, float]:
    """E-step over a batch: merged stats plus mean per-sequence log-likelihood."""
    merged = SufficientStats.zeros(model.n_states, model.n_symbols)
    total = 0.0
    for obs in sequences:
        trellis = forward(model, obs)
        merged = merge_stats(merged, accumulate_stats(model, obs, trellis=trellis))
        total += trellis.log_likelihood
    return merged, total / len(sequences)


def em_train(
    sequences,
    n_symbols: int,
    config: TrainConfig,
    initial_model: EffHmmModel | None = None,
) -> tuple[EffHmmModel, TrainReport]:
    """Train a model on a batch of sequences, deterministic given the seed.

    Starts from ``init_model`` (or from ``initial_model`` when given) and
    alternates expectation and re-estimation until the mean per-sequence
    log-likelihood improves by less than the convergence threshold, or
    ``max_iterations`` updates have run.  Sequences are accumulated in
    input order, so results are bit-reproducible.
    """
    sequences = list(sequences)
    if not sequences:
        raise ValueError("at least one observation sequence is required")
    if initial_model is not None:
        if (initial_model.n_states, initial_model.n_symbols, initial_model.variant) != (
            config.n_states, n_symbols, config.variant,
        ):
            raise ValueError("initial_model does not match the training configuration")
        model = initial_model
    else:
        model = init_model(config.n_states, n_symbols, config.variant, config.seed)
    stats, mean_ll = _expectation(model, sequences)
    history = [mean_ll]
    converged = False
    iterations = 0
    for _ in range(config.max_iterations):
        model = reestimate(stats, config.variant, config.smoothing_floor)
        stats, new_ll = _expectation(model, sequences)
        history.append(new_ll)
        iterations += 1
        if new_ll - mean_ll < config.convergence_threshold:
            converged = True
            break
        mean_ll = new_ll
    return model, TrainReport(
        log_likelihood_history=tuple(history),
        iterations_run=iterations,
        converged=converged,
    )
