"""Likelihood evaluation, posterior statistics, and state-path decoding.

The forward pass normalizes each trellis column and records the scaling
factor, so sequences of 100000+ symbols evaluate without underflow.  The
unscaled recursions being computed are

    alpha_i(1)   = pi_i * b_i(O_1)                       (no evidence link at t=1)
    alpha_j(t+1) = [sum_i alpha_i(t) a_ij c_i(O_t, O_t+1)] * b_j(O_t+1)
    beta_i(T)    = 1
    beta_i(t)    = [sum_j a_ij b_j(O_t+1) beta_j(t+1)] * c_i(O_t, O_t+1)

With an all-ones C (the "standard" variant) both reduce to the textbook
HMM recursions on (pi, A, B).
"""

from dataclasses import dataclass

import numpy as np

from .model import DataFormatError, DegeneracyError, EffHmmModel


@dataclass(frozen=True)
class TrellisResult:
    """Scaled forward variables.

    ``alpha_hat[t]`` is the forward column at time t divided by its sum;
    ``scaling[t]`` is the multiplier applied (the reciprocal of that sum),
    so the unscaled alpha_i(t) is ``alpha_hat[t, i] / prod(scaling[:t+1])``
    and ``log_likelihood == -sum(log(scaling))``.
    """

    alpha_hat: np.ndarray  # (T, N)
    scaling: np.ndarray  # (T,)
    log_likelihood: float


@dataclass(frozen=True)
class BackwardResult:
    """Backward variables scaled by the forward pass's factors for t+1..T."""

    beta_hat: np.ndarray  # (T, N)


@dataclass(frozen=True)
class PosteriorStats:
    """State occupancies gamma[t, i] and transition posteriors xi[t, i, j]."""

    gamma: np.ndarray  # (T, N)
    xi: np.ndarray  # (T-1, N, N)


@dataclass(frozen=True)
class StatePath:
    """A decoded hidden-state path (1-based states) and its joint log probability."""

    states: tuple[int, ...]
    log_probability: float


def symbol_indices(obs, n_symbols: int) -> np.ndarray:
    """Convert a sequence of 1-based symbols to a 0-based index array.

    Accepts an ObservationSequence or any iterable of integers; rejects
    symbols outside 1..n_symbols.
    """
    symbols = getattr(obs, "symbols", obs)
    out = np.asarray(symbols, dtype=np.intp)
    if out.ndim != 1 or out.size == 0:
        raise DataFormatError("observation sequence must be a nonempty 1-d run of symbols")
    if out.min() < 1 or out.max() > n_symbols:
        bad = out[(out < 1) | (out > n_symbols)][0]
        raise DataFormatError(f"symbol {bad} out of range 1..{n_symbols}")
    return out - 1


def forward(model: EffHmmModel, obs) -> TrellisResult:
    """Run the scaled forward pass.

    A sequence with zero probability under the model is not an error:
    the result carries ``log_likelihood == -inf``, zero rows from the
    step where the mass vanished, and infinite scaling there.
    """
    o = symbol_indices(obs, model.n_symbols)
    big_t, n = len(o), model.n_states
    alpha_hat = np.zeros((big_t, n))
    scaling = np.empty(big_t)
    col = model.pi * model.b[:, o[0]]
    for t in range(big_t):
        if t > 0:
            link = model.c[:, o[t - 1], o[t]]
            col = ((alpha_hat[t - 1] * link) @ model.a) * model.b[:, o[t]]
        total = col.sum()
        if total <= 0.0:
            scaling[t:] = np.inf
            return TrellisResult(alpha_hat=alpha_hat, scaling=scaling, log_likelihood=-np.inf)
        alpha_hat[t] = col / total
        scaling[t] = 1.0 / total
    return TrellisResult(
        alpha_hat=alpha_hat,
        scaling=scaling,
        log_likelihood=float(-np.sum(np.log(scaling))),
    )


def backward(model: EffHmmModel, obs, trellis: TrellisResult | None = None) -> BackwardResult:
    """Run the backward pass, scaled by the matching forward factors.

    ``beta_hat[t] = beta[t] * prod(scaling[t+1:])``, so the last row is
    exactly all ones and ``sum_i alpha_hat[t, i] * beta_hat[t, i]`` is
    constant (equal to 1) over t.
    """
    o = symbol_indices(obs, model.n_symbols)
    if trellis is None:
        trellis = forward(model, obs)
    if not np.isfinite(trellis.log_likelihood):
        raise DegeneracyError("sequence impossible under model; scaled backward pass undefined")
    big_t, n = len(o), model.n_states
    beta_hat = np.zeros((big_t, n))
    beta_hat[big_t - 1] = 1.0
    for t in range(big_t - 2, -1, -1):
        link = model.c[:, o[t], o[t + 1]]
        beta_hat[t] = (
            (model.a @ (model.b[:, o[t + 1]] * beta_hat[t + 1])) * link * trellis.scaling[t + 1]
        )
    return BackwardResult(beta_hat=beta_hat)


def posteriors(model: EffHmmModel, obs, trellis: TrellisResult | None = None) -> PosteriorStats:
    """Compute gamma and xi as self-normalizing ratios.

    gamma[t, i] = alpha_i(t) beta_i(t) / sum_j alpha_j(t) beta_j(t)
    xi[t, i, j] proportional to
        alpha_i(t) a_ij b_j(O_t+1) c_i(O_t, O_t+1) beta_j(t+1)
    normalized over (i, j).  Scaling factors cancel in both ratios.

    For a single-symbol sequence xi is empty.  Raises DegeneracyError
    for sequences with zero likelihood.
    """
    o = symbol_indices(obs, model.n_symbols)
    if trellis is None:
        trellis = forward(model, obs)
    if not np.isfinite(trellis.log_likelihood):
        raise DegeneracyError("degenerate posterior: sequence has zero likelihood under the model")
    bwd = backward(model, obs, trellis)
    product = trellis.alpha_hat * bwd.beta_hat
    gamma = product / product.sum(axis=1, keepdims=True)
    big_t, n = len(o), model.n_states
    xi = np.zeros((big_t - 1, n, n))
    for t in range(big_t - 1):
        weights = (
            (trellis.alpha_hat[t] * model.c[:, o[t], o[t + 1]])[:, None]
            * model.a
            * (model.b[:, o[t + 1]] * bwd.beta_hat[t + 1])[None, :]
        )
        xi[t] = weights / weights.sum()
    return PosteriorStats(gamma=gamma, xi=xi)


def viterbi(model: EffHmmModel, obs) -> StatePath:
    """Decode the maximum-probability state path in log space.

    delta_1(i) = pi_i b_i(O_1);
    delta_t(j) = max_i [delta_{t-1}(i) a_ij b_j(O_t) c_i(O_{t-1}, O_t)].
    Ties break toward the lowest state index at every maximization.  If
    every path has zero probability the log probability is -inf and the
    (deterministic) all-ones path is returned.
    """
    o = symbol_indices(obs, model.n_symbols)
    big_t, n = len(o), model.n_states
    with np.errstate(divide="ignore"):
        log_pi = np.log(model.pi)
        log_a = np.log(model.a)
        log_b = np.log(model.b)
        log_c = np.log(model.c)
    backptr = np.zeros((big_t, n), dtype=np.intp)
    delta = log_pi + log_b[:, o[0]]
    for t in range(1, big_t):
        cand = delta[:, None] + log_a + log_c[:, o[t - 1], o[t]][:, None]
        backptr[t] = np.argmax(cand, axis=0)
        delta = cand[backptr[t], np.arange(n)] + log_b[:, o[t]]
    best = int(np.argmax(delta))
    states = np.empty(big_t, dtype=np.intp)
    states[big_t - 1] = best
    for t in range(big_t - 2, -1, -1):
        states[t] = backptr[t + 1, states[t + 1]]
    return StatePath(
        states=tuple(int(s) + 1 for s in states),
        log_probability=float(delta[best]),
    )
