"""Shared test utilities: random valid models, sequences, and datasets."""

import numpy as np

from effhmm import EFF, EffHmmModel

# PASS/FAIL lines recorded by the acceptance suite; replayed in the
# terminal summary by conftest.pytest_terminal_summary
acceptance_lines: list[str] = []


def simplex_rows(rng, shape):
    """Strictly positive random rows summing to 1."""
    x = rng.random(shape) + 1e-3
    return x / x.sum(axis=-1, keepdims=True)


def random_model(rng, n_states, n_symbols, variant=EFF):
    """A random valid model with strictly positive entries."""
    if variant == EFF:
        c = simplex_rows(rng, (n_states, n_symbols, n_symbols))
    else:
        c = np.ones((n_states, n_symbols, n_symbols))
    return EffHmmModel(
        n_states=n_states,
        n_symbols=n_symbols,
        pi=simplex_rows(rng, n_states),
        a=simplex_rows(rng, (n_states, n_states)),
        b=simplex_rows(rng, (n_states, n_symbols)),
        c=c,
        variant=variant,
    )


def random_obs(rng, n_symbols, length):
    """A random 1-based symbol list."""
    return [int(s) for s in rng.integers(1, n_symbols + 1, size=length)]


def random_sizes(rng, max_states=3, max_symbols=3, max_length=6):
    n = int(rng.integers(1, max_states + 1))
    m = int(rng.integers(2, max_symbols + 1))
    t = int(rng.integers(1, max_length + 1))
    return n, m, t
