"""The enumeration oracle's own fixed points and guards."""

import numpy as np
import pytest

from effhmm import EffHmmModel, viterbi
from effhmm.oracle import enumerate_best_path, enumerate_likelihood, enumerate_posterior_gamma
from helpers import random_model


def one_hot_cycle_model():
    # forced path 1,2,1,2,... emitting 1,2,1,2,...
    return EffHmmModel(
        n_states=2,
        n_symbols=2,
        pi=[1.0, 0.0],
        a=[[0.0, 1.0], [1.0, 0.0]],
        b=[[1.0, 0.0], [0.0, 1.0]],
        c=[[[0.0, 1.0], [0.5, 0.5]], [[0.5, 0.5], [1.0, 0.0]]],
    )


def test_forced_sequence_has_unit_mass():
    assert enumerate_likelihood(one_hot_cycle_model(), [1, 2, 1, 2]) == pytest.approx(1.0)


def test_single_state_chain_literal_product():
    model = EffHmmModel(
        n_states=1, n_symbols=2, pi=[1.0], a=[[1.0]], b=[[0.5, 0.5]],
        c=[[[0.9, 0.1], [0.3, 0.7]]],
    )
    assert enumerate_likelihood(model, [1, 2]) == pytest.approx(0.025, rel=1e-12)


def test_best_path_single_state():
    model = EffHmmModel(
        n_states=1, n_symbols=2, pi=[1.0], a=[[1.0]], b=[[0.5, 0.5]],
        c=[[[0.9, 0.1], [0.3, 0.7]]],
    )
    assert enumerate_best_path(model, [1, 1, 2]).states == (1, 1, 1)


def test_best_path_forced_by_transitions():
    path = enumerate_best_path(one_hot_cycle_model(), [1, 2, 1])
    assert path.states == (1, 2, 1)
    assert path.log_probability == pytest.approx(0.0)


def test_tie_break_matches_viterbi_lowest_index():
    # fully symmetric model: every path ties, so both sides must pick all-ones
    model = EffHmmModel(
        n_states=2, n_symbols=2,
        pi=[0.5, 0.5],
        a=np.full((2, 2), 0.5),
        b=np.full((2, 2), 0.5),
        c=np.full((2, 2, 2), 0.5),
    )
    obs = [1, 2, 1]
    assert enumerate_best_path(model, obs).states == (1, 1, 1)
    assert viterbi(model, obs).states == (1, 1, 1)


def test_posterior_gamma_single_state_all_ones():
    model = EffHmmModel(
        n_states=1, n_symbols=2, pi=[1.0], a=[[1.0]], b=[[0.5, 0.5]],
        c=[[[0.5, 0.5], [0.5, 0.5]]],
    )
    assert np.array_equal(enumerate_posterior_gamma(model, [1, 2, 1]), np.ones((3, 1)))


def test_posterior_gamma_symmetric_model_is_half():
    model = EffHmmModel(
        n_states=2, n_symbols=2,
        pi=[0.5, 0.5],
        a=np.full((2, 2), 0.5),
        b=np.full((2, 2), 0.5),
        c=np.full((2, 2, 2), 0.5),
    )
    gamma = enumerate_posterior_gamma(model, [1, 2, 2, 1])
    assert np.allclose(gamma, 0.5, atol=1e-12)


def test_path_guard():
    rng = np.random.default_rng(0)
    model = random_model(rng, 3, 2)
    with pytest.raises(ValueError, match="guard"):
        enumerate_likelihood(model, [1] * 20)
