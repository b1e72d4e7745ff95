"""Forward/backward/posterior/Viterbi behavior, checked against the enumeration oracle."""

import numpy as np
import pytest

import reference_hmm
from effhmm import (
    STANDARD,
    DataFormatError,
    DegeneracyError,
    EffHmmModel,
    backward,
    forward,
    posteriors,
    viterbi,
)
from effhmm.inference import symbol_indices
from effhmm.oracle import enumerate_best_path, enumerate_likelihood, enumerate_posterior_gamma
from helpers import random_model, random_obs, random_sizes


def single_state_model():
    # one hidden state, so the likelihood is a literal factor product
    return EffHmmModel(
        n_states=1,
        n_symbols=2,
        pi=[1.0],
        a=[[1.0]],
        b=[[0.5, 0.5]],
        c=[[[0.9, 0.1], [0.3, 0.7]]],
    )


def weather_model():
    # rain / dry states observed through umbrella / no-umbrella, with
    # evidence links making umbrella choice sticky from day to day
    return EffHmmModel(
        n_states=2,
        n_symbols=2,
        pi=[0.6, 0.4],
        a=[[0.7, 0.3], [0.3, 0.7]],
        b=[[0.9, 0.1], [0.2, 0.8]],
        c=[[[0.8, 0.2], [0.4, 0.6]], [[0.5, 0.5], [0.3, 0.7]]],
    )


class TestForward:
    def test_deterministic_first_step(self):
        model = EffHmmModel(
            n_states=2, n_symbols=2,
            pi=[1.0, 0.0],
            a=[[0.5, 0.5], [0.5, 0.5]],
            b=[[1.0, 0.0], [0.5, 0.5]],
            c=np.full((2, 2, 2), 0.5),
        )
        result = forward(model, [1])
        assert np.exp(result.log_likelihood) == pytest.approx(1.0, abs=1e-15)

    def test_single_state_chain_is_factor_product(self):
        result = forward(single_state_model(), [1, 2])
        # pi * b(V1) * a * c(1,2) * b(V2) = 1 * 0.5 * 1 * 0.1 * 0.5
        assert np.exp(result.log_likelihood) == pytest.approx(0.025, rel=1e-12)

    def test_matches_enumeration(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            n, m, t = random_sizes(rng)
            model = random_model(rng, n, m)
            obs = random_obs(rng, m, t)
            expected = enumerate_likelihood(model, obs)
            got = np.exp(forward(model, obs).log_likelihood)
            assert got == pytest.approx(expected, rel=1e-10)

    def test_scaled_rows_sum_to_one(self):
        rng = np.random.default_rng(7)
        model = random_model(rng, 3, 3)
        result = forward(model, random_obs(rng, 3, 12))
        assert np.allclose(result.alpha_hat.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(result.scaling > 0)

    def test_log_likelihood_is_negative_log_scaling_sum(self):
        rng = np.random.default_rng(8)
        model = random_model(rng, 2, 3)
        result = forward(model, random_obs(rng, 3, 9))
        assert result.log_likelihood == pytest.approx(-np.sum(np.log(result.scaling)))

    def test_impossible_sequence_reports_minus_inf(self):
        model = EffHmmModel(
            n_states=1, n_symbols=2, pi=[1.0], a=[[1.0]], b=[[1.0, 0.0]],
            c=[[[0.5, 0.5], [0.5, 0.5]]],
        )
        result = forward(model, [2])
        assert result.log_likelihood == -np.inf

    def test_symbol_out_of_range(self):
        with pytest.raises(DataFormatError, match="out of range"):
            forward(single_state_model(), [1, 3])

    def test_no_underflow_at_length_100000(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, 3, 3)
        obs = random_obs(rng, 3, 100_000)
        result = forward(model, obs)
        assert np.isfinite(result.log_likelihood)
        assert result.log_likelihood < -50_000  # genuinely tiny probability

    def test_standard_variant_matches_reference(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n, m, t = random_sizes(rng, max_length=10)
            model = random_model(rng, n, m, STANDARD)
            obs = random_obs(rng, m, t)
            _, _, ref_ll = reference_hmm.forward_loglik(
                model.pi, model.a, model.b, symbol_indices(obs, m)
            )
            assert forward(model, obs).log_likelihood == pytest.approx(ref_ll, abs=1e-12)


class TestBackward:
    def test_last_row_is_ones(self):
        rng = np.random.default_rng(1)
        model = random_model(rng, 3, 2)
        result = backward(model, random_obs(rng, 2, 6))
        assert np.array_equal(result.beta_hat[-1], np.ones(3))

    def test_single_state_chain_values(self):
        model = single_state_model()
        obs = [1, 2]
        trellis = forward(model, obs)
        result = backward(model, obs, trellis)
        # unscaled beta_1(1) = a * b(V2) * beta(2) * c(1,2) = 0.5 * 0.1 = 0.05;
        # beta_hat scales it by 1/norm_2
        beta_unscaled = result.beta_hat[0, 0] / trellis.scaling[1]
        assert beta_unscaled == pytest.approx(0.05, rel=1e-12)
        recovered = model.pi[0] * model.b[0, 0] * beta_unscaled
        assert recovered == pytest.approx(0.025, rel=1e-12)

    def test_recovers_forward_likelihood(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n, m, t = random_sizes(rng)
            model = random_model(rng, n, m)
            obs = random_obs(rng, m, t)
            trellis = forward(model, obs)
            result = backward(model, obs, trellis)
            start = float(np.sum(model.pi * model.b[:, symbol_indices(obs, m)[0]]
                                 * result.beta_hat[0]))
            log_lik = np.log(start) - np.sum(np.log(trellis.scaling[1:]))
            assert log_lik == pytest.approx(trellis.log_likelihood, rel=1e-10)

    def test_scaled_product_constant_over_time(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            n, m, t = random_sizes(rng, max_length=12)
            model = random_model(rng, n, m)
            obs = random_obs(rng, m, t)
            trellis = forward(model, obs)
            result = backward(model, obs, trellis)
            per_step = (trellis.alpha_hat * result.beta_hat).sum(axis=1)
            assert np.allclose(per_step, 1.0, rtol=1e-10)

    def test_impossible_sequence_raises(self):
        model = EffHmmModel(
            n_states=1, n_symbols=2, pi=[1.0], a=[[1.0]], b=[[1.0, 0.0]],
            c=[[[0.5, 0.5], [0.5, 0.5]]],
        )
        with pytest.raises(DegeneracyError):
            backward(model, [1, 2])

    def test_standard_variant_matches_reference(self):
        rng = np.random.default_rng(67)
        for _ in range(20):
            n, m, t = random_sizes(rng, max_length=10)
            model = random_model(rng, n, m, STANDARD)
            obs = random_obs(rng, m, t)
            o = symbol_indices(obs, m)
            _, norms, _ = reference_hmm.forward_loglik(model.pi, model.a, model.b, o)
            ref_beta = reference_hmm.backward_scaled(model.a, model.b, o, norms)
            got = backward(model, obs).beta_hat
            assert np.allclose(got, ref_beta, atol=1e-12)


class TestPosteriors:
    def test_single_state_occupancies_are_one(self):
        model = single_state_model()
        stats = posteriors(model, [1, 1, 2, 1])
        assert np.array_equal(stats.gamma, np.ones((4, 1)))
        assert np.array_equal(stats.xi, np.ones((3, 1, 1)))

    def test_gamma_rows_normalized(self):
        rng = np.random.default_rng(17)
        model = random_model(rng, 3, 3)
        stats = posteriors(model, random_obs(rng, 3, 10))
        assert np.allclose(stats.gamma.sum(axis=1), 1.0, atol=1e-10)

    def test_xi_marginalizes_to_gamma(self):
        rng = np.random.default_rng(19)
        model = random_model(rng, 3, 2)
        obs = random_obs(rng, 2, 8)
        stats = posteriors(model, obs)
        assert np.allclose(stats.xi.sum(axis=2), stats.gamma[:-1], atol=1e-10)

    def test_gamma_matches_enumeration(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            model = random_model(rng, int(rng.integers(1, 4)), 2)
            obs = random_obs(rng, 2, 5)
            expected = enumerate_posterior_gamma(model, obs)
            got = posteriors(model, obs).gamma
            assert np.allclose(got, expected, atol=1e-10)

    def test_single_symbol_sequence_has_empty_xi(self):
        rng = np.random.default_rng(29)
        model = random_model(rng, 2, 2)
        stats = posteriors(model, [1])
        assert stats.xi.shape == (0, 2, 2)
        assert stats.gamma.shape == (1, 2)

    def test_zero_likelihood_raises_degenerate_posterior(self):
        model = EffHmmModel(
            n_states=1, n_symbols=2, pi=[1.0], a=[[1.0]], b=[[1.0, 0.0]],
            c=[[[0.5, 0.5], [0.5, 0.5]]],
        )
        with pytest.raises(DegeneracyError, match="degenerate posterior"):
            posteriors(model, [2])

    def test_scaling_neutrality_on_short_sequences(self):
        # posteriors from scaled quantities equal posteriors from raw
        # unscaled arithmetic when the latter cannot underflow
        rng = np.random.default_rng(37)
        for _ in range(10):
            n, m, _ = random_sizes(rng)
            model = random_model(rng, n, m)
            obs = random_obs(rng, m, int(rng.integers(2, 9)))
            o = symbol_indices(obs, m)
            big_t = len(o)
            alpha = np.zeros((big_t, n))
            alpha[0] = model.pi * model.b[:, o[0]]
            for t in range(1, big_t):
                link = model.c[:, o[t - 1], o[t]]
                alpha[t] = ((alpha[t - 1] * link) @ model.a) * model.b[:, o[t]]
            beta = np.zeros((big_t, n))
            beta[-1] = 1.0
            for t in range(big_t - 2, -1, -1):
                link = model.c[:, o[t], o[t + 1]]
                beta[t] = (model.a @ (model.b[:, o[t + 1]] * beta[t + 1])) * link
            raw = alpha * beta
            gamma_unscaled = raw / raw.sum(axis=1, keepdims=True)
            got = posteriors(model, obs).gamma
            assert np.allclose(got, gamma_unscaled, atol=1e-10)


class TestViterbi:
    def test_single_state_path(self):
        path = viterbi(single_state_model(), [1, 2, 2, 1])
        assert path.states == (1, 1, 1, 1)

    def test_deterministic_alternation(self):
        model = EffHmmModel(
            n_states=2, n_symbols=2,
            pi=[1.0, 0.0],
            a=[[0.0, 1.0], [1.0, 0.0]],
            b=np.full((2, 2), 0.5),
            c=np.full((2, 2, 2), 0.5),
        )
        path = viterbi(model, [1, 1, 2, 2])
        assert path.states == (1, 2, 1, 2)

    def test_matches_enumeration(self):
        rng = np.random.default_rng(43)
        for _ in range(30):
            n, m, t = random_sizes(rng)
            model = random_model(rng, n, m)
            obs = random_obs(rng, m, t)
            best = enumerate_best_path(model, obs)
            got = viterbi(model, obs)
            assert got.states == best.states
            assert got.log_probability == pytest.approx(best.log_probability, abs=1e-10)

    def test_path_probability_bounded_by_likelihood(self):
        rng = np.random.default_rng(47)
        for _ in range(20):
            n, m, t = random_sizes(rng, max_length=10)
            model = random_model(rng, n, m)
            obs = random_obs(rng, m, t)
            path = viterbi(model, obs)
            ll = forward(model, obs).log_likelihood
            assert np.exp(path.log_probability) <= np.exp(ll) + 1e-12

    def test_all_zero_paths_still_deterministic(self):
        model = EffHmmModel(
            n_states=2, n_symbols=2,
            pi=[1.0, 0.0],
            a=[[0.0, 1.0], [1.0, 0.0]],
            b=[[1.0, 0.0], [1.0, 0.0]],
            c=np.full((2, 2, 2), 0.5),
        )
        path = viterbi(model, [2, 2])
        assert path.log_probability == -np.inf
        assert path.states == (1, 1)

    def test_standard_variant_matches_reference(self):
        rng = np.random.default_rng(53)
        for _ in range(20):
            n, m, t = random_sizes(rng, max_length=10)
            model = random_model(rng, n, m, STANDARD)
            obs = random_obs(rng, m, t)
            ref_path, ref_log = reference_hmm.viterbi_path(
                model.pi, model.a, model.b, symbol_indices(obs, m)
            )
            got = viterbi(model, obs)
            assert got.states == tuple(i + 1 for i in ref_path)
            assert got.log_probability == pytest.approx(ref_log, abs=1e-12)


def test_weather_smoke():
    model = weather_model()
    obs = [1, 1, 2, 2, 2, 1]
    trellis = forward(model, obs)
    assert -10 < trellis.log_likelihood < 0
    assert np.exp(trellis.log_likelihood) == pytest.approx(
        enumerate_likelihood(model, obs), rel=1e-10
    )
    stats = posteriors(model, obs)
    assert np.allclose(stats.gamma.sum(axis=1), 1.0)
    path = viterbi(model, obs)
    assert len(path.states) == len(obs)
    assert set(path.states) <= {1, 2}
