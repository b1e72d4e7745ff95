"""Brute-force reference implementations by exhaustive path enumeration.

Ground truth for tests: exact N**T sums in plain double precision with
compensated (Kahan) accumulation.  Deliberately simple and slow; guarded
to N**T <= 10**7.
"""

import itertools
import math

import numpy as np

from .inference import StatePath, symbol_indices
from .model import DegeneracyError, EffHmmModel

PATH_GUARD = 10**7


def _guard(model: EffHmmModel, length: int) -> None:
    if model.n_states**length > PATH_GUARD:
        raise ValueError(
            f"{model.n_states}**{length} paths exceed the enumeration guard of {PATH_GUARD}"
        )


def _path_mass(pi, a, b, c, o, path) -> float:
    mass = pi[path[0]] * b[path[0], o[0]]
    for t in range(len(o) - 1):
        i, j = path[t], path[t + 1]
        mass *= a[i, j] * b[j, o[t + 1]] * c[i, o[t], o[t + 1]]
    return mass


def enumerate_likelihood(model: EffHmmModel, obs) -> float:
    """Sum of path masses pi * b * prod(a * b * c) over every state path."""
    o = symbol_indices(obs, model.n_symbols)
    _guard(model, len(o))
    pi, a, b, c = model.pi, model.a, model.b, model.c
    total = 0.0
    comp = 0.0
    for path in itertools.product(range(model.n_states), repeat=len(o)):
        y = _path_mass(pi, a, b, c, o, path) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def enumerate_best_path(model: EffHmmModel, obs) -> StatePath:
    """Argmax path under the same product; ties go to the lexicographically smallest path."""
    o = symbol_indices(obs, model.n_symbols)
    _guard(model, len(o))
    pi, a, b, c = model.pi, model.a, model.b, model.c
    best_mass = -1.0
    best_path = None
    for path in itertools.product(range(model.n_states), repeat=len(o)):
        mass = _path_mass(pi, a, b, c, o, path)
        if mass > best_mass:
            best_mass = mass
            best_path = path
    log_probability = math.log(best_mass) if best_mass > 0.0 else -math.inf
    return StatePath(
        states=tuple(i + 1 for i in best_path),
        log_probability=log_probability,
    )


def enumerate_posterior_gamma(model: EffHmmModel, obs) -> np.ndarray:
    """gamma[t, i] = mass of paths with state i at time t, over the total mass."""
    o = symbol_indices(obs, model.n_symbols)
    _guard(model, len(o))
    pi, a, b, c = model.pi, model.a, model.b, model.c
    gamma = np.zeros((len(o), model.n_states))
    total = 0.0
    for path in itertools.product(range(model.n_states), repeat=len(o)):
        mass = _path_mass(pi, a, b, c, o, path)
        total += mass
        for t, i in enumerate(path):
            gamma[t, i] += mass
    if total <= 0.0:
        raise DegeneracyError("total path mass is zero; posterior undefined")
    return gamma / total
