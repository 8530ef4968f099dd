"""Shared test helpers: random model generation and the independent
two-pass posterior oracle the filter is checked against."""

from __future__ import annotations

import numpy as np

from beliefshield.model import Belief, Mpomdp


def random_simplex(rng: np.random.Generator, n: int) -> np.ndarray:
    p = rng.random(n) + 1e-3
    return p / p.sum()


def random_model(rng: np.random.Generator, max_states: int = 6,
                 max_agents: int = 3, max_radix: int = 3) -> Mpomdp:
    """A random dense model with strictly positive observation rows, so
    every observation has positive likelihood from every belief."""
    n = int(rng.integers(1, max_states + 1))
    n_agents = int(rng.integers(1, max_agents + 1))
    action_radices = [int(rng.integers(1, max_radix + 1)) for _ in range(n_agents)]
    obs_radices = [int(rng.integers(1, max_radix + 1)) for _ in range(n_agents)]
    na = int(np.prod(action_radices))
    nz = int(np.prod(obs_radices))

    transition = rng.random((n, na, n)) + 1e-3
    transition /= transition.sum(axis=2, keepdims=True)
    observation = rng.random((n, na, nz)) + 1e-3
    observation /= observation.sum(axis=2, keepdims=True)
    reward = rng.normal(size=(n, na))

    return Mpomdp(
        state_names=tuple(f"s{i}" for i in range(n)),
        agent_names=tuple(f"agent{i}" for i in range(n_agents)),
        action_names=tuple(
            tuple(f"a{i}_{j}" for j in range(r)) for i, r in enumerate(action_radices)),
        observation_names=tuple(
            tuple(f"z{i}_{j}" for j in range(r)) for i, r in enumerate(obs_radices)),
        initial=Belief(random_simplex(rng, n)),
        transition=transition,
        observation=observation,
        reward=reward,
    )


def two_pass_posterior(b: Belief, action: int, obs: int, m: Mpomdp) -> np.ndarray | None:
    """Reference Bayes update, written as two explicit passes: predict
    each successor state with a scalar loop, then correct by the
    observation likelihood and normalize. Returns None when the
    observation has zero probability."""
    n = m.n_states
    predicted = [0.0] * n
    for q_next in range(n):
        acc = 0.0
        for q in range(n):
            acc += float(b.probs[q]) * float(m.transition[q, action, q_next])
        predicted[q_next] = acc
    unnormalized = [float(m.observation[q_next, action, obs]) * predicted[q_next]
                    for q_next in range(n)]
    total = sum(unnormalized)
    if total <= 1e-12:
        return None
    return np.array([u / total for u in unnormalized])
