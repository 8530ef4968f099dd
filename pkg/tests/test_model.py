"""Filter, encoding, and sampling checks for the model module."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefshield.errors import ZeroLikelihood
from beliefshield.model import (
    Belief, JointAction, Mpomdp, belief_update, components_from_flat,
    expected_reward, flat_from_components, observation_likelihoods,
    predicted_belief, sample_initial_state, sample_observation,
    sample_transition, validate_model,
)

from conftest import random_model, random_simplex, two_pass_posterior


def reference_model() -> Mpomdp:
    """Two states, one agent, identity transitions, and an observation
    that favors s0 with likelihood 0.8. From the uniform belief the
    posterior after that observation is exactly (0.8, 0.2)."""
    return Mpomdp(
        state_names=("s0", "s1"),
        agent_names=("solo",),
        action_names=(("go",),),
        observation_names=(("hot", "cold"),),
        initial=Belief(np.array([0.5, 0.5])),
        transition=np.eye(2)[:, None, :],
        observation=np.array([[[0.8, 0.2]], [[0.2, 0.8]]]),
        reward=np.array([[1.0], [0.0]]),
    )


def test_frozen_posterior_example():
    m = reference_model()
    posterior = belief_update(m.initial, 0, 0, m)
    assert np.allclose(posterior.probs, [0.8, 0.2], atol=1e-15)


def test_identity_dynamics_uniform_observation_is_fixed_point():
    m = Mpomdp(
        state_names=("s0", "s1", "s2"),
        agent_names=("solo",),
        action_names=(("go",),),
        observation_names=(("z",),),
        initial=Belief(np.array([0.5, 0.25, 0.25])),
        transition=np.eye(3)[:, None, :],
        observation=np.ones((3, 1, 1)),
        reward=np.zeros((3, 1)),
    )
    b = m.initial
    for _ in range(5):
        b = belief_update(b, 0, 0, m)
    assert np.array_equal(b.probs, m.initial.probs)


def test_filter_matches_two_pass_oracle_on_random_models():
    rng = np.random.default_rng(20260817)
    for _ in range(100):
        m = random_model(rng)
        b = Belief(random_simplex(rng, m.n_states))
        a = int(rng.integers(m.n_joint_actions))
        z = int(rng.integers(m.n_joint_observations))
        expected = two_pass_posterior(b, a, z, m)
        assert expected is not None
        got = belief_update(b, a, z, m)
        assert np.max(np.abs(got.probs - expected)) <= 1e-12


def test_filter_matches_monte_carlo_conditional():
    # Empirical check: simulate (state, next state, observation) and
    # condition on the observation; the histogram approximates the
    # posterior.
    m = reference_model()
    rng = np.random.default_rng(3)
    draws = 100_000
    states = rng.choice(2, size=draws, p=m.initial.probs)
    hits = np.zeros(2)
    for q in states:
        q_next = sample_transition(int(q), 0, m, rng)
        z = sample_observation(q_next, 0, m, rng)
        if z == 0:
            hits[q_next] += 1
    empirical = hits / hits.sum()
    posterior = belief_update(m.initial, 0, 0, m)
    assert np.max(np.abs(empirical - posterior.probs)) < 0.01


def test_zero_likelihood_raises_with_context():
    m = Mpomdp(
        state_names=("s0", "s1"),
        agent_names=("solo",),
        action_names=(("go",),),
        observation_names=(("za", "zb"),),
        initial=Belief(np.array([1.0, 0.0])),
        transition=np.eye(2)[:, None, :],
        observation=np.array([[[1.0, 0.0]], [[0.0, 1.0]]]),
        reward=np.zeros((2, 1)),
    )
    with pytest.raises(ZeroLikelihood) as exc:
        belief_update(m.initial, 0, 1, m)
    assert exc.value.action == 0
    assert exc.value.observation == 1
    assert exc.value.denominator <= 1e-12


def test_posterior_is_normalized_without_renormalizing_inputs():
    rng = np.random.default_rng(11)
    m = random_model(rng)
    b = Belief(random_simplex(rng, m.n_states))
    post = belief_update(b, 0, 0, m)
    assert abs(float(post.probs.sum()) - 1.0) < 1e-12


def test_observation_likelihoods_sum_to_one():
    rng = np.random.default_rng(12)
    m = random_model(rng)
    b = Belief(random_simplex(rng, m.n_states))
    for a in range(m.n_joint_actions):
        lik = observation_likelihoods(b, a, m)
        assert abs(float(lik.sum()) - 1.0) < 1e-9
        assert np.all(lik >= 0.0)


def test_predicted_belief_and_expected_reward():
    m = reference_model()
    b = Belief(np.array([0.25, 0.75]))
    assert np.array_equal(predicted_belief(b, 0, m), b.probs)
    assert expected_reward(b, 0, m) == pytest.approx(0.25)


def test_validate_model_flags_bad_rows_with_indices():
    m = reference_model()
    bad_t = m.transition.copy()
    bad_t[1, 0, :] = [0.7, 0.2]
    bad = Mpomdp(
        state_names=m.state_names,
        agent_names=m.agent_names,
        action_names=m.action_names,
        observation_names=m.observation_names,
        initial=m.initial,
        transition=bad_t,
        observation=m.observation,
        reward=m.reward,
    )
    violations = validate_model(bad)
    assert len(violations) == 1
    assert violations[0].table == "transition"
    assert violations[0].indices == (1, 0)
    assert "0.9" in violations[0].message


def test_validate_model_accepts_valid_model():
    rng = np.random.default_rng(13)
    assert validate_model(random_model(rng)) == []


def test_belief_rejects_bad_vectors():
    with pytest.raises(ValueError):
        Belief(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        Belief(np.array([1.2, -0.2]))
    with pytest.raises(ValueError):
        Belief(np.array([[0.5, 0.5]]))


def test_belief_is_read_only():
    b = Belief(np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        b.probs[0] = 1.0


def test_mixed_radix_round_trip_exhaustive():
    radices = (3, 2, 4)
    size = 3 * 2 * 4
    seen = set()
    for flat in range(size):
        comps = components_from_flat(flat, radices)
        assert flat_from_components(comps, radices) == flat
        seen.add(comps)
    assert len(seen) == size
    # Agent 0 is most significant.
    assert components_from_flat(0, radices) == (0, 0, 0)
    assert components_from_flat(size - 1, radices) == (2, 1, 3)
    assert flat_from_components((1, 0, 0), radices) == 8


def test_mixed_radix_rejects_out_of_range():
    with pytest.raises(ValueError):
        flat_from_components((3,), (3,))
    with pytest.raises(ValueError):
        components_from_flat(6, (3, 2))
    with pytest.raises(ValueError):
        flat_from_components((0, 0), (3,))


@given(st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=4),
       st.data())
def test_mixed_radix_round_trip_property(radices, data):
    radices = tuple(radices)
    size = int(np.prod(radices))
    flat = data.draw(st.integers(min_value=0, max_value=size - 1))
    comps = components_from_flat(flat, radices)
    assert len(comps) == len(radices)
    assert all(0 <= c < r for c, r in zip(comps, radices))
    assert flat_from_components(comps, radices) == flat


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_posterior_is_simplex_point_property(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng)
    b = Belief(random_simplex(rng, m.n_states))
    a = int(rng.integers(m.n_joint_actions))
    z = int(rng.integers(m.n_joint_observations))
    post = belief_update(b, a, z, m)
    assert np.all(post.probs >= 0.0)
    assert abs(float(post.probs.sum()) - 1.0) < 1e-9


def test_sampling_follows_deterministic_rows():
    m = Mpomdp(
        state_names=("s0", "s1"),
        agent_names=("solo",),
        action_names=(("go",),),
        observation_names=(("z0", "z1"),),
        initial=Belief(np.array([0.0, 1.0])),
        transition=np.array([[[0.0, 1.0]], [[1.0, 0.0]]]),
        observation=np.array([[[1.0, 0.0]], [[0.0, 1.0]]]),
        reward=np.zeros((2, 1)),
    )
    rng = np.random.default_rng(0)
    assert sample_initial_state(m, rng) == 1
    assert sample_transition(0, 0, m, rng) == 1
    assert sample_transition(1, 0, m, rng) == 0
    assert sample_observation(0, 0, m, rng) == 0
    assert sample_observation(1, 0, m, rng) == 1


def test_sampling_matches_row_frequencies():
    m = reference_model()
    rng = np.random.default_rng(42)
    hits = sum(sample_observation(0, 0, m, rng) == 0 for _ in range(50_000))
    assert hits / 50_000 == pytest.approx(0.8, abs=0.01)


def test_joint_action_labels():
    rng = np.random.default_rng(21)
    m = random_model(rng, max_states=3)
    for flat in range(m.n_joint_actions):
        ja = m.joint_action(flat)
        assert isinstance(ja, JointAction)
        assert ja.flat_index == flat
        label = m.joint_action_label(flat)
        assert len(label) == m.n_agents
