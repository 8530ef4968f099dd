"""Multi-agent POMDP model: joint dynamics tables, beliefs, and the
exact Bayes filter over the joint state.

The model is a tuple of dense tables over a finite joint state space Q:
transition[q, a, q'] is the probability of landing in q' after joint
action a in state q, observation[q', a, z] the probability of the joint
observation z in the successor state, reward[q, a] an immediate reward.
Joint actions and observations are flat mixed-radix encodings of the
per-agent components, agent 0 most significant.

All stochastic rows must sum to 1 within 1e-9; loaders renormalize once
after validation, the filter itself never renormalizes inputs silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroLikelihood

SIMPLEX_ATOL = 1e-9
LIKELIHOOD_FLOOR = 1e-12


def flat_from_components(components: tuple[int, ...], radices: tuple[int, ...]) -> int:
    """Mixed-radix encode, first component most significant."""
    if len(components) != len(radices):
        raise ValueError(f"got {len(components)} components for {len(radices)} agents")
    flat = 0
    for c, r in zip(components, radices):
        if not 0 <= c < r:
            raise ValueError(f"component {c} out of range for radix {r}")
        flat = flat * r + c
    return flat


def components_from_flat(flat: int, radices: tuple[int, ...]) -> tuple[int, ...]:
    """Invert flat_from_components."""
    size = int(np.prod(radices)) if radices else 1
    if not 0 <= flat < size:
        raise ValueError(f"flat index {flat} out of range for radices {radices}")
    out = []
    for r in reversed(radices):
        out.append(flat % r)
        flat //= r
    return tuple(reversed(out))


@dataclass(frozen=True)
class JointAction:
    """One action per agent, plus its flat table index."""

    components: tuple[int, ...]
    flat_index: int

    @classmethod
    def from_components(cls, components: tuple[int, ...], radices: tuple[int, ...]) -> "JointAction":
        return cls(tuple(components), flat_from_components(tuple(components), radices))

    @classmethod
    def from_flat(cls, flat: int, radices: tuple[int, ...]) -> "JointAction":
        return cls(components_from_flat(flat, radices), flat)


@dataclass(frozen=True)
class JointObservation:
    """One observation per agent, plus its flat table index."""

    components: tuple[int, ...]
    flat_index: int

    @classmethod
    def from_components(cls, components: tuple[int, ...], radices: tuple[int, ...]) -> "JointObservation":
        return cls(tuple(components), flat_from_components(tuple(components), radices))

    @classmethod
    def from_flat(cls, flat: int, radices: tuple[int, ...]) -> "JointObservation":
        return cls(components_from_flat(flat, radices), flat)


@dataclass(frozen=True)
class Belief:
    """Point on the probability simplex over the joint state space."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        if p.ndim != 1:
            raise ValueError(f"belief must be a vector, got shape {p.shape}")
        if np.any(p < -SIMPLEX_ATOL) or np.any(p > 1.0 + SIMPLEX_ATOL):
            raise ValueError("belief entries must lie in [0, 1]")
        total = float(p.sum())
        if abs(total - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"belief sums to {total}, not 1 within {SIMPLEX_ATOL}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __getitem__(self, q: int) -> float:
        return float(self.probs[q])

    def __len__(self) -> int:
        return len(self.probs)

    @classmethod
    def uniform(cls, n: int) -> "Belief":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, q: int, n: int) -> "Belief":
        p = np.zeros(n)
        p[q] = 1.0
        return cls(p)


@dataclass(frozen=True)
class Mpomdp:
    """Dense multi-agent POMDP over a finite joint state space.

    Tables:
        transition:  (n_states, n_joint_actions, n_states)
        observation: (n_states, n_joint_actions, n_joint_observations)
        reward:      (n_states, n_joint_actions)
    """

    state_names: tuple[str, ...]
    agent_names: tuple[str, ...]
    action_names: tuple[tuple[str, ...], ...]       # per agent
    observation_names: tuple[tuple[str, ...], ...]  # per agent
    initial: Belief
    transition: np.ndarray
    observation: np.ndarray
    reward: np.ndarray
    state_index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float).copy()
        o = np.asarray(self.observation, dtype=float).copy()
        r = np.asarray(self.reward, dtype=float).copy()
        n, na, nz = self.n_states, self.n_joint_actions, self.n_joint_observations
        if t.shape != (n, na, n):
            raise ValueError(f"transition shape {t.shape}, expected {(n, na, n)}")
        if o.shape != (n, na, nz):
            raise ValueError(f"observation shape {o.shape}, expected {(n, na, nz)}")
        if r.shape != (n, na):
            raise ValueError(f"reward shape {r.shape}, expected {(n, na)}")
        if len(self.initial) != n:
            raise ValueError(f"initial belief over {len(self.initial)} states, model has {n}")
        if len(set(self.state_names)) != n:
            raise ValueError("state names must be unique")
        for arr in (t, o, r):
            arr.setflags(write=False)
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "observation", o)
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "state_index", {s: i for i, s in enumerate(self.state_names)})

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_agents(self) -> int:
        return len(self.agent_names)

    @property
    def action_radices(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.action_names)

    @property
    def observation_radices(self) -> tuple[int, ...]:
        return tuple(len(z) for z in self.observation_names)

    @property
    def n_joint_actions(self) -> int:
        return int(np.prod(self.action_radices))

    @property
    def n_joint_observations(self) -> int:
        return int(np.prod(self.observation_radices))

    def joint_action(self, flat: int) -> JointAction:
        return JointAction.from_flat(flat, self.action_radices)

    def joint_observation(self, flat: int) -> JointObservation:
        return JointObservation.from_flat(flat, self.observation_radices)

    def joint_action_label(self, flat: int) -> tuple[str, ...]:
        comps = components_from_flat(flat, self.action_radices)
        return tuple(self.action_names[i][c] for i, c in enumerate(comps))

    def joint_observation_label(self, flat: int) -> tuple[str, ...]:
        comps = components_from_flat(flat, self.observation_radices)
        return tuple(self.observation_names[i][c] for i, c in enumerate(comps))


@dataclass(frozen=True)
class Violation:
    """One failed validity check, addressed by table and index path."""

    table: str
    indices: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        where = ", ".join(str(i) for i in self.indices)
        return f"{self.table}[{where}]: {self.message}"


def _check_rows(table: str, rows: np.ndarray, out: list[Violation]) -> None:
    # rows: (..., k) stochastic along the last axis
    sums = rows.sum(axis=-1)
    bad_sum = np.argwhere(np.abs(sums - 1.0) > SIMPLEX_ATOL)
    for idx in bad_sum:
        out.append(Violation(table, tuple(int(i) for i in idx),
                             f"row sums to {sums[tuple(idx)]:.12g}, not 1"))
    bad_entry = np.argwhere((rows < -SIMPLEX_ATOL) | (rows > 1.0 + SIMPLEX_ATOL))
    for idx in bad_entry:
        out.append(Violation(table, tuple(int(i) for i in idx),
                             f"entry {rows[tuple(idx)]:.12g} outside [0, 1]"))


def validate_tables(initial: np.ndarray, transition: np.ndarray,
                    observation: np.ndarray) -> list[Violation]:
    """Check stochasticity of every transition/observation row and the
    initial distribution. Empty result means the tables are valid."""
    out: list[Violation] = []
    _check_rows("transition", np.asarray(transition, dtype=float), out)
    _check_rows("observation", np.asarray(observation, dtype=float), out)
    _check_rows("initial", np.asarray(initial, dtype=float)[None, :], out)
    return out


def validate_model(m: Mpomdp) -> list[Violation]:
    """validate_tables over a built model."""
    return validate_tables(m.initial.probs, m.transition, m.observation)


def predicted_belief(b: Belief, action: int, m: Mpomdp) -> np.ndarray:
    """One-step prediction: push b through the transition kernel, no
    observation correction. Returns a raw probability vector."""
    return b.probs @ m.transition[:, action, :]


def belief_update(b: Belief, action: int, obs: int, m: Mpomdp) -> Belief:
    """Exact Bayes filter step over the joint state.

    posterior(q') ∝ observation[q', a, z] * sum_q transition[q, a, q'] * b(q)

    Raises ZeroLikelihood when the normalizer is <= 1e-12: the
    observation is impossible under the predicted belief and the
    posterior is undefined. Never renormalizes its inputs.
    """
    numer = m.observation[:, action, obs] * predicted_belief(b, action, m)
    denom = float(numer.sum())
    if denom <= LIKELIHOOD_FLOOR:
        raise ZeroLikelihood(action, obs, denom)
    return Belief(numer / denom)


def observation_likelihoods(b: Belief, action: int, m: Mpomdp) -> np.ndarray:
    """Predicted probability of each joint observation after taking
    `action` from belief b. Sums to 1 for a valid model."""
    return predicted_belief(b, action, m) @ m.observation[:, action, :]


def expected_reward(b: Belief, action: int, m: Mpomdp) -> float:
    """Belief-weighted immediate reward sum_q b(q) * reward[q, a]."""
    return float(b.probs @ m.reward[:, action])


def _sample_index(row: np.ndarray, rng: np.random.Generator) -> int:
    # Inverse-CDF draw; cheap and reproducible for a given generator state.
    u = rng.random()
    return int(np.searchsorted(np.cumsum(row), u, side="right").clip(0, len(row) - 1))


def sample_transition(q: int, action: int, m: Mpomdp, rng: np.random.Generator) -> int:
    """Draw a successor state from transition[q, action, :]."""
    return _sample_index(m.transition[q, action, :], rng)


def sample_observation(q_next: int, action: int, m: Mpomdp, rng: np.random.Generator) -> int:
    """Draw a joint observation from observation[q_next, action, :]."""
    return _sample_index(m.observation[q_next, action, :], rng)


def sample_initial_state(m: Mpomdp, rng: np.random.Generator) -> int:
    """Draw the hidden start state from the initial distribution."""
    return _sample_index(m.initial.probs, rng)
