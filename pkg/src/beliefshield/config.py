"""Scenario configuration: YAML schema, validation, and round-trip.

A scenario file is a mapping with these keys (* = required):

  name            scenario label (default: file stem)
  states*         list of state names
  agents*         list of {name, actions, observations}
  initial*        map state -> probability (missing states are 0)
  transition*     list of {from, action?, next: {state: prob}}
  observation*    list of {next, action?, dist: {joint obs: prob}}
  reward          list of {state, action?, value} (default: all zero)
  predicates      map name -> belief expression text
  formula*        formula text over predicates and state sets
  monitor         {delta, gamma, rho, eps}
  policy          {kind: fixed|greedy|random, action?: [name, ...]}
  shield          off | literal | conservative
  horizon         steps per episode (default 100)
  episodes        episodes per batch (default 1)
  seed            base RNG seed (default 0)

`action` is a list of per-agent action names; omitting it makes the
entry apply to every joint action. Joint observation keys join the
per-agent observation names with '+'. Every (state, action) pair must
be covered by exactly one transition entry and one observation entry.
Rows are validated as written (each must already sum to 1 within 1e-9)
and only then renormalized exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .barrier import FtParams, LinearAlpha
from .errors import BeliefShieldError, ConfigError
from .ldtl import BeliefExpr, Formula, expr_text
from .model import Belief, Mpomdp, flat_from_components, validate_tables
from .monitor import MonitorConfig, compile_monitor
from .parsing import parse_expr, parse_formula
from .sim import (
    SHIELD_MODES, FixedAction, GreedyReward, NominalPolicy, RandomUniform,
    Scenario,
)

OBS_JOIN = "+"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: Mpomdp
    predicates: dict[str, BeliefExpr]
    formula: Formula
    formula_text: str
    monitor: MonitorConfig
    policy: NominalPolicy
    shield_mode: str
    horizon: int
    episodes: int
    seed: int

    def to_scenario(self, abort_on_violation: bool = False) -> Scenario:
        return Scenario(
            model=self.model,
            monitor=compile_monitor(self.formula, self.model, self.monitor),
            policy=self.policy,
            shield_mode=self.shield_mode,
            horizon=self.horizon,
            abort_on_violation=abort_on_violation,
        )


def _require(data: dict, key: str, source: str):
    if key not in data:
        raise ConfigError(f"missing required key {key!r}", source)
    return data[key]


def _name_list(value, path: str) -> list[str]:
    if (not isinstance(value, list) or not value
            or not all(isinstance(s, str) and s for s in value)):
        raise ConfigError("expected a non-empty list of names", path)
    seen = set()
    for s in value:
        if s in seen:
            raise ConfigError(f"duplicate name {s!r}", path)
        seen.add(s)
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    return float(value)


def _parse_agents(raw, path: str) -> tuple[list[str], list[list[str]], list[list[str]]]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("expected a non-empty list of agents", path)
    names, actions, observations = [], [], []
    for i, entry in enumerate(raw):
        here = f"{path}[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError("expected a mapping", here)
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError("missing agent name", f"{here}.name")
        if name in names:
            raise ConfigError(f"duplicate agent name {name!r}", f"{here}.name")
        names.append(name)
        actions.append(_name_list(entry.get("actions"), f"{here}.actions"))
        observations.append(_name_list(entry.get("observations"), f"{here}.observations"))
        extra = set(entry) - {"name", "actions", "observations"}
        if extra:
            raise ConfigError(f"unknown keys: {sorted(extra)}", here)
    return names, actions, observations


class _JointIndex:
    """Name lookup for states and joint actions/observations."""

    def __init__(self, states: list[str], action_names: list[list[str]],
                 observation_names: list[list[str]]):
        self.state_index = {s: i for i, s in enumerate(states)}
        self.action_names = action_names
        self.observation_names = observation_names
        self.action_radices = [len(a) for a in action_names]
        self.n_joint_actions = int(np.prod(self.action_radices))
        obs_radices = [len(z) for z in observation_names]
        self.joint_obs_index: dict[str, int] = {}
        for flat in range(int(np.prod(obs_radices))):
            rest, comps = flat, []
            for r in reversed(obs_radices):
                comps.append(rest % r)
                rest //= r
            comps.reverse()
            label = OBS_JOIN.join(names[c] for names, c in zip(observation_names, comps))
            self.joint_obs_index[label] = flat

    def state(self, name, path: str) -> int:
        if name not in self.state_index:
            raise ConfigError(f"unknown state {name!r}", path)
        return self.state_index[name]

    def joint_action(self, value, path: str) -> int:
        if (not isinstance(value, list) or len(value) != len(self.action_names)
                or not all(isinstance(a, str) for a in value)):
            raise ConfigError(
                f"expected a list of {len(self.action_names)} action names", path)
        comps = []
        for i, (name, known) in enumerate(zip(value, self.action_names)):
            if name not in known:
                raise ConfigError(f"unknown action {name!r} for agent {i}", f"{path}[{i}]")
            comps.append(known.index(name))
        return flat_from_components(tuple(comps), tuple(self.action_radices))

    def joint_observation(self, label, path: str) -> int:
        if label not in self.joint_obs_index:
            raise ConfigError(f"unknown joint observation {label!r}", path)
        return self.joint_obs_index[label]

    def actions_for(self, entry: dict, path: str) -> list[int]:
        if "action" in entry:
            return [self.joint_action(entry["action"], f"{path}.action")]
        return list(range(self.n_joint_actions))


def _fill_rows(table: np.ndarray, covered: np.ndarray, entries, idx: _JointIndex,
               key_from: str, key_dist: str, dist_index, path: str) -> None:
    """Populate rows of a (state, action, ...) table from config entries."""
    if not isinstance(entries, list) or not entries:
        raise ConfigError("expected a non-empty list of entries", path)
    for i, entry in enumerate(entries):
        here = f"{path}[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError("expected a mapping", here)
        extra = set(entry) - {key_from, "action", key_dist}
        if extra:
            raise ConfigError(f"unknown keys: {sorted(extra)}", here)
        q = idx.state(entry.get(key_from), f"{here}.{key_from}")
        dist = entry.get(key_dist)
        if not isinstance(dist, dict) or not dist:
            raise ConfigError("expected a non-empty probability map", f"{here}.{key_dist}")
        row = np.zeros(table.shape[2])
        for name, value in dist.items():
            col = dist_index(name, f"{here}.{key_dist}.{name}")
            row[col] = _number(value, f"{here}.{key_dist}.{name}")
        for a in idx.actions_for(entry, here):
            if covered[q, a]:
                raise ConfigError(
                    f"duplicate entry for state {entry[key_from]!r}, "
                    f"joint action {a}", here)
            covered[q, a] = True
            table[q, a, :] = row


def _check_covered(covered: np.ndarray, states: list[str], path: str) -> None:
    missing = np.argwhere(~covered)
    if missing.size:
        q, a = missing[0]
        raise ConfigError(
            f"{len(missing)} (state, action) pairs have no entry; first missing: "
            f"state {states[q]!r}, joint action {a}", path)


def parse_config(data, source: str = "<config>") -> ScenarioConfig:
    """Validate a parsed YAML mapping and build the scenario config."""
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", source)
    known = {"name", "states", "agents", "initial", "transition", "observation",
             "reward", "predicates", "formula", "monitor", "policy", "shield",
             "horizon", "episodes", "seed"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown keys: {sorted(extra)}", source)

    states = _name_list(_require(data, "states", source), "states")
    agent_names, action_names, observation_names = _parse_agents(
        _require(data, "agents", source), "agents")
    idx = _JointIndex(states, action_names, observation_names)
    n, na = len(states), idx.n_joint_actions
    nz = len(idx.joint_obs_index)

    initial_raw = _require(data, "initial", source)
    if not isinstance(initial_raw, dict) or not initial_raw:
        raise ConfigError("expected a non-empty map state -> probability", "initial")
    p0 = np.zeros(n)
    for name, value in initial_raw.items():
        p0[idx.state(name, f"initial.{name}")] = _number(value, f"initial.{name}")

    transition = np.zeros((n, na, n))
    covered = np.zeros((n, na), dtype=bool)
    _fill_rows(transition, covered, _require(data, "transition", source), idx,
               "from", "next", idx.state, "transition")
    _check_covered(covered, states, "transition")

    observation = np.zeros((n, na, nz))
    covered = np.zeros((n, na), dtype=bool)
    _fill_rows(observation, covered, _require(data, "observation", source), idx,
               "next", "dist", idx.joint_observation, "observation")
    _check_covered(covered, states, "observation")

    reward = np.zeros((n, na))
    reward_set = np.zeros((n, na), dtype=bool)
    for i, entry in enumerate(data.get("reward") or []):
        here = f"reward[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError("expected a mapping", here)
        extra = set(entry) - {"state", "action", "value"}
        if extra:
            raise ConfigError(f"unknown keys: {sorted(extra)}", here)
        q = idx.state(entry.get("state"), f"{here}.state")
        value = _number(entry.get("value"), f"{here}.value")
        for a in idx.actions_for(entry, here):
            if reward_set[q, a]:
                raise ConfigError(
                    f"duplicate reward for state {entry['state']!r}, joint action {a}",
                    here)
            reward_set[q, a] = True
            reward[q, a] = value

    violations = validate_tables(p0, transition, observation)
    if violations:
        shown = "; ".join(str(v) for v in violations[:5])
        more = f" (and {len(violations) - 5} more)" if len(violations) > 5 else ""
        raise ConfigError(f"model tables are not stochastic: {shown}{more}", source)
    # Validation passed: renormalize rows exactly.
    p0 = p0 / p0.sum()
    transition = transition / transition.sum(axis=2, keepdims=True)
    observation = observation / observation.sum(axis=2, keepdims=True)

    model = Mpomdp(
        state_names=tuple(states),
        agent_names=tuple(agent_names),
        action_names=tuple(tuple(a) for a in action_names),
        observation_names=tuple(tuple(z) for z in observation_names),
        initial=Belief(p0),
        transition=transition,
        observation=observation,
        reward=reward,
    )

    predicates: dict[str, BeliefExpr] = {}
    for name, text in (data.get("predicates") or {}).items():
        if not isinstance(text, str):
            raise ConfigError("expected expression text", f"predicates.{name}")
        try:
            predicates[name] = parse_expr(text, idx.state_index)
        except BeliefShieldError as exc:
            raise ConfigError(str(exc), f"predicates.{name}") from exc

    formula_text = _require(data, "formula", source)
    if not isinstance(formula_text, str):
        raise ConfigError("expected formula text", "formula")
    try:
        formula = parse_formula(formula_text, predicates, idx.state_index)
    except BeliefShieldError as exc:
        raise ConfigError(str(exc), "formula") from exc

    mon_raw = data.get("monitor") or {}
    if not isinstance(mon_raw, dict):
        raise ConfigError("expected a mapping", "monitor")
    extra = set(mon_raw) - {"delta", "gamma", "rho", "eps"}
    if extra:
        raise ConfigError(f"unknown keys: {sorted(extra)}", "monitor")
    try:
        monitor = MonitorConfig(
            delta=_number(mon_raw.get("delta", 1e-3), "monitor.delta"),
            alpha=LinearAlpha(_number(mon_raw.get("gamma", 0.5), "monitor.gamma")),
            ft=FtParams(
                rho=_number(mon_raw.get("rho", 0.99), "monitor.rho"),
                eps=_number(mon_raw.get("eps", 0.1), "monitor.eps"),
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "monitor") from exc

    # The formula must also compile into obligations; a parseable but
    # unmonitorable shape is a config error, not a runtime one.
    try:
        compile_monitor(formula, model, monitor)
    except BeliefShieldError as exc:
        raise ConfigError(str(exc), "formula") from exc

    pol_raw = data.get("policy") or {"kind": "greedy"}
    if not isinstance(pol_raw, dict):
        raise ConfigError("expected a mapping", "policy")
    kind = pol_raw.get("kind")
    policy: NominalPolicy
    if kind == "fixed":
        extra = set(pol_raw) - {"kind", "action"}
        if extra:
            raise ConfigError(f"unknown keys: {sorted(extra)}", "policy")
        policy = FixedAction(idx.joint_action(pol_raw.get("action"), "policy.action"))
    elif kind in ("greedy", "random"):
        if set(pol_raw) - {"kind"}:
            raise ConfigError(f"policy kind {kind!r} takes no other keys", "policy")
        policy = GreedyReward() if kind == "greedy" else RandomUniform()
    else:
        raise ConfigError(
            f"unknown policy kind {kind!r} (expected fixed, greedy, or random)",
            "policy.kind")

    shield_mode = data.get("shield", "off")
    if shield_mode not in SHIELD_MODES:
        raise ConfigError(
            f"unknown shield mode {shield_mode!r} (expected one of {SHIELD_MODES})",
            "shield")

    horizon = data.get("horizon", 100)
    if not isinstance(horizon, int) or isinstance(horizon, bool) or horizon < 1:
        raise ConfigError("expected an integer >= 1", "horizon")
    episodes = data.get("episodes", 1)
    if not isinstance(episodes, int) or isinstance(episodes, bool) or episodes < 1:
        raise ConfigError("expected an integer >= 1", "episodes")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("expected an integer >= 0", "seed")

    name = data.get("name", source)
    if not isinstance(name, str) or not name:
        raise ConfigError("expected a non-empty string", "name")

    return ScenarioConfig(
        name=name,
        model=model,
        predicates=predicates,
        formula=formula,
        formula_text=formula_text,
        monitor=monitor,
        policy=policy,
        shield_mode=shield_mode,
        horizon=horizon,
        episodes=episodes,
        seed=seed,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read file: {exc.strerror or exc}", str(path)) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}", str(path)) from exc
    cfg = parse_config(data, source=str(path))
    if "name" not in data:
        cfg = ScenarioConfig(**{**cfg.__dict__, "name": path.stem})
    return cfg


def _dist_map(labels, row: np.ndarray) -> dict[str, float]:
    return {labels[j]: float(p) for j, p in enumerate(row) if p != 0.0}


def _table_entries(m: Mpomdp, table: np.ndarray, key_from: str, key_dist: str,
                   labels, action_lists) -> list[dict]:
    """Entries for a (state, action, ...) table, collapsing states whose
    rows agree across every joint action into a single entry."""
    entries = []
    for q, state in enumerate(m.state_names):
        rows = table[q]
        if all(np.array_equal(rows[0], rows[a]) for a in range(1, len(rows))):
            entries.append({key_from: state, key_dist: _dist_map(labels, rows[0])})
            continue
        for a in range(len(rows)):
            entries.append({
                key_from: state,
                "action": action_lists[a],
                key_dist: _dist_map(labels, rows[a]),
            })
    return entries


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """The YAML-ready mapping for a scenario config."""
    m = cfg.model
    action_lists = [
        [m.action_names[i][c] for i, c in enumerate(m.joint_action(a).components)]
        for a in range(m.n_joint_actions)
    ]
    obs_labels = [OBS_JOIN.join(m.observation_names[i][c] for i, c in
                                enumerate(m.joint_observation(z).components))
                  for z in range(m.n_joint_observations)]

    reward_entries = []
    for q, state in enumerate(m.state_names):
        row = m.reward[q]
        if np.all(row == row[0]):
            if row[0] != 0.0:
                reward_entries.append({"state": state, "value": float(row[0])})
            continue
        for a, value in enumerate(row):
            if value != 0.0:
                reward_entries.append({
                    "state": state, "action": action_lists[a], "value": float(value),
                })

    data = {
        "name": cfg.name,
        "states": list(m.state_names),
        "agents": [
            {"name": m.agent_names[i],
             "actions": list(m.action_names[i]),
             "observations": list(m.observation_names[i])}
            for i in range(m.n_agents)
        ],
        "initial": _dist_map(m.state_names, cfg.model.initial.probs),
        "transition": _table_entries(m, m.transition, "from", "next",
                                     m.state_names, action_lists),
        "observation": _table_entries(m, m.observation, "next", "dist",
                                      obs_labels, action_lists),
    }
    if reward_entries:
        data["reward"] = reward_entries
    if cfg.predicates:
        data["predicates"] = {name: expr_text(expr)
                              for name, expr in cfg.predicates.items()}
    data["formula"] = cfg.formula_text
    data["monitor"] = {
        "delta": cfg.monitor.delta,
        "gamma": cfg.monitor.alpha.gamma,
        "rho": cfg.monitor.ft.rho,
        "eps": cfg.monitor.ft.eps,
    }
    if isinstance(cfg.policy, FixedAction):
        data["policy"] = {"kind": "fixed", "action": action_lists[cfg.policy.action]}
    elif isinstance(cfg.policy, GreedyReward):
        data["policy"] = {"kind": "greedy"}
    else:
        data["policy"] = {"kind": "random"}
    data["shield"] = cfg.shield_mode
    data["horizon"] = cfg.horizon
    data["episodes"] = cfg.episodes
    data["seed"] = cfg.seed
    return data


def write_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(
        yaml.safe_dump(config_to_dict(cfg), sort_keys=False, width=100))
