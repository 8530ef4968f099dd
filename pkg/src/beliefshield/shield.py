"""One-step greedy safety shield.

Given the nominal joint action, the shared observation, and the current
belief, the shield accepts the nominal action when its belief update
passes the monitor. Otherwise it enumerates every joint action under
the same observation, keeps those whose updates pass, and executes the
one whose expected immediate reward (over its own updated belief)
deviates least, in squared distance, from the nominal's reference
reward. Ties resolve to the lowest flat action index. A candidate whose
update has zero likelihood is unsafe, not an error; if no candidate
passes, the shield raises SafetyDeadlock rather than executing anything
unsafe.

In "conservative" mode a candidate must additionally pass under every
observation of positive predicted probability, not just the shared one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SafetyDeadlock, ZeroLikelihood
from .model import (
    Belief, JointAction, Mpomdp, belief_update, expected_reward,
    observation_likelihoods, predicted_belief,
)
from .monitor import Monitor, StepVerdict, monitor_step

LITERAL = "literal"
CONSERVATIVE = "conservative"


@dataclass(frozen=True)
class SafeCandidate:
    action: JointAction
    belief: Belief
    verdict: StepVerdict
    monitor: Monitor
    reward: float


@dataclass(frozen=True)
class ShieldDecision:
    """Outcome of one shield invocation.

    verdict/next_belief/next_monitor describe the executed action's
    update; candidate_rewards lists (flat index, reward) for the safe
    candidates considered (just the nominal when it passed outright).
    """

    executed: JointAction
    overridden: bool
    nominal_reward: float
    candidate_rewards: tuple[tuple[int, float], ...]
    verdict: StepVerdict
    next_belief: Belief
    next_monitor: Monitor


def _try_candidate(m: Mpomdp, mon: Monitor, b_prev: Belief, z: int,
                   action: int, mode: str) -> SafeCandidate | None:
    """The candidate's update and verdict, or None when unsafe."""
    try:
        b_next = belief_update(b_prev, action, z, m)
    except ZeroLikelihood:
        return None
    verdict, successor = monitor_step(mon, b_prev, b_next)
    if not verdict.passed:
        return None
    if mode == CONSERVATIVE:
        likelihoods = observation_likelihoods(b_prev, action, m)
        for other_z, weight in enumerate(likelihoods):
            if other_z == z or weight <= 0.0:
                continue
            try:
                b_other = belief_update(b_prev, action, other_z, m)
            except ZeroLikelihood:
                return None
            other_verdict, _ = monitor_step(mon, b_prev, b_other)
            if not other_verdict.passed:
                return None
    return SafeCandidate(
        action=m.joint_action(action),
        belief=b_next,
        verdict=verdict,
        monitor=successor,
        reward=expected_reward(b_next, action, m),
    )


def _candidate_barriers(m: Mpomdp, mon: Monitor, b_prev: Belief, z: int) -> dict[int, dict[str, float]]:
    """Barrier values for every joint action, for deadlock reports."""
    out: dict[int, dict[str, float]] = {}
    for action in range(m.n_joint_actions):
        try:
            b_next = belief_update(b_prev, action, z, m)
        except ZeroLikelihood:
            out[action] = {}
            continue
        verdict, _ = monitor_step(mon, b_prev, b_next)
        out[action] = {r.oid: r.barrier for r in verdict.records if r.barrier is not None}
    return out


def enumerate_safe_actions(m: Mpomdp, mon: Monitor, b_prev: Belief, z: int,
                           mode: str = LITERAL) -> list[SafeCandidate]:
    """All joint actions whose updates pass the monitor under z, in
    flat-index order. Exposed for diagnostics and audits; shield_step
    selects from exactly this set."""
    out = []
    for action in range(m.n_joint_actions):
        cand = _try_candidate(m, mon, b_prev, z, action, mode)
        if cand is not None:
            out.append(cand)
    return out


def _nominal_reference_reward(m: Mpomdp, b_prev: Belief, a_nominal: int,
                              b_nom: Belief | None) -> float:
    if b_nom is not None:
        return expected_reward(b_nom, a_nominal, m)
    # Nominal update impossible under z: fall back to the one-step
    # prediction so the reference reward stays defined.
    return float(predicted_belief(b_prev, a_nominal, m) @ m.reward[:, a_nominal])


def shield_step(m: Mpomdp, mon: Monitor, b_prev: Belief, z: int,
                a_nominal: int, mode: str = LITERAL) -> ShieldDecision:
    """Accept the nominal action or substitute the safe alternative with
    the closest expected reward. Raises SafetyDeadlock when nothing is
    safe."""
    if mode not in (LITERAL, CONSERVATIVE):
        raise ValueError(f"unknown shield mode: {mode!r}")

    nominal = _try_candidate(m, mon, b_prev, z, a_nominal, mode)
    if nominal is not None:
        return ShieldDecision(
            executed=nominal.action,
            overridden=False,
            nominal_reward=nominal.reward,
            candidate_rewards=((a_nominal, nominal.reward),),
            verdict=nominal.verdict,
            next_belief=nominal.belief,
            next_monitor=nominal.monitor,
        )

    try:
        b_nom = belief_update(b_prev, a_nominal, z, m)
    except ZeroLikelihood:
        b_nom = None
    r_n = _nominal_reference_reward(m, b_prev, a_nominal, b_nom)

    candidates = enumerate_safe_actions(m, mon, b_prev, z, mode)
    if not candidates:
        raise SafetyDeadlock(mon.step_count + 1, _candidate_barriers(m, mon, b_prev, z))

    best = candidates[0]
    best_dev = (best.reward - r_n) ** 2
    for cand in candidates[1:]:
        dev = (cand.reward - r_n) ** 2
        if dev < best_dev:  # ties keep the earlier (lower) flat index
            best, best_dev = cand, dev

    return ShieldDecision(
        executed=best.action,
        overridden=True,
        nominal_reward=r_n,
        candidate_rewards=tuple((c.action.flat_index, c.reward) for c in candidates),
        verdict=best.verdict,
        next_belief=best.belief,
        next_monitor=best.monitor,
    )
