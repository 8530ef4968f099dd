"""Trace audit: replay a recorded run through the exact filter and the
monitor, and evaluate the formula's finite-trace semantics on the
replayed word.

The replay recomputes every belief from the recorded actions and
observations; any deviation beyond 1e-9 from the recorded beliefs
raises TraceMismatch. Monitor verdicts are recomputed the same way and
compared record by record. The finite-trace verdict per top-level
conjunct is reported alongside; the monitor checks sufficient barrier
conditions on beliefs, so its verdicts need not coincide with the
hidden-state semantics and a disagreement is informational, not an
audit failure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .errors import ConfigError, TraceMismatch, ZeroLikelihood
from .ldtl import And, Formula, Letter, describe, oracle_satisfies
from .model import Belief, belief_update
from .monitor import Monitor, StepVerdict, compile_monitor, monitor_step
from .traceio import EpisodeRecord

BELIEF_TOL = 1e-9


@dataclass(frozen=True)
class StepContext:
    """Everything known just before and just after one replayed step."""

    record: dict
    belief_before: Belief
    monitor_before: Monitor
    belief_after: Belief
    verdict: StepVerdict
    monitor_after: Monitor


@dataclass(frozen=True)
class ObligationAudit:
    oid: str
    label: str
    clean: bool        # no fail record at any step
    discharged: bool   # nothing left pending at the end
    oracle: bool       # finite-trace verdict of the conjunct on the word


@dataclass(frozen=True)
class EpisodeAudit:
    episode: int
    steps: int
    end_reason: str
    max_belief_error: float
    obligations: tuple[ObligationAudit, ...]
    verdict_mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.verdict_mismatches


@dataclass(frozen=True)
class AuditReport:
    episodes: tuple[EpisodeAudit, ...]

    @property
    def ok(self) -> bool:
        return all(ep.ok for ep in self.episodes)


def _conjuncts(phi: Formula) -> list[Formula]:
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [phi]


def _checked_index(value, bound: int, what: str, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < bound:
        raise ConfigError(f"{what} {value!r} out of range [0, {bound})", where)
    return value


def replay_episode(cfg: ScenarioConfig, ep: EpisodeRecord) -> tuple[list[StepContext], float]:
    """Recompute the episode's beliefs and verdicts from its recorded
    actions and observations. Raises TraceMismatch when a replayed
    belief deviates from the recorded one by more than 1e-9."""
    m = cfg.model
    recorded0 = np.asarray(ep.header.get("initial_belief", []), dtype=float)
    if recorded0.shape != (m.n_states,):
        raise ConfigError(
            f"initial belief has {recorded0.size} entries, model has {m.n_states} states",
            f"episode {ep.episode} header")
    max_err = float(np.max(np.abs(recorded0 - m.initial.probs)))
    if max_err > BELIEF_TOL:
        raise TraceMismatch(ep.episode, 0, max_err)

    belief = m.initial
    mon = compile_monitor(cfg.formula, m, cfg.monitor)
    contexts: list[StepContext] = []
    for rec in ep.steps:
        step = rec["step"]
        where = f"episode {ep.episode} step {step}"
        action = _checked_index(rec.get("executed"), m.n_joint_actions,
                                "executed action", where)
        obs = _checked_index(rec.get("observation"), m.n_joint_observations,
                             "observation", where)
        _checked_index(rec.get("next_state"), m.n_states, "next state", where)
        try:
            b_next = belief_update(belief, action, obs, m)
        except ZeroLikelihood as exc:
            raise TraceMismatch(ep.episode, step, float("inf")) from exc
        recorded = np.asarray(rec.get("belief", []), dtype=float)
        if recorded.shape != b_next.probs.shape:
            raise ConfigError("belief has the wrong number of entries", where)
        err = float(np.max(np.abs(recorded - b_next.probs)))
        max_err = max(max_err, err)
        if err > BELIEF_TOL:
            raise TraceMismatch(ep.episode, step, err)
        verdict, mon_next = monitor_step(mon, belief, b_next)
        contexts.append(StepContext(rec, belief, mon, b_next, verdict, mon_next))
        belief, mon = b_next, mon_next
    return contexts, max_err


def _verdict_mismatches(contexts: list[StepContext]) -> tuple[str, ...]:
    out = []
    for ctx in contexts:
        recorded = {r["oid"]: r["status"]
                    for r in ctx.record["verdict"]["records"]}
        replayed = {r.oid: r.status for r in ctx.verdict.records}
        if recorded != replayed:
            diff = {oid for oid in recorded.keys() | replayed.keys()
                    if recorded.get(oid) != replayed.get(oid)}
            out.append(
                f"step {ctx.record['step']}: recorded and replayed verdicts "
                f"differ on {sorted(diff)}")
        if ctx.record["verdict"]["passed"] != ctx.verdict.passed:
            out.append(f"step {ctx.record['step']}: recorded passed flag "
                       f"{ctx.record['verdict']['passed']}, replayed {ctx.verdict.passed}")
    return tuple(out)


def audit_episode(cfg: ScenarioConfig, ep: EpisodeRecord) -> tuple[EpisodeAudit, list[StepContext]]:
    m = cfg.model
    contexts, max_err = replay_episode(cfg, ep)
    initial_state = _checked_index(ep.header.get("initial_state"), m.n_states,
                                   "initial state", f"episode {ep.episode} header")
    word = [Letter(initial_state, m.initial)]
    word.extend(Letter(ctx.record["next_state"], ctx.belief_after) for ctx in contexts)

    final_mon = contexts[-1].monitor_after if contexts else compile_monitor(
        cfg.formula, m, cfg.monitor)
    failed_oids = {r.oid for ctx in contexts for r in ctx.verdict.records
                   if r.status == "fail"}
    pending = set(final_mon.pending())

    obligations = []
    for ob, conjunct in zip(final_mon.obligations, _conjuncts(cfg.formula)):
        obligations.append(ObligationAudit(
            oid=ob.oid,
            label=ob.label,
            clean=ob.oid not in failed_oids,
            discharged=ob.oid not in pending,
            oracle=oracle_satisfies(conjunct, tuple(word)),
        ))

    audit = EpisodeAudit(
        episode=ep.episode,
        steps=len(contexts),
        end_reason=ep.end.get("reason", ""),
        max_belief_error=max_err,
        obligations=tuple(obligations),
        verdict_mismatches=_verdict_mismatches(contexts),
    )
    return audit, contexts


def audit_traces(cfg: ScenarioConfig, episodes: list[EpisodeRecord]) -> AuditReport:
    return AuditReport(tuple(audit_episode(cfg, ep)[0] for ep in episodes))
