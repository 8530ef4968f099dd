"""Compiles formulas into barrier obligations and checks them step by
step along a belief trajectory.

Supported shape: a top-level conjunction whose conjuncts are `G core`,
`F core`, `core1 U core2`, `X core`, or a bare propositional `core`,
where every core is propositional (atoms combined with and/or). Each
core translates to a single barrier expression:

    state-set atom        ->  sum of member beliefs - 1
    negated state-set     ->  sum of complement beliefs - 1
    belief predicate f    ->  -f + delta     (small delta > 0)
    negated predicate !f  ->  f
    and / or              ->  pointwise min / max

Obligations then check, between consecutive beliefs:

    G core       invariance (decay bound) every step, plus membership
                 of the starting belief;
    F core       contraction every step until the barrier first reaches
                 >= 0 (discharged); a reach deadline is fixed at
                 activation from the first barrier value, and an
                 undischarged obligation past it is a violation;
    c1 U c2      membership/decay on the left barrier while the right
                 barrier is negative (including at the starting belief);
                 discharged when the right barrier reaches >= 0;
    X core       one-shot membership at the following step;
    bare core    one-shot membership at the starting belief.

Monitors are immutable; monitor_step returns the verdict together with
the successor monitor, so candidate actions can be probed without
mutation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

from .barrier import FtParams, LinearAlpha, dtbf_check, ft_dtbf_check, ft_time_bound
from .errors import UnsupportedNesting
from .ldtl import (
    Always, And, BeliefExpr, BeliefPred, BeliefVar, Constant, Difference,
    Eventually, Formula, Max, Min, NegBeliefPred, NegStateSet, Next, Or,
    StateSet, Sum, Until, describe, evaluate_expr, is_propositional,
)
from .model import Belief, Mpomdp


@dataclass(frozen=True)
class MonitorConfig:
    """Check parameters shared by all obligations of one monitor."""

    delta: float = 1e-3
    alpha: LinearAlpha = LinearAlpha(0.5)
    ft: FtParams = FtParams(rho=0.99, eps=0.1)

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")


# --------------------------------------------------------------------------
# Table-driven translation of propositional cores


def translate_core(core: Formula, m: Mpomdp, delta: float) -> BeliefExpr:
    """Barrier expression whose nonnegativity tracks satisfaction of a
    propositional core (exactly for negated predicates and up to the
    delta offset for positive ones; state atoms via their belief mass)."""
    if isinstance(core, StateSet):
        members = tuple(BeliefVar(q, m.state_names[q]) for q in core.indices)
        return Difference(Sum(members), Constant(1.0))
    if isinstance(core, NegStateSet):
        complement = tuple(
            BeliefVar(q, m.state_names[q])
            for q in range(m.n_states) if q not in core.indices
        )
        return Difference(Sum(complement), Constant(1.0))
    if isinstance(core, BeliefPred):
        return Difference(Constant(delta), core.expr)
    if isinstance(core, NegBeliefPred):
        return core.expr
    if isinstance(core, And):
        return Min(_flatten(core, And, m, delta))
    if isinstance(core, Or):
        return Max(_flatten(core, Or, m, delta))
    raise UnsupportedNesting(f"not a propositional core: {describe(core)}")


def _flatten(core: Formula, op: type, m: Mpomdp, delta: float) -> tuple[BeliefExpr, ...]:
    if isinstance(core, op):
        return _flatten(core.left, op, m, delta) + _flatten(core.right, op, m, delta)
    return (translate_core(core, m, delta),)


# --------------------------------------------------------------------------
# Obligations


@dataclass(frozen=True)
class Invariance:
    oid: str
    label: str
    barrier: BeliefExpr
    started: bool = False


@dataclass(frozen=True)
class FiniteTime:
    oid: str
    label: str
    barrier: BeliefExpr
    deadline: int | None = None
    discharged: bool = False


@dataclass(frozen=True)
class UntilWatch:
    oid: str
    label: str
    left_barrier: BeliefExpr
    right_barrier: BeliefExpr
    started: bool = False
    discharged: bool = False


@dataclass(frozen=True)
class NextPending:
    oid: str
    label: str
    barrier: BeliefExpr
    discharged: bool = False


@dataclass(frozen=True)
class OneShot:
    oid: str
    label: str
    barrier: BeliefExpr
    discharged: bool = False


Obligation = Union[Invariance, FiniteTime, UntilWatch, NextPending, OneShot]


@dataclass(frozen=True)
class ObligationRecord:
    """Outcome of one obligation at one step."""

    oid: str
    kind: str
    status: str  # "pass" | "fail" | "discharged" | "inactive"
    barrier: float | None
    detail: str = ""


@dataclass(frozen=True)
class StepVerdict:
    step: int
    records: tuple[ObligationRecord, ...]

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.records)

    @property
    def failing(self) -> tuple[str, ...]:
        return tuple(r.oid for r in self.records if r.status == "fail")


@dataclass(frozen=True)
class Monitor:
    """Immutable monitor state: obligations plus the number of
    transitions examined so far."""

    config: MonitorConfig
    obligations: tuple[Obligation, ...]
    step_count: int = 0
    last_values: tuple[float | None, ...] = ()

    def __post_init__(self):
        if len(self.last_values) != len(self.obligations):
            object.__setattr__(self, "last_values", (None,) * len(self.obligations))

    @property
    def all_discharged(self) -> bool:
        """True when nothing dischargeable is still pending."""
        return all(
            getattr(ob, "discharged", True) for ob in self.obligations
        )

    def pending(self) -> tuple[str, ...]:
        return tuple(
            ob.oid for ob in self.obligations if not getattr(ob, "discharged", True)
        )


def compile_monitor(phi: Formula, m: Mpomdp, config: MonitorConfig) -> Monitor:
    """Build a monitor from a top-level conjunction of obligations.

    Raises UnsupportedNesting for anything outside the supported shape
    (nested temporal operators, temporal operands of or, an until with a
    temporal side, and so on).
    """
    obligations: list[Obligation] = []
    for i, conjunct in enumerate(_conjuncts(phi)):
        label = describe(conjunct)
        if isinstance(conjunct, Always):
            _require_propositional(conjunct.child, label)
            obligations.append(Invariance(
                f"{i}:always", label, translate_core(conjunct.child, m, config.delta)))
        elif isinstance(conjunct, Eventually):
            _require_propositional(conjunct.child, label)
            obligations.append(FiniteTime(
                f"{i}:eventually", label, translate_core(conjunct.child, m, config.delta)))
        elif isinstance(conjunct, Until):
            _require_propositional(conjunct.left, label)
            _require_propositional(conjunct.right, label)
            obligations.append(UntilWatch(
                f"{i}:until", label,
                translate_core(conjunct.left, m, config.delta),
                translate_core(conjunct.right, m, config.delta)))
        elif isinstance(conjunct, Next):
            _require_propositional(conjunct.child, label)
            obligations.append(NextPending(
                f"{i}:next", label, translate_core(conjunct.child, m, config.delta)))
        elif is_propositional(conjunct):
            obligations.append(OneShot(
                f"{i}:now", label, translate_core(conjunct, m, config.delta)))
        else:
            raise UnsupportedNesting(
                f"conjunct {label!r} is not a temporal obligation over a "
                f"propositional core"
            )
    return Monitor(config=config, obligations=tuple(obligations))


def _conjuncts(phi: Formula) -> list[Formula]:
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [phi]


def _require_propositional(core: Formula, label: str) -> None:
    if not is_propositional(core):
        raise UnsupportedNesting(
            f"nested temporal operator inside {label!r}; only propositional "
            f"cores can be monitored"
        )


# --------------------------------------------------------------------------
# Stepping


def monitor_step(mon: Monitor, b_prev: Belief, b_next: Belief) -> tuple[StepVerdict, Monitor]:
    """Check the transition b_prev -> b_next against every obligation.

    Pure: returns the verdict and the successor monitor. The first call
    treats b_prev as the starting belief (position 0) and runs the
    activation checks described in the module docstring.
    """
    first = mon.step_count == 0
    step = mon.step_count + 1
    cfg = mon.config
    records: list[ObligationRecord] = []
    new_obs: list[Obligation] = []
    new_vals: list[float | None] = []

    for ob, last in zip(mon.obligations, mon.last_values):
        if isinstance(ob, Invariance):
            h_prev = evaluate_expr(ob.barrier, b_prev)
            h_next = evaluate_expr(ob.barrier, b_next)
            if first and h_prev < 0.0:
                rec = ObligationRecord(ob.oid, "always", "fail", h_next,
                                       f"start barrier {h_prev:.6g} < 0")
            elif not dtbf_check(h_prev, h_next, cfg.alpha):
                rec = ObligationRecord(ob.oid, "always", "fail", h_next,
                                       f"decay bound broken ({h_prev:.6g} -> {h_next:.6g})")
            else:
                rec = ObligationRecord(ob.oid, "always", "pass", h_next)
            new_obs.append(replace(ob, started=True))
            new_vals.append(h_next)

        elif isinstance(ob, FiniteTime):
            if ob.discharged:
                records.append(ObligationRecord(ob.oid, "eventually", "inactive", last))
                new_obs.append(ob)
                new_vals.append(last)
                continue
            h_prev = evaluate_expr(ob.barrier, b_prev)
            h_next = evaluate_expr(ob.barrier, b_next)
            if first and h_prev >= 0.0:
                rec = ObligationRecord(ob.oid, "eventually", "discharged", h_prev,
                                       "satisfied at start")
                new_obs.append(replace(ob, discharged=True))
                new_vals.append(h_prev)
                records.append(rec)
                continue
            deadline = ob.deadline
            if deadline is None:
                deadline = ft_time_bound(h_prev, cfg.ft)
            if h_next >= 0.0:
                rec = ObligationRecord(ob.oid, "eventually", "discharged", h_next,
                                       f"reached at step {step} (deadline {deadline})")
                new_obs.append(replace(ob, deadline=deadline, discharged=True))
            else:
                problems = []
                if not ft_dtbf_check(h_prev, h_next, cfg.ft):
                    problems.append(f"contraction broken ({h_prev:.6g} -> {h_next:.6g})")
                if step >= deadline:
                    problems.append(f"deadline {deadline} passed")
                status = "fail" if problems else "pass"
                rec = ObligationRecord(ob.oid, "eventually", status, h_next,
                                       "; ".join(problems))
                new_obs.append(replace(ob, deadline=deadline))
            new_vals.append(h_next)

        elif isinstance(ob, UntilWatch):
            if ob.discharged:
                records.append(ObligationRecord(ob.oid, "until", "inactive", last))
                new_obs.append(ob)
                new_vals.append(last)
                continue
            h2_start = evaluate_expr(ob.right_barrier, b_prev) if first else None
            if first and h2_start >= 0.0:
                rec = ObligationRecord(ob.oid, "until", "discharged", h2_start,
                                       "right side satisfied at start")
                new_obs.append(replace(ob, started=True, discharged=True))
                new_vals.append(h2_start)
                records.append(rec)
                continue
            h1_prev = evaluate_expr(ob.left_barrier, b_prev)
            if first and h1_prev < 0.0:
                # Right side negative at the start means the left must
                # already hold there; a later discharge cannot repair
                # position zero.
                h1_next = evaluate_expr(ob.left_barrier, b_next)
                rec = ObligationRecord(ob.oid, "until", "fail", h1_next,
                                       f"left barrier {h1_prev:.6g} < 0 at start")
                new_obs.append(replace(ob, started=True))
                new_vals.append(h1_next)
                records.append(rec)
                continue
            h2_next = evaluate_expr(ob.right_barrier, b_next)
            if h2_next >= 0.0:
                rec = ObligationRecord(ob.oid, "until", "discharged", h2_next,
                                       f"right side reached at step {step}")
                new_obs.append(replace(ob, started=True, discharged=True))
                new_vals.append(h2_next)
                records.append(rec)
                continue
            h1_next = evaluate_expr(ob.left_barrier, b_next)
            if not dtbf_check(h1_prev, h1_next, cfg.alpha):
                rec = ObligationRecord(ob.oid, "until", "fail", h1_next,
                                       f"left decay bound broken ({h1_prev:.6g} -> {h1_next:.6g})")
            else:
                rec = ObligationRecord(ob.oid, "until", "pass", h1_next,
                                       f"right barrier {h2_next:.6g}")
            new_obs.append(replace(ob, started=True))
            new_vals.append(h1_next)

        elif isinstance(ob, NextPending):
            if ob.discharged:
                records.append(ObligationRecord(ob.oid, "next", "inactive", last))
                new_obs.append(ob)
                new_vals.append(last)
                continue
            h_next = evaluate_expr(ob.barrier, b_next)
            status = "discharged" if h_next >= 0.0 else "fail"
            rec = ObligationRecord(ob.oid, "next", status, h_next,
                                   "" if status == "discharged" else "barrier < 0 at the next step")
            new_obs.append(replace(ob, discharged=True))
            new_vals.append(h_next)

        elif isinstance(ob, OneShot):
            if ob.discharged:
                records.append(ObligationRecord(ob.oid, "now", "inactive", last))
                new_obs.append(ob)
                new_vals.append(last)
                continue
            h0 = evaluate_expr(ob.barrier, b_prev)
            status = "discharged" if h0 >= 0.0 else "fail"
            rec = ObligationRecord(ob.oid, "now", status, h0,
                                   "" if status == "discharged" else "barrier < 0 at start")
            new_obs.append(replace(ob, discharged=True))
            new_vals.append(h0)

        else:
            raise TypeError(f"unknown obligation: {ob!r}")
        records.append(rec)

    verdict = StepVerdict(step=step, records=tuple(records))
    successor = Monitor(config=cfg, obligations=tuple(new_obs),
                        step_count=step, last_values=tuple(new_vals))
    return verdict, successor
