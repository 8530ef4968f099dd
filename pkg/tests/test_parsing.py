"""Formula and belief-expression parsing: golden parses, error reporting,
and print/parse round trips."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefshield import (
    Always,
    And,
    BeliefPred,
    BeliefVar,
    Constant,
    Difference,
    Eventually,
    FormulaSyntaxError,
    Max,
    Min,
    NegBeliefPred,
    NegStateSet,
    NegationOfCompound,
    Next,
    Or,
    Product,
    StateSet,
    Sum,
    UnknownPredicate,
    UnknownState,
    Until,
    expr_text,
    parse_expr,
    parse_formula,
    pretty_print,
)

STATE_INDEX = {"s0": 0, "s1": 1, "s2": 2, "s3": 3}
STATE_NAMES = ("s0", "s1", "s2", "s3")

PRED_EXPRS = {
    "low": Difference(Constant(0.2), BeliefVar(0, "s0")),
    "mid": Sum((BeliefVar(1, "s1"), BeliefVar(2, "s2"))),
    "high": Constant(0.5),
}

LOW = BeliefPred("low", PRED_EXPRS["low"])
MID = BeliefPred("mid", PRED_EXPRS["mid"])
HIGH = BeliefPred("high", PRED_EXPRS["high"])


def parse(text):
    return parse_formula(text, PRED_EXPRS, STATE_INDEX)


# --------------------------------------------------------------------------
# Formula goldens


def test_connectives_share_precedence_and_associate_left():
    assert parse("low & mid | high") == Or(And(LOW, MID), HIGH)
    assert parse("low | mid & high") == And(Or(LOW, MID), HIGH)


def test_parentheses_override_association():
    assert parse("low & (mid | high)") == And(LOW, Or(MID, HIGH))


def test_temporal_prefixes_bind_one_term():
    assert parse("G low & F mid") == And(Always(LOW), Eventually(MID))
    assert parse("X high") == Next(HIGH)
    assert parse("G F low") == Always(Eventually(LOW))
    assert parse("G (low & mid)") == Always(And(LOW, MID))


def test_until_takes_atom_then_term():
    assert parse("low U mid") == Until(LOW, MID)
    assert parse("low U G mid") == Until(LOW, Always(MID))
    assert parse("low U mid U high") == Until(LOW, Until(MID, HIGH))
    assert parse("low U mid & high") == And(Until(LOW, MID), HIGH)


def test_state_sets_sort_by_state_index():
    assert parse("in({s2, s0})") == StateSet((0, 2), ("s0", "s2"))
    assert parse("in({s3})") == StateSet((3,), ("s3",))


def test_negation_of_atoms():
    assert parse("!low") == NegBeliefPred("low", PRED_EXPRS["low"])
    assert parse("!in({s1})") == NegStateSet((1,), ("s1",))


def test_negated_disjunction_normalizes_to_conjunction():
    neg_low = NegBeliefPred("low", PRED_EXPRS["low"])
    neg_mid = NegBeliefPred("mid", PRED_EXPRS["mid"])
    neg_s0 = NegStateSet((0,), ("s0",))
    assert parse("!(low | mid)") == And(neg_low, neg_mid)
    assert parse("!(low | mid | in({s0}))") == And(And(neg_low, neg_mid), neg_s0)
    assert parse("G !(low | mid)") == Always(And(neg_low, neg_mid))


def test_negation_of_compound_is_rejected():
    with pytest.raises(NegationOfCompound):
        parse("!(low & mid)")
    with pytest.raises(NegationOfCompound):
        parse("!(G low)")
    with pytest.raises(NegationOfCompound):
        parse("!(!low)")
    assert issubclass(NegationOfCompound, FormulaSyntaxError)


def test_negated_until_left_is_a_syntax_error():
    with pytest.raises(FormulaSyntaxError) as err:
        parse("!low U mid")
    assert "'U'" in str(err.value)


def test_unknown_names_are_reported():
    with pytest.raises(UnknownPredicate) as perr:
        parse("nope")
    assert perr.value.name == "nope"
    with pytest.raises(UnknownState) as serr:
        parse("in({s9})")
    assert serr.value.name == "s9"
    # `G` consumed as a temporal prefix never shadows a predicate lookup.
    with pytest.raises(UnknownPredicate):
        parse("!G low")


def test_syntax_error_carries_position_and_expectations():
    with pytest.raises(FormulaSyntaxError) as err:
        parse("low &\n& mid")
    assert err.value.line == 2
    assert err.value.column == 1
    assert "predicate name" in err.value.expected
    assert "line 2, column 1" in str(err.value)


def test_empty_and_truncated_input():
    with pytest.raises(FormulaSyntaxError):
        parse("")
    with pytest.raises(FormulaSyntaxError) as err:
        parse("low &")
    assert "end of input" in str(err.value)


def test_trailing_tokens_rejected():
    with pytest.raises(FormulaSyntaxError) as err:
        parse("low mid")
    assert "after formula" in str(err.value)


def test_unexpected_character():
    with pytest.raises(FormulaSyntaxError) as err:
        parse("low # mid")
    assert "'#'" in str(err.value)
    assert err.value.column == 5


# --------------------------------------------------------------------------
# Expression goldens


def test_expression_precedence_and_flattening():
    one, two, three = Constant(1.0), Constant(2.0), Constant(3.0)
    assert parse_expr("1 + 2 + 3", STATE_INDEX) == Sum((one, two, three))
    assert parse_expr("1 * 2 * 3", STATE_INDEX) == Product((one, two, three))
    assert parse_expr("1 + 2 * 3", STATE_INDEX) == Sum((one, Product((two, three))))
    assert parse_expr("(1 + 2) * 3", STATE_INDEX) == Product((Sum((one, two)), three))
    assert parse_expr("1 - 2 - 3", STATE_INDEX) == Difference(Difference(one, two), three)


def test_expression_number_formats():
    assert parse_expr("1e-3", STATE_INDEX) == Constant(1e-3)
    assert parse_expr("2.5E+1", STATE_INDEX) == Constant(25.0)
    assert parse_expr(".5", STATE_INDEX) == Constant(0.5)


def test_unary_minus_becomes_difference_from_zero():
    assert parse_expr("-b(s0)", STATE_INDEX) == Difference(Constant(0.0), BeliefVar(0, "s0"))
    assert parse_expr("--1", STATE_INDEX) == Difference(
        Constant(0.0), Difference(Constant(0.0), Constant(1.0))
    )


def test_belief_vars_and_min_max():
    got = parse_expr("min(b(s0), 0.5, max(b(s1), b(s2)))", STATE_INDEX)
    assert got == Min((
        BeliefVar(0, "s0"),
        Constant(0.5),
        Max((BeliefVar(1, "s1"), BeliefVar(2, "s2"))),
    ))


def test_expression_errors():
    with pytest.raises(UnknownState):
        parse_expr("b(zz)", STATE_INDEX)
    with pytest.raises(FormulaSyntaxError) as err:
        parse_expr("1 2", STATE_INDEX)
    assert "after expression" in str(err.value)
    with pytest.raises(FormulaSyntaxError):
        parse_expr("1 / 2", STATE_INDEX)
    with pytest.raises(FormulaSyntaxError):
        parse_expr("frac(1)", STATE_INDEX)
    with pytest.raises(FormulaSyntaxError):
        parse_expr("min()", STATE_INDEX)


# --------------------------------------------------------------------------
# Print/parse round trips

pred_atoms = st.sampled_from(sorted(PRED_EXPRS)).map(lambda n: BeliefPred(n, PRED_EXPRS[n]))
state_atoms = st.lists(
    st.integers(min_value=0, max_value=3), min_size=1, max_size=4, unique=True
).map(lambda idx: StateSet(tuple(sorted(idx)), tuple(STATE_NAMES[i] for i in sorted(idx))))
pos_atoms = pred_atoms | state_atoms
atoms = st.one_of(
    pos_atoms,
    pred_atoms.map(lambda a: NegBeliefPred(a.name, a.expr)),
    state_atoms.map(lambda a: NegStateSet(a.indices, a.names)),
)


def extend_formula(children):
    return st.one_of(
        st.builds(And, children, children),
        st.builds(Or, children, children),
        st.builds(Always, children),
        st.builds(Eventually, children),
        st.builds(Next, children),
        st.builds(Until, pos_atoms, children),
    )


formulas = st.recursive(atoms, extend_formula, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_formula_print_parse_round_trip(phi):
    assert parse(pretty_print(phi)) == phi


constants = st.floats(min_value=0.0, max_value=1e6, allow_nan=False).map(Constant)
belief_vars = st.integers(min_value=0, max_value=3).map(
    lambda i: BeliefVar(i, STATE_NAMES[i])
)


def extend_expr(children):
    # The parser flattens +/* chains, so generated Sum/Product nodes never
    # directly contain their own kind.
    non_sum = children.filter(lambda e: not isinstance(e, Sum))
    non_prod = children.filter(lambda e: not isinstance(e, Product))
    return st.one_of(
        st.lists(non_sum, min_size=2, max_size=4).map(tuple).map(Sum),
        st.lists(non_prod, min_size=2, max_size=4).map(tuple).map(Product),
        st.builds(Difference, children, children),
        st.lists(children, min_size=1, max_size=3).map(tuple).map(Min),
        st.lists(children, min_size=1, max_size=3).map(tuple).map(Max),
    )


exprs = st.recursive(constants | belief_vars, extend_expr, max_leaves=10)


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_expr_print_parse_round_trip(expr):
    assert parse_expr(expr_text(expr), STATE_INDEX) == expr
