import pytest
from hypothesis import given, settings, strategies as st

from greechie.eqparser import (
    BINARY_OPS,
    EQ,
    LEQ,
    VARIABLE_LETTERS,
    BadVariableError,
    Bin,
    Comp,
    Const,
    EquationError,
    Inference,
    MissingRelationError,
    Relation,
    UnbalancedParenError,
    UnknownTokenError,
    Var,
    builtin,
    format_inference,
    format_term,
    parse_inference,
    parse_law_spec,
    parse_term,
    term_variables,
    variables,
)

MODULAR = "(av(b^(avc)))=((avb)^(avc))"
EQ6 = (
    "~((d->1a)<(a->1d)) & ~(((c->1d)^(d->1a))<(a->1d)) => "
    "((((a->1b)^(b->1c))^(c->1d))^(d->1a))<(a->1d)"
)


def test_modular_ast():
    inf = parse_inference(MODULAR)
    a, b, c = Var("a"), Var("b"), Var("c")
    lhs = Bin("join", a, Bin("meet", b, Bin("join", a, c)))
    rhs = Bin("meet", Bin("join", a, b), Bin("join", a, c))
    assert inf == Inference((), Relation(lhs, rhs, EQ))
    assert variables(inf) == ["a", "b", "c"]


def test_trivial_equations():
    assert parse_inference("a=a") == Inference((), Relation(Var("a"), Var("a"), EQ))
    assert variables(parse_inference("1=1")) == []


def test_inference_with_hypotheses():
    inf = parse_inference(EQ6)
    assert len(inf.hypotheses) == 2
    assert all(neg for neg, _ in inf.hypotheses)
    assert variables(inf) == ["d", "a", "c", "b"]


def test_negated_hypothesis_without_inner_parentheses():
    inf = parse_inference("~(d->1a<a->1d) & ~(((c->1d)^(d->1a))<(a->1d)) => (a->1b)<(a->1d)")
    assert len(inf.hypotheses) == 2
    assert inf.hypotheses[0] == (True, Relation(Bin("impl1", Var("d"), Var("a")), Bin("impl1", Var("a"), Var("d")), LEQ))


def test_whitespace_ignored():
    assert parse_inference(" ( a v ( b ^ ( a v c ) ) ) = ( ( a v b ) ^ ( a v c ) ) ") == parse_inference(MODULAR)


def test_impl_token_followed_by_constant():
    t = parse_term("(a->11)")
    assert t == Bin("impl1", Var("a"), Const(1))


def test_postfix_complements():
    assert parse_term("a''") == Comp(Comp(Var("a")))
    assert parse_term("(avb)'") == Comp(Bin("join", Var("a"), Var("b")))
    assert parse_term("0'") == Comp(Const(0))


@pytest.mark.parametrize(
    "src, err, col",
    [
        ("(avb=a", UnbalancedParenError, 5),
        ("(avb))=a", UnbalancedParenError, 6),
        ("a=(b", UnbalancedParenError, 5),
        ("(a#b)=a", UnknownTokenError, 3),
        ("(a->7b)=a", UnknownTokenError, 3),
        ("(avb)", MissingRelationError, 6),
        ("(A^b)=b", BadVariableError, 2),
        ("(v^b)=b", BadVariableError, 2),
    ],
)
def test_errors_with_position(src, err, col):
    with pytest.raises(err) as e:
        parse_inference(src)
    assert e.value.pos + 1 == col


def test_error_kinds_distinct():
    kinds = [UnbalancedParenError, UnknownTokenError, MissingRelationError, BadVariableError]
    for a in kinds:
        for b in kinds:
            assert a is b or not issubclass(a, b)


def test_godowski3():
    assert format_inference(builtin("godowski", 3)) == "(((a->1b)^(b->1c))^(c->1a))<(a->1c)"
    assert len(variables(builtin("godowski", 7))) == 7


def test_godowski_hyp4_is_staged_form():
    assert builtin("godowski_hyp", 4) == parse_inference(EQ6)
    assert builtin("godowski_hyp", 4).conclusion == builtin("godowski", 4).conclusion


def test_noa4_contains_eq3():
    inf = builtin("noa", 4)
    assert sorted(variables(inf)) == ["a", "b", "c", "d"]
    eq3_ab = parse_term("(((a->1c)^(b->1c))v((a'->1c)^(b'->1c)))")
    text = format_inference(inf)
    assert format_term(eq3_ab) in text
    lhs = inf.conclusion.lhs
    assert lhs.left == parse_term("(a->1c)")
    assert lhs.right.left == eq3_ab
    assert inf.conclusion.rhs == parse_term("(b->1c)")
    assert inf.conclusion.rel == LEQ


def test_noa_grows_by_one_variable():
    for n in range(4, 7):
        assert len(variables(builtin("noa", n))) == n


def test_oa6_shape():
    inf = builtin("oa6")
    assert len(inf.hypotheses) == 3
    assert variables(inf) == list("abcdef")
    assert format_inference(inf).startswith("a<b' & c<d' & e<f' => ")


def test_modular_builtin_matches_string():
    assert builtin("modular") == parse_inference(MODULAR)
    assert variables(builtin("orthomodular")) == ["a", "b"]


def test_builtin_errors():
    with pytest.raises(EquationError):
        builtin("godowski", 2)
    with pytest.raises(EquationError):
        builtin("noa", 3)
    with pytest.raises(EquationError):
        builtin("noa")
    with pytest.raises(EquationError):
        builtin("bogus")
    with pytest.raises(EquationError):
        builtin("modular", 3)


def test_law_spec():
    assert parse_law_spec("godowski:4") == builtin("godowski", 4)
    assert parse_law_spec("oa6") == builtin("oa6")
    with pytest.raises(EquationError):
        parse_law_spec("noa:x")


# ---------------------------------------------------------------- round trip

variables_st = st.sampled_from(VARIABLE_LETTERS).map(Var)
leaves = st.one_of(variables_st, st.sampled_from([Const(0), Const(1)]))
terms = st.recursive(
    leaves,
    lambda sub: st.one_of(
        sub.map(Comp),
        st.builds(Bin, st.sampled_from(BINARY_OPS), sub, sub),
    ),
    max_leaves=12,
)
relations = st.builds(Relation, terms, terms, st.sampled_from([EQ, LEQ]))
inferences = st.builds(
    Inference,
    st.lists(st.tuples(st.booleans(), relations), max_size=3).map(tuple),
    relations,
)


@settings(max_examples=300, deadline=None)
@given(inferences)
def test_format_parse_round_trip(inf):
    assert parse_inference(format_inference(inf)) == inf


@settings(max_examples=200, deadline=None)
@given(terms)
def test_term_round_trip(t):
    assert parse_term(format_term(t)) == t


@settings(max_examples=100, deadline=None)
@given(inferences)
def test_variables_first_occurrence(inf):
    vs = variables(inf)
    assert len(vs) == len(set(vs))
    scanned = []
    for _, r in inf.hypotheses:
        scanned += term_variables(r.lhs) + term_variables(r.rhs)
    scanned += term_variables(inf.conclusion.lhs) + term_variables(inf.conclusion.rhs)
    assert vs == list(dict.fromkeys(scanned))
