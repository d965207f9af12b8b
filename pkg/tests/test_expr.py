import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kropina import autodiff as ad
from kropina.expr import ExprSyntaxError, UnknownIdentifier, evaluate, parse_expr, to_text


def env(*xs):
    return {f"x{i + 1}": v for i, v in enumerate(xs)}


@pytest.mark.parametrize(
    "text, x, expected",
    [
        ("4/(1+x1^2)^2", (0.0,), 4.0),
        ("x1*x2 - x2*x1", (1.7, -2.3), 0.0),
        ("sqrt(x1^2+x2^2)", (3.0, 4.0), 5.0),
        ("-x1^2", (3.0,), -9.0),
        ("2^-2 * x1", (8.0,), 2.0),
        ("exp(0) + cos(0) + sin(0)", (), 2.0),
        ("1 - 2 - 3", (), -4.0),
        ("8 / 4 / 2", (), 1.0),
    ],
)
def test_evaluate_examples(text, x, expected):
    assert evaluate(parse_expr(text), env(*x)) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["x1 +", "(x1", "x1 ^ 1.5", "x1 $ 2", "sqrt x1", ""])
def test_syntax_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse_expr(text)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x1 + * x2")
    assert info.value.offset == 5


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse_expr("x1 + w")
    assert parse_expr("x1 + w", {"w"}) is not None


def test_division_by_zero_is_domain_error():
    with pytest.raises(ad.DomainError):
        evaluate(parse_expr("1/(x1-1)"), env(1.0))


def test_generic_over_scalar_type():
    node = parse_expr("x1^3 / (1 + x2^2) - sqrt(x1)")
    x = [1.3, 0.4]
    duals = ad.seed(x, {0, 1})
    assert evaluate(node, env(*duals)).value == evaluate(node, env(*x))
    assert evaluate(node, env(*duals)).grad[0] == pytest.approx(ad.derive(lambda v: evaluate(node, env(*v)), x, [0]))


leaves = st.one_of(
    st.sampled_from(["x1", "x2", "x3"]),
    st.integers(0, 9).map(str),
    st.floats(0.1, 10, allow_nan=False).map(lambda v: f"{v:.3f}"),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*/"), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        children.map(lambda c: f"-{c}"),
        st.tuples(children, st.integers(-3, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
        st.tuples(st.sampled_from(["sqrt", "exp", "sin", "cos"]), children).map(lambda t: f"{t[0]}({t[1]})"),
    )


exprs = st.recursive(leaves, _combine, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_print_parse_round_trip(text):
    node = parse_expr(text)
    assert parse_expr(to_text(node)) == node
