import pytest
from hypothesis import given, strategies as st

from surgecheck.data import (
    BOOL, NAT, EnumSort, IndexOutOfRange, ListSort, NatSort, Rat, RangeError, RatSort,
    SortTooLarge, TypeMismatch, UnboundVariable, enumerate_sort, eval_expr, hash_value,
    render_value,
)
from surgecheck.syntax import parse_expr, parse_value

SENSORS = ((True, False), (False, False), (True, True))


def ev(text, **env):
    return eval_expr(parse_expr(text), env)


class TestEval:
    def test_rational_literals_compare(self):
        assert ev("350/100 < 4/1") is True

    def test_length_of_nested_list(self):
        assert ev("#xs == 3", xs=SENSORS) is True
        assert ev("#(xs.0) == 2", xs=SENSORS) is True

    def test_head_difference(self):
        assert ev("r - d < 70/100", r=Rat(50), d=Rat(0)) is True
        assert ev("r - d < 70/100", r=Rat(100), d=Rat(0)) is False

    def test_double_index(self):
        assert ev("xs.2.1", xs=SENSORS) is True
        assert ev("xs.1.0", xs=SENSORS) is False

    def test_implication_and_negation(self):
        assert ev("false => x", x=False) is True
        assert ev("!(a && b) == (!a || !b)", a=True, b=False) is True

    def test_unary_minus_on_rat(self):
        assert ev("-a", a=Rat(240)) == Rat(-240)

    def test_quantifier_in_expression(self):
        assert ev("exists i: Nat. i < 3 && xs.i.0", xs=SENSORS) is True
        assert ev("forall i: Nat. i < 3 => xs.i.0", xs=SENSORS) is False

    @pytest.mark.parametrize("text,env,exc", [
        ("x + 1", {}, UnboundVariable),
        ("1 && true", {}, TypeMismatch),
        ("xs.5", {"xs": (1, 2)}, IndexOutOfRange),
        ("n - 3", {"n": 1}, RangeError),
    ])
    def test_errors(self, text, env, exc):
        with pytest.raises(exc):
            eval_expr(parse_expr(text), env)

    def test_error_names_subexpression(self):
        with pytest.raises(IndexOutOfRange, match=r"xs\.5"):
            ev("#xs > 0 && xs.5", xs=(1, 2))

    @given(st.integers(-10_000, 10_000), st.integers(-10_000, 10_000))
    def test_rat_order_is_numerator_order(self, a, b):
        assert ev("a < b", a=Rat(a), b=Rat(b)) == (a < b)
        assert ev("a - b", a=Rat(a), b=Rat(b)) == Rat(a - b)

    @given(st.integers(0, 50), st.integers(0, 50))
    def test_referentially_transparent(self, a, b):
        e = parse_expr("a + b >= b && (a - a) == 0")
        assert eval_expr(e, {"a": a, "b": b}) == eval_expr(e, {"a": a, "b": b})


class TestSorts:
    def test_bool(self):
        assert enumerate_sort(BOOL) == [False, True]

    def test_enum_in_declaration_order(self):
        modes = EnumSort("ProcessMode", ("active", "stopped", "finished"))
        assert [v.name for v in enumerate_sort(modes)] == ["active", "stopped", "finished"]

    def test_bool_pairs_lexicographic(self):
        assert enumerate_sort(ListSort(BOOL, 2)) == [
            (False, False), (False, True), (True, False), (True, True)]

    def test_sensor_matrix_size(self):
        assert len(enumerate_sort(ListSort(ListSort(BOOL, 2), 3))) == 64

    def test_bounded_nat_and_rat_grid(self):
        assert enumerate_sort(NatSort(3)) == [0, 1, 2, 3]
        grid = RatSort((Rat(-240), Rat(0), Rat(350)))
        assert enumerate_sort(grid) == [Rat(-240), Rat(0), Rat(350)]

    def test_cap(self):
        with pytest.raises(SortTooLarge):
            enumerate_sort(ListSort(BOOL, 13))
        assert len(enumerate_sort(ListSort(BOOL, 12))) == 4096

    def test_unbounded_nat_refused(self):
        with pytest.raises(SortTooLarge):
            enumerate_sort(NAT)

    @given(st.integers(0, 8))
    def test_list_cardinality(self, n):
        vals = enumerate_sort(ListSort(BOOL, n))
        assert len(vals) == 2 ** n
        assert len(set(vals)) == len(vals)
        assert vals == sorted(vals)


class TestValues:
    def test_hash_stable(self):
        assert hash_value(True) == hash_value(True)
        assert hash_value(Rat(-240)) == hash_value(Rat(-240))

    def test_hash_structural(self):
        assert hash_value((True, False)) != hash_value((False, True))
        assert hash_value(1) != hash_value(True)

    @given(st.recursive(st.booleans() | st.integers(0, 20),
                        lambda inner: st.lists(inner, max_size=3).map(tuple), max_leaves=8))
    def test_hash_fits_64_bits(self, v):
        h = hash_value(v)
        assert 0 <= h < 2 ** 64
        assert h == hash_value(v)

    def test_render(self):
        assert render_value(Rat(-240)) == "-240/100"
        assert render_value(SENSORS) == "[[true, false], [false, false], [true, true]]"

    def test_parse_value_round_trip(self):
        assert parse_value(render_value(SENSORS)) == SENSORS
        assert parse_value("-240/100") == Rat(-240)
