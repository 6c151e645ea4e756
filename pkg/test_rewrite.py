import random
from pathlib import Path

from pytest import raises

from lincat.errors import FuelExhausted, NoMatchError
from lincat.rewrite import (
	Position,
	apply_rule,
	canonical,
	congruences_table,
	from_spine,
	is_normal,
	lookup,
	normalize,
	redexes,
	rules_table,
	to_spine,
)
from lincat.syntax import Atom, Bang, Id, parse_document, parse_term, pretty_print, typecheck

FIXTURES = Path(__file__).resolve().parent / "fixtures"
a = Atom("a")


def load(name: str):
	return parse_document((FIXTURES / name).read_text(encoding="utf-8"))[1]


def test_rule_table_is_complete_and_typed():
	rules = rules_table()
	assert [r.id for r in rules] == list(range(1, 24))
	for c in congruences_table():
		assert c.oriented(), c.id


def test_lookup_finds_both_directions():
	assert lookup("2").lhs == rules_table()[1].lhs
	forward = lookup("C:phi-nat")
	backward = lookup("C:phi-nat~")
	assert forward.lhs == backward.rhs
	with raises(NoMatchError):
		lookup("C:no-such-equation")


def test_spine_merges_adjacent_factors():
	t = parse_term("(dup{a} (x) id{!a}) ; (id{!a (x) !a} (x) dup{a})")
	s = to_spine(t)
	assert len(s.factors) == 1
	assert typecheck(from_spine(s)).source == typecheck(t).source
	assert canonical(parse_term("id{a} ; id{a}")) == Id(a)


def test_position_text_round_trips():
	for text in ["@0", "1l.0b@2", "0r@1"]:
		assert str(Position.parse(text)) == text


def test_dig_then_dereliction_collapses():
	term = parse_term("delta{a} ; eps{!a}")
	assert ("2", "@0") in redexes(term)
	normal, trace = normalize(term)
	assert normal == Id(Bang(a))
	assert trace.rule_ids() == ["2"]
	assert trace.replay(term) == normal
	assert is_normal(normal)


def test_apply_rule_weakened_duplicate():
	term = parse_term("dup{a} ; (weak{a} (x) id{!a})")
	out = apply_rule(term, rules_table()[7], "@0")
	assert pretty_print(out) == "lunitT'{!a}"
	with raises(NoMatchError):
		apply_rule(parse_term("dup{a}"), rules_table()[7], "@0")


def test_normalize_promotion_left_uses_promotion_rules():
	normal, trace = normalize(load("promotion_left.lc"))
	assert {"5", "9", "11"} <= set(trace.rule_ids())
	assert len(trace.congruence_steps()) == 1
	assert is_normal(normal)
	assert typecheck(normal).source == typecheck(load("promotion_left.lc")).source


def test_promotion_right_normalizes():
	normal, trace = normalize(load("promotion_right.lc"))
	assert is_normal(normal)
	assert trace.replay(load("promotion_right.lc")) == normal


def test_fuel_is_respected():
	with raises(FuelExhausted):
		normalize(parse_term("delta{a} ; eps{!a}"), fuel=0)


def test_randomized_strategies_terminate():
	term = load("promotion_left.lc")
	for seed in range(3):
		normal, _ = normalize(term, rng=random.Random(seed))
		assert is_normal(normal)


def test_no_redex_in_plain_structure():
	assert redexes(parse_term("symT{a,a}")) == []
	assert is_normal(parse_term("symT{a,a}"))
