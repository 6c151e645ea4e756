from pathlib import Path

from pytest import raises

from lincat.decide import (
	Distinct,
	EquivalentUpToSim,
	Inconclusive,
	SemanticCheck,
	decide_equal,
	decide_semantic,
	echo_interp,
	exit_code,
	normal_forms_agree,
	normalize_to_graph,
	prime_bound,
	required_prime,
)
from lincat.errors import BoundaryMismatch, EchoParamError, NotPrimeError, PrimeTooSmall
from lincat.generic import EchoParams
from lincat.netcheck import GraphStats
from lincat.semantics import Interp
from lincat.syntax import Atom, parse_document, parse_term

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def fixture(name: str):
	_, term = parse_document((FIXTURES / f"{name}.lc").read_text(encoding="utf-8"))
	return term


def test_rewriting_example_legs_agree():
	v = decide_equal(fixture("promotion_left"), fixture("promotion_right"))
	assert v == EquivalentUpToSim()
	assert exit_code(v) == 0
	trace = normalize_to_graph(fixture("promotion_left")).trace
	assert {"5", "9", "11"} <= set(trace.rule_ids())
	assert len(trace.congruence_steps()) == 1


def test_weakened_copy_is_identity():
	assert isinstance(decide_equal(fixture("weak_copy"), fixture("weak_copy_id")), EquivalentUpToSim)
	assert isinstance(decide_equal(fixture("unit_beta"), parse_term("id{a}")), EquivalentUpToSim)


def test_symmetry_differs_from_identity():
	v = decide_equal(parse_term("symT{a, a}"), parse_term("id{a (x) a}"))
	assert isinstance(v, Distinct)
	assert v.route == "syntactic"
	assert exit_code(v) == 1


def test_boundaries_must_agree():
	with raises(BoundaryMismatch):
		decide_equal(parse_term("id{a}"), parse_term("id{b}"))
	with raises(BoundaryMismatch):
		decide_semantic(parse_term("dup{a}"), parse_term("id{!a}"))


def test_out_of_fuel_is_inconclusive():
	v = decide_equal(fixture("promotion_left"), fixture("promotion_right"), fuel=0)
	assert isinstance(v, Inconclusive)
	assert exit_code(v) == 2


def test_prime_choice():
	assert prime_bound() == 1
	assert required_prime(GraphStats(4, 6, 0, 0)) == 7
	assert required_prime(GraphStats(10, 2, 1, 2), GraphStats(3, 1, 0, 0)) == 11
	assert required_prime(GraphStats(7, 1, 0, 0)) == 11


def test_semantic_route_accepts_swapped_legs():
	check = SemanticCheck(0)
	v = decide_semantic(parse_term("dup{a}"), parse_term("dup{a} ; symT{!a, !a}"), check=check)
	assert v == EquivalentUpToSim("semantic")
	assert check.p == 11
	assert check.failed == []
	assert check.reconstructed


def test_semantic_route_separates_symmetry():
	v = decide_semantic(parse_term("symT{a, a}"), parse_term("id{a (x) a}"))
	assert isinstance(v, Distinct)
	assert v.route == "semantic"


def test_semantic_prime_is_checked():
	with raises(NotPrimeError):
		decide_semantic(parse_term("dup{a}"), parse_term("dup{a}"), p=9)
	with raises(PrimeTooSmall) as e:
		decide_semantic(parse_term("dup{a}"), parse_term("dup{a}"), p=2)
	assert e.value.required == 8


def test_echo_interp_must_hold_every_label():
	params = EchoParams(5, {}, {"x1": "a1", "x2": "a2"})
	types = {"x1": Atom("a"), "x2": Atom("a")}
	assert echo_interp(params, types).atom_sets["a"] == ("a1", "a2")
	with raises(EchoParamError):
		echo_interp(params, types, Interp({"a": ("a1",)}))


def test_randomized_strategies_agree():
	assert normal_forms_agree(fixture("promotion_right"), runs=3) is None
	assert normal_forms_agree(parse_term("dup{a} ; (dup{a} (x) id{!a})"), runs=3, seed=4) is None


def test_nested_morphism_keeps_four_boards():
	normal = normalize_to_graph(fixture("nested_g"))
	assert len(normal.graph.boards) == 4
