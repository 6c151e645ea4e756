from pathlib import Path

from pytest import raises

from lincat.decide import echo_interp, normalize_to_graph, required_prime
from lincat.errors import EchoParamError, ReconstructionError
from lincat.generic import (
	AssignmentPair,
	Boxed,
	EchoParams,
	FormPair,
	Var,
	canonicalize,
	check_element_stars,
	check_stars,
	default_echo_params,
	echo_instance,
	extract_uniform,
	form_boards,
	form_vars,
	forms_equivalent,
	generic_form,
	instance,
	instantiate,
	is_discernible,
	parse_form,
	parse_pair,
	reconstruct_generic,
	reconstruct_graph,
	show_form,
	show_pair,
)
from lincat.netcheck import graph_difference, stats
from lincat.enumerate import pi_mod_p
from lincat.semantics import STAR, AtomVal, MSet, PairVal
from lincat.syntax import parse_document, parse_term

FIXTURES = Path(__file__).resolve().parent / "fixtures"

a1, a2 = AtomVal("a1"), AtomVal("a2")


def normal_graph(text: str):
	return normalize_to_graph(parse_term(text)).graph


def test_nested_form_is_stable_under_printing():
	text = (FIXTURES / "nested_form.txt").read_text(encoding="utf-8")
	f = parse_form(text)
	assert parse_form(show_form(f)) == f
	assert show_form(parse_form(show_form(f))) == show_form(f)


def test_pair_syntax():
	fp = parse_pair("(u[7] ; {u[7]}[7])")
	assert canonicalize(fp) == FormPair((Var("x1", (1,)),), (Boxed(Var("x1", (1,)), (1,)),))
	assert parse_pair(show_pair(fp)) == fp


def test_renaming_equivalence():
	left = parse_pair("({x[B1]}[B1] + {y[B2]}[B2] ; {x[B1]}[B1] . {y[B2]}[B2])")
	renamed = parse_pair("({u[8]}[8] + {v[7]}[7] ; {u[8]}[8] . {v[7]}[7])")
	collapsed = parse_pair("({x[B1]}[B1] + {y[B2]}[B2] ; {x[B1]}[B1] . {x[B1]}[B1])")
	assert forms_equivalent(left, renamed)
	assert forms_equivalent(canonicalize(left), canonicalize(renamed))
	assert not forms_equivalent(left, collapsed)


def test_uniform_instantiation():
	P = AssignmentPair({1: 2, 2: 3}, {"x": a1})
	assert P.uniform
	assert is_discernible(P)
	assert instantiate(parse_form("{x[1,2]}[1,2]"), P) == MSet(((a1, 6),))
	assert instantiate(parse_form("x . *"), P) == PairVal(a1, STAR)
	assert instantiate(parse_form("{}0"), P) == MSet()


def test_dup_generic_form_and_echo():
	g = normal_graph("dup{a}")
	fp = generic_form(g)
	assert len(fp.top) == 1 and len(fp.bottom) == 1
	p = required_prime(stats(g))
	assert p == 11
	params = default_echo_params(g, p, fp)
	assert sorted(params.k.values()) == [0, 1]
	assert sorted(params.labels.values()) == ["a1", "a2"]
	alpha, beta = echo_instance(g, params, fp)
	assert alpha[0].cardinality == 11 + 11**11
	report = check_stars(g, alpha, beta, p, echo_interp(params, fp.var_types))
	assert report.all, report.witnesses
	assert report.failed() == []
	rebuilt = reconstruct_generic(alpha, beta, p, g.top_types, g.bottom_types)
	assert forms_equivalent(rebuilt, canonicalize(fp))


def test_graph_is_rebuilt_from_its_form():
	g = normal_graph("dup{a}")
	fp = generic_form(g)
	rebuilt = reconstruct_graph(fp, g.top_types, g.bottom_types)
	assert graph_difference(rebuilt, g) is None
	with raises(ReconstructionError):
		reconstruct_graph(fp, [], g.bottom_types)


def test_unpaired_variable_is_rejected():
	g = normal_graph("id{!a}")
	fp = parse_pair("({x[1]}[1] ; {y[1]}[1])")
	with raises(ReconstructionError):
		reconstruct_graph(fp, g.top_types, g.bottom_types)


def test_echo_parameters_are_validated():
	with raises(EchoParamError):
		EchoParams(4, {1: 0}, {"x": "a1"}).validate()
	with raises(EchoParamError):
		EchoParams(5, {1: 0, 2: 0}, {"x": "a1"}).validate()
	with raises(EchoParamError):
		EchoParams(5, {1: -1}, {"x": "a1"}).validate()
	with raises(EchoParamError):
		EchoParams(5, {1: 0}, {"x": "a1", "y": "a1"}).validate()
	EchoParams(5, {1: 0, 2: 1}, {"x": "a1", "y": "a2"}).validate()


def test_missing_board_exponent():
	g = normal_graph("dup{a}")
	params = default_echo_params(g, 11)
	partial = EchoParams(11, dict(list(params.k.items())[:1]), params.labels)
	with raises(EchoParamError):
		echo_instance(g, partial)


def test_element_star_violations():
	report = check_element_stars((), (MSet(((a1, 2),)),), 3)
	assert not report.star2
	assert not report.star5
	assert "star2" in report.witnesses
	report = check_element_stars((), (MSet(((a1, 3),)), MSet(((a2, 3),))), 3)
	assert report.star2 and report.star4 and report.star5
	assert not report.star3
	assert report.failed() == [3]


def test_uniform_pair_is_recovered_from_its_instance():
	g = normal_graph("dup{a}")
	fp = generic_form(g)
	boards, xs = form_boards(fp), form_vars(fp)
	P = AssignmentPair({boards[0]: 2, boards[1]: 3}, {xs[0]: a1, xs[1]: a2})
	alpha, beta = instance(fp, P)
	found = extract_uniform(g, alpha, beta, fp=fp)
	assert found is not None
	assert instance(fp, found) == (alpha, beta)
	assert is_discernible(found)
	assert extract_uniform(g, alpha, (PairVal(MSet(), MSet()),), fp=fp) is None


def fixture_graph(name: str):
	_, term = parse_document((FIXTURES / f"{name}.lc").read_text(encoding="utf-8"))
	return normalize_to_graph(term).graph


def test_echo_of_the_two_board_duplicator_counts_two():
	g = fixture_graph("counterexample")
	fp = generic_form(g)
	p = required_prime(stats(g))
	params = default_echo_params(g, p, fp)
	alpha, beta = echo_instance(g, params, fp)
	assert beta == (PairVal(STAR, STAR),)
	assert len(alpha[0].entries) == 2
	value = pi_mod_p(g, list(alpha), list(beta), p, echo_interp(params, fp.var_types))
	assert value == 2
	assert value <= stats(g).dup_scale


def test_echo_on_a_dual_duplicator_is_bounded():
	g = fixture_graph("dual_dup")
	fp = generic_form(g)
	s = stats(g)
	p = required_prime(s)
	params = default_echo_params(g, p, fp)
	alpha, beta = echo_instance(g, params, fp)
	value = pi_mod_p(g, list(alpha), list(beta), p, echo_interp(params, fp.var_types))
	assert 1 <= value <= s.dup_scale
