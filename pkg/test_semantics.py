from pathlib import Path

import sympy
import yaml
from pytest import raises

from lincat.errors import AnnotationError, IndexOutsideTruncation, ParseError
from lincat.semantics import (
	EMPTY,
	STAR,
	AtomVal,
	BarVal,
	CoeffMatrix,
	Interp,
	MSet,
	PairVal,
	coeff,
	coeff_stable,
	elements,
	exp_matrix,
	format_count,
	format_element,
	interpret_term,
	interpret_term_stable,
	matrix_of_constant,
	parse_element,
	polarity_walk,
	sign,
)
from lincat.syntax import Bang, parse_document, parse_term, parse_type, typecheck

FIXTURES = Path(__file__).resolve().parent / "fixtures"
a1, a2 = AtomVal("a1"), AtomVal("a2")


def j(text: str):
	return typecheck(parse_term(text))


def test_element_syntax():
	assert parse_element("{a1, a1, a2}") == MSet(((a1, 2), (a2, 1)))
	assert parse_element("{a1:2, a2}") == parse_element("{a2, a1, a1}")
	assert parse_element("(a1,*)") == PairVal(a1, STAR)
	assert parse_element("bar(a1)") == BarVal(a1)
	assert parse_element("{*:5^3}").cardinality == 125
	assert format_element(parse_element("{a:3, b}")) == "{a:3, b:1}"
	with raises(ParseError):
		parse_element("{a1")


def test_counts_print_as_prime_towers():
	assert format_count(5 ** (5**2 + 1), 5) == "p^(p^0 + p^2)"
	assert format_count(5**3, 5) == "p^3"
	assert format_count(7, 5) == "7"
	assert format_count(7) == "7"


def test_huge_counts_stay_printable():
	huge = 5 ** (5**7)
	m = MSet(((STAR, huge),))
	assert repr(m) == "MSet({*:5^78125})"
	assert "5^78125" in repr(PairVal(m, EMPTY))
	assert format_count(huge, 5) == "p^(p^7)"
	odd = format_count(huge + 1)
	assert odd.startswith("<") and odd.endswith("-bit count>")


def test_multiset_arithmetic():
	m = MSet.of([a1, a1, a2])
	assert m.cardinality == 3
	assert m - MSet.of([a1]) == MSet.of([a1, a2])
	assert m.contains(MSet.of([a1, a1]))
	assert not m.contains(MSet.of([a2, a2]))
	assert m.scale(2).cardinality == 6
	assert EMPTY + m == m
	with raises(ValueError):
		MSet.of([a2]) - m


def test_index_sets():
	interp = Interp.uniform(["a"], 2, 2)
	assert interp.atom_sets["a"] == ("a1", "a2")
	assert len(elements(Bang(parse_type("a")), interp)) == 6
	assert len(elements(parse_type("a (x) a^"), interp)) == 4
	assert elements(parse_type("1"), interp) == (STAR,)


def test_signs_and_polarity():
	e = sign(parse_element("(a1,{a2})"), parse_type("a^ (x) !a"))
	assert e == PairVal(BarVal(a1), MSet.of([a2]))
	occ = list(polarity_walk(BarVal(MSet(((a1, 3),)))))
	assert [(o.kind, o.positive, o.count) for o in occ] == [("mset", False, 1), ("atom", False, 3)]


def test_structural_coefficients():
	interp = Interp.uniform(["a"], 2)
	dup = j("dup{a}")
	assert coeff(dup, parse_element("{a1, a2}"), parse_element("({a1}, {a2})"), interp) == 1
	assert coeff(dup, parse_element("{a1}"), parse_element("({a1}, {a2})"), interp) == 0
	assert coeff(j("delta{a}"), parse_element("{a1:2}"), parse_element("{{a1}:2}"), interp) == 1
	tau = j("tau{a}")
	assert coeff(tau, STAR, parse_element("(a1, a1)"), interp) == 1
	assert coeff(tau, STAR, parse_element("(a1, a2)"), interp) == 0


def test_promoted_duplicator_counts_splittings():
	interp = Interp.uniform(["a"], 2)
	term = j("!(dup{a})")
	alpha = parse_element("{{a1, a2}}")
	beta = parse_element("{({a1}, {a2})}")
	assert coeff(term, alpha, beta, interp) == 1
	assert coeff_stable(term, alpha, beta, interp) == 1


def test_coefficient_errors():
	dup = j("dup{a}")
	with raises(AnnotationError):
		coeff(dup, a1, parse_element("({a1}, {a2})"), Interp.uniform(["a"], 2))
	with raises(IndexOutsideTruncation):
		coeff(dup, parse_element("{a1, a2}"), parse_element("({a1}, {a2})"), Interp.uniform(["a"], 2, 1))


def test_declared_constant_under_promotion():
	sig, term = parse_document("atoms p q\ngen f : p -> q\n!(f)")
	table = matrix_of_constant({(AtomVal("p1"), AtomVal("q1")): 2, (AtomVal("p2"), AtomVal("q1")): 1})
	base = Interp.uniform(["p", "q"], 2)
	interp = Interp(base.atom_sets, base.degree_cap, {"f": table})
	jt = typecheck(term)
	assert coeff(jt, parse_element("{p1, p2}"), parse_element("{q1, q1}"), interp) == 4
	assert coeff(jt, parse_element("{p1, p1}"), parse_element("{q1, q1}"), interp) == 4
	assert coeff(jt, parse_element("{p2, p2}"), parse_element("{q1, q1}"), interp) == 1


def test_interpretation_matrix_of_dig():
	m = interpret_term(j("delta{a}"), Interp.uniform(["a"], 1, 2))
	assert m[(parse_element("{a1:2}"), parse_element("{{a1}:2}"))] == 1
	assert m[(parse_element("{a1:2}"), parse_element("{{a1:2}}"))] == 1
	assert m[(parse_element("{a1}"), parse_element("{{a1:2}}"))] == 0


def test_stable_interpretation_matches_checked_one():
	interp = Interp.uniform(["a"], 1, 2)
	assert interpret_term_stable(j("dup{a}"), interp).entries == interpret_term(j("dup{a}"), interp).entries


def test_exponential_of_two_by_two_matrix():
	data = yaml.safe_load((FIXTURES / "exp2x2.yaml").read_text(encoding="utf-8"))
	source = tuple(AtomVal(x) for x in data["source"])
	target = tuple(AtomVal(y) for y in data["target"])
	entries = {(AtomVal(x), AtomVal(y)): sympy.Symbol(v) for x, y, v in data["matrix"]}
	m = exp_matrix(CoeffMatrix(source, target, entries), 2)
	for beta_text, row in data["degree2"].items():
		beta = parse_element(beta_text)
		for alpha_text, expected in row.items():
			got = m[(parse_element(alpha_text), beta)]
			assert sympy.expand(got - sympy.sympify(expected)) == 0, (alpha_text, beta_text)


def test_exponential_of_identity():
	xs = (AtomVal("x1"), AtomVal("x2"))
	ident = CoeffMatrix(xs, xs, {(x, x): 1 for x in xs})
	m = exp_matrix(ident, 2)
	assert len(m.nonzero()) == 6
	assert all(alpha == beta and v == 1 for (alpha, beta), v in m.nonzero().items())


def test_exponential_respects_composition():
	xs = (AtomVal("x1"), AtomVal("x2"))
	n = CoeffMatrix(xs, xs, {(xs[0], xs[0]): 1, (xs[0], xs[1]): 2, (xs[1], xs[1]): 1})
	m = CoeffMatrix(xs, xs, {(xs[0], xs[0]): 1, (xs[1], xs[0]): 3, (xs[1], xs[1]): 1})
	assert exp_matrix(n.compose(m), 3) == exp_matrix(n, 3).compose(exp_matrix(m, 3))
