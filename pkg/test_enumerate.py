import itertools
from pathlib import Path

from pytest import mark, raises

from lincat.decide import normalize_to_graph, required_prime
from lincat.enumerate import (
	annotation_size,
	binom_mod,
	multinomial_mod,
	nested_splits,
	ordered_splits,
	pi,
	pi_exact,
	pi_mod_p,
	pow_reduce,
	split_count,
)
from lincat.errors import AnnotationError, EnumerationLimit, NotPrimeError
from lincat.netcheck import stats
from lincat.semantics import EMPTY, STAR, AtomVal, Interp, MSet, PairVal, coeff, elements, parse_element
from lincat.syntax import parse_document, parse_term, typecheck

FIXTURES = Path(__file__).resolve().parent / "fixtures"

a1, a2 = AtomVal("a1"), AtomVal("a2")


def test_lucas_binomials():
	assert binom_mod(9, 3, 3) == 0
	assert binom_mod(9, 0, 3) == 1
	assert binom_mod(10, 3, 7) == 120 % 7
	assert binom_mod(4, 5, 7) == 0
	with raises(NotPrimeError):
		binom_mod(4, 2, 4)


def test_multinomials_and_powers():
	assert multinomial_mod(4, [2, 2], 3) == 0
	assert multinomial_mod(3, [1, 1, 1], 5) == 1
	assert pow_reduce(2, 1, 3) == 2
	assert pow_reduce(7, 4, 5) == 2
	with raises(ValueError):
		multinomial_mod(3, [1, 1], 5)
	with raises(NotPrimeError):
		pow_reduce(2, 1, 9)


def test_ordered_splits():
	m = MSet.of([a1, a1])
	splits = list(ordered_splits(m, 2))
	assert len(splits) == split_count(m, 2) == 3
	assert (EMPTY, m) in splits
	assert list(ordered_splits(EMPTY, 0)) == [()]
	assert list(ordered_splits(m, 0)) == []
	assert split_count(MSet.of([a1, a2]), 3) == 9


def test_annotation_size_counts_multiset_occurrences():
	assert annotation_size(parse_element("{a1:3}")) == 3
	assert annotation_size(parse_element("({{a1}:2}, a2)")) == 4
	assert annotation_size(a1) == 0


@mark.parametrize(
	"text, size",
	[
		("dup{a}", 2),
		("delta{a}", 2),
		("eps{a}", 2),
		("weak{a}", 2),
		("symT{a,b}", 2),
		("phi{a, b}", 2),
		("!(dup{a})", 1),
		("dup{a} ; (eps{a} (x) eps{a})", 2),
		("dup{(!1)^}", 1),
	],
)
def test_process_agrees_with_the_model(text, size):
	interp = Interp.uniform(["a", "b"], size, 2)
	term = parse_term(text)
	j = typecheck(term)
	g = normalize_to_graph(term).graph
	for alpha, beta in itertools.product(elements(j.source, interp), elements(j.target, interp)):
		expected = coeff(j, alpha, beta, interp)
		assert pi_exact(g, [alpha], [beta], interp) == expected, (alpha, beta)
		assert pi_mod_p(g, [alpha], [beta], 3, interp) == expected % 3


def test_large_multiplicities_only_modulo_p():
	g = normalize_to_graph(parse_term("dup{a}")).graph
	interp = Interp.uniform(["a"], 2)
	huge = 5 ** (5**2)
	top = [MSet(((a1, huge), (a2, 1)))]
	bottom = [PairVal(MSet(((a1, huge),)), MSet(((a2, 1),)))]
	assert pi_mod_p(g, top, bottom, 5, interp) == 1
	with raises(EnumerationLimit):
		pi_exact(g, top, bottom, interp)


def test_promoted_duplicator_modulo_p():
	g = normalize_to_graph(parse_term("!(dup{a})")).graph
	interp = Interp.uniform(["a"], 2)
	top = [parse_element("{{a1, a2}:5}")]
	bottom = [parse_element("{({a1}, {a2}):5}")]
	assert pi_mod_p(g, top, bottom, 5, interp) == 1
	assert pi_exact(g, top, bottom, interp) == 1


def test_annotations_must_fit_the_boundary():
	g = normalize_to_graph(parse_term("dup{a}")).graph
	interp = Interp.uniform(["a"], 2)
	with raises(AnnotationError):
		pi(g, [a1], [parse_element("({a1}, {a2})")], interp)
	with raises(AnnotationError):
		pi(g, [], [], interp)
	assert int(pi(g, [parse_element("{a1}")], [parse_element("({a1}, {})")], interp)) == 1


def test_nested_splits_flatten_back():
	m = MSet(((a1, 2),))
	splits = list(nested_splits(m, 2))
	assert len(splits) == 3
	assert MSet.of([MSet.of([a1]), MSet.of([a1])]) in splits
	assert MSet.of([m, EMPTY]) in splits
	assert list(nested_splits(EMPTY, 1)) == [EMPTY, MSet.of([EMPTY])]


def counterexample():
	_, term = parse_document((FIXTURES / "counterexample.lc").read_text(encoding="utf-8"))
	return normalize_to_graph(term).graph


def test_counterexample_counts_both_orders():
	g = counterexample()
	assert len(g.boards) == 2
	p = required_prime(stats(g))
	interp = Interp({}, 2)
	bottom = [PairVal(STAR, STAR)]
	two_point = MSet.of([MSet(((STAR, p),)), MSet(((STAR, p**p),))])
	assert pi_mod_p(g, [two_point], bottom, p, interp) == 2
	one_point = MSet(((MSet(((STAR, p),)), 2),))
	assert pi_mod_p(g, [one_point], bottom, p, interp) == 1
	small = MSet.of([MSet(((STAR, 1),)), MSet(((STAR, 2),))])
	assert pi_exact(g, [small], bottom, interp) == 2


def test_board_reached_from_its_negative_gate():
	_, term = parse_document((FIXTURES / "dual_dup.lc").read_text(encoding="utf-8"))
	g = normalize_to_graph(term).graph
	p = 7
	x, y = MSet(((STAR, p),)), MSet(((STAR, p**p),))
	top = [MSet(((x, p), (y, 1)))]
	bottom = [PairVal(MSet(((x, p),)), MSet(((y, 1),)))]
	assert pi_mod_p(g, top, bottom, p, Interp({}, 2)) == 1
	swapped = [PairVal(MSet(((y, 1),)), MSet(((x, p),)))]
	assert pi_mod_p(g, top, swapped, p, Interp({}, 2)) == 1
	assert pi_mod_p(g, top, [PairVal(MSet(((x, p),)), EMPTY)], p, Interp({}, 2)) == 0
