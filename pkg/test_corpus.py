import random
from collections import defaultdict

from lincat.corpus import corpus, random_term, random_type
from lincat.decide import (
	Distinct,
	EquivalentUpToSim,
	Inconclusive,
	decide_equal,
	decide_semantic,
	echo_interp,
	normal_forms_agree,
	normalize_to_graph,
	required_prime,
)
from lincat.errors import FuelExhausted, TruncationInstability
from lincat.generic import (
	canonicalize,
	check_stars,
	default_echo_params,
	echo_instance,
	forms_equivalent,
	generic_form,
	reconstruct_generic,
	reconstruct_graph,
)
from lincat.netcheck import graph_difference, stats
from lincat.rewrite import apply_rule, rules_table, to_spine
from lincat.syntax import Atom, Bot, Gen, MetaMor, One, boundary, children, pretty_print, subst_term, typecheck


def test_same_seed_same_terms():
	first = [pretty_print(t) for t in corpus(seed=7, count=10)]
	again = [pretty_print(t) for t in corpus(seed=7, count=10)]
	assert first == again
	assert len(first) == 10


def test_generated_terms_typecheck():
	for t in corpus(seed=3, count=25, depth=3):
		typecheck(t)


def test_terms_start_at_the_requested_type():
	rng = random.Random(11)
	for _ in range(20):
		source = random_type(rng, ("a",), 2)
		t = random_term(rng, source, 2, ("a",))
		assert boundary(t)[0] == source
		assert typecheck(t).source == source


def test_depth_zero_is_an_atom_or_unit():
	rng = random.Random(0)
	for _ in range(20):
		ty = random_type(rng, ("b",), 0)
		assert isinstance(ty, (Atom, One, Bot))
		assert not isinstance(ty, Atom) or ty.name == "b"


# Corpus-scale properties ---------------------------------------------------


def normal_graphs(seed: int, count: int, depth: int = 3):
	"""(term, normal graph) for every corpus term that normalizes within the default budgets."""
	for term in corpus(seed=seed, count=count, depth=depth):
		try:
			yield term, normalize_to_graph(term).graph
		except (FuelExhausted, TruncationInstability):
			continue


def test_strategies_agree_across_the_corpus():
	checked = 0
	for i, term in enumerate(corpus(seed=0, count=200, depth=3)):
		try:
			diff = normal_forms_agree(term, runs=10, seed=i)
		except (FuelExhausted, TruncationInstability):
			continue
		assert diff is None, diff
		checked += 1
	assert checked >= 100


def test_graphs_are_rebuilt_from_their_generic_forms():
	seen = 0
	for term, g in normal_graphs(seed=1, count=40):
		back = reconstruct_graph(generic_form(g), g.top_types, g.bottom_types)
		assert graph_difference(g, back) is None, pretty_print(term)
		seen += 1
	assert seen >= 20


def test_echo_instances_give_back_their_generic_forms():
	seen = 0
	for term, g in normal_graphs(seed=2, count=40):
		fp = generic_form(g)
		p = required_prime(stats(g))
		params = default_echo_params(g, p, fp)
		alpha, beta = echo_instance(g, params, fp)
		rebuilt = reconstruct_generic(alpha, beta, p, g.top_types, g.bottom_types)
		assert forms_equivalent(rebuilt, canonicalize(fp)), pretty_print(term)
		report = check_stars(g, alpha, beta, p, echo_interp(params, fp.var_types))
		assert report.undetermined or report.all, (pretty_print(term), report.failed())
		seen += 1
	assert seen >= 20


def _same_answer(f, g) -> None:
	syntactic = decide_equal(f, g)
	semantic = decide_semantic(f, g)
	if isinstance(syntactic, Inconclusive) or isinstance(semantic, Inconclusive):
		return
	assert type(syntactic) is type(semantic), (pretty_print(f), pretty_print(g), str(syntactic), str(semantic))


def test_semantic_route_agrees_with_rewriting():
	by_boundary = defaultdict(list)
	for term, _ in normal_graphs(seed=4, count=60, depth=2):
		by_boundary[boundary(term)].append(term)
	pairs = 0
	for terms in by_boundary.values():
		for f, g in zip(terms, terms[1:]):
			_same_answer(f, g)
			pairs += 1
	for term in [ts[0] for ts in by_boundary.values()][:15]:
		normal = normalize_to_graph(term).term
		assert isinstance(decide_equal(term, normal), EquivalentUpToSim)
		assert not isinstance(decide_semantic(term, normal), Distinct), pretty_print(term)
	assert pairs + len(by_boundary) > 15


# Subject reduction ---------------------------------------------------------


def _walk(t):
	yield t
	for k in children(t):
		yield from _walk(k)


def instantiate_rule(rule, rng: random.Random):
	"""Both sides of `rule` with random objects for A and B and a random morphism for ?f."""
	nodes = list(_walk(rule.lhs))
	dual_rule = any(isinstance(n, Gen) and n.name in ("tau", "gamma") for n in nodes)
	metas = {n.name for n in nodes if isinstance(n, MetaMor)}
	if dual_rule:
		types = {"A": Atom(rng.choice("ab")), "B": Atom(rng.choice("ab"))}
	else:
		types = {"A": random_type(rng, ("a", "b"), 1), "B": random_type(rng, ("a", "b"), 1)}
	mors = {}
	for name in sorted(metas):
		f = random_term(rng, types["A"], 2)
		while not to_spine(f).factors:
			f = random_term(rng, types["A"], 2)
		types["B"] = boundary(f)[1]
		mors[name] = f
	return subst_term(rule.lhs, types, mors), subst_term(rule.rhs, types, mors)


def test_every_rule_preserves_its_boundary():
	rng = random.Random(23)
	for rule in rules_table():
		for _ in range(5):
			lhs, rhs = instantiate_rule(rule, rng)
			left, right = typecheck(lhs), typecheck(rhs)
			assert (left.source, left.target) == (right.source, right.target), (rule.id, pretty_print(lhs))
			out = typecheck(apply_rule(lhs, rule, "@0"))
			assert (out.source, out.target) == (left.source, left.target), (rule.id, pretty_print(lhs))
