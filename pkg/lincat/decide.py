"""Deciding equality of morphisms up to the routing of unit isomorphisms.

The syntactic route normalizes both terms, translates them to graphs and compares the normal
graphs. The semantic route builds a p-echo instance of the first graph and tests it against the
second through the star conditions and a reconstruction of the generic form.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Union

from sympy import isprime, nextprime

from .errors import (
	BoundaryMismatch,
	EchoParamError,
	FlowError,
	FuelExhausted,
	GraphError,
	NotPrimeError,
	PrimeTooSmall,
	ReconstructionError,
)
from .generic import (
	EchoParams,
	canonicalize,
	check_stars,
	default_echo_params,
	echo_instance,
	forms_equivalent,
	generic_form,
	reconstruct_generic,
	show_pair,
)
from .graph import Graph, term_to_graph
from .netcheck import GraphStats, graph_difference, stats
from .netrules import normalize_graph
from .rewrite import Trace, normalize
from .semantics import Interp, format_element
from .syntax import Atom, Judgement, TermExpr, pretty_print, show_type, typecheck

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EquivalentUpToSim:
	route: str = "syntactic"

	def __str__(self) -> str:
		return f"equivalent up to ~ ({self.route})"


@dataclass(frozen=True)
class Distinct:
	witness: str
	route: str = "syntactic"

	def __str__(self) -> str:
		return f"distinct ({self.route}): {self.witness}"


@dataclass(frozen=True)
class Inconclusive:
	reason: str

	def __str__(self) -> str:
		return f"inconclusive: {self.reason}"


Verdict = Union[EquivalentUpToSim, Distinct, Inconclusive]


def exit_code(v: Verdict) -> int:
	if isinstance(v, EquivalentUpToSim):
		return 0
	if isinstance(v, Distinct):
		return 1
	return 2


@dataclass
class Normalized:
	"""A term in rewrite normal form together with its normal graph."""

	term: TermExpr
	judgement: Judgement
	trace: Trace
	graph: Graph


def normalize_to_graph(
	term: TermExpr, fuel: int = 10_000, cong_budget: int = 64, rng: random.Random | None = None
) -> Normalized:
	normal, trace = normalize(term, fuel, cong_budget, rng)
	j = typecheck(normal)
	return Normalized(normal, j, trace, normalize_graph(term_to_graph(j), rng))


def _same_boundary(f: TermExpr, g: TermExpr) -> tuple[Judgement, Judgement]:
	jf, jg = typecheck(f), typecheck(g)
	if (jf.source, jf.target) != (jg.source, jg.target):
		raise BoundaryMismatch(
			f"{show_type(jf.source)} -> {show_type(jf.target)} vs {show_type(jg.source)} -> {show_type(jg.target)}"
		)
	return jf, jg


def decide_equal(f: TermExpr, g: TermExpr, fuel: int = 10_000, cong_budget: int = 64) -> Verdict:
	"""Normalize both sides and compare their normal graphs up to ~."""
	_same_boundary(f, g)
	try:
		nf = normalize_to_graph(f, fuel, cong_budget)
		ng = normalize_to_graph(g, fuel, cong_budget)
	except FuelExhausted as e:
		return Inconclusive(str(e))
	diff = graph_difference(nf.graph, ng.graph)
	verdict: Verdict = EquivalentUpToSim() if diff is None else Distinct(diff)
	log.info("decide_equal: %s", verdict)
	return verdict


def prime_bound(*measures: GraphStats) -> int:
	return max([1, *(m.size for m in measures), *(m.dup_scale for m in measures)])


def required_prime(*measures: GraphStats) -> int:
	"""Smallest prime above every graph size and duplication scale."""
	return int(nextprime(prime_bound(*measures)))


def echo_interp(params: EchoParams, var_types, interp: Interp | None = None) -> Interp:
	"""An interpretation containing every echo label, or a check that `interp` does."""
	if interp is not None:
		for x, label in params.labels.items():
			ty = var_types.get(x)
			if isinstance(ty, Atom) and label not in interp.atom_sets.get(ty.name, ()):
				raise EchoParamError(f"interpretation of {ty.name} lacks the label {label}")
		return interp
	sets: dict[str, list[str]] = {}
	for x, label in sorted(params.labels.items()):
		ty = var_types.get(x)
		sets.setdefault(ty.name if isinstance(ty, Atom) else "a", []).append(label)
	return Interp({a: tuple(labels) for a, labels in sets.items()})


@dataclass
class SemanticCheck:
	"""Everything the semantic route computed, for reporting."""

	p: int
	alpha: tuple = ()
	beta: tuple = ()
	failed: list[int] = field(default_factory=list)
	witnesses: dict[str, str] = field(default_factory=dict)
	reconstructed: str = ""


def _semantic(
	gf: Graph, gg: Graph, p: int, interp: Interp | None, check: SemanticCheck
) -> Verdict:
	fp = generic_form(gf)
	params = default_echo_params(gf, p, fp)
	alpha, beta = echo_instance(gf, params, fp)
	check.alpha, check.beta = alpha, beta
	report = check_stars(gg, alpha, beta, p, echo_interp(params, fp.var_types, interp))
	check.failed, check.witnesses = report.failed(), report.witnesses
	if report.undetermined:
		return Inconclusive(report.witnesses["star1"])
	if not report.all:
		shown = "; ".join(f"{k}: {v}" for k, v in sorted(report.witnesses.items()))
		instance = ", ".join(format_element(e, p) for e in alpha) + " ; " + ", ".join(format_element(e, p) for e in beta)
		return Distinct(f"echo instance ({instance}) fails {report.failed()} on the second graph: {shown}", "semantic")
	rebuilt = reconstruct_generic(alpha, beta, p, gf.top_types, gf.bottom_types)
	check.reconstructed = show_pair(rebuilt)
	other = canonicalize(generic_form(gg))
	if not forms_equivalent(rebuilt, other):
		return Distinct(f"generic forms differ: {show_pair(rebuilt)} vs {show_pair(other)}", "semantic")
	return EquivalentUpToSim("semantic")


def decide_semantic(
	f: TermExpr,
	g: TermExpr,
	p: int | None = None,
	interp: Interp | None = None,
	fuel: int = 10_000,
	cong_budget: int = 64,
	check: SemanticCheck | None = None,
) -> Verdict:
	"""The echo route: an echo instance of f's graph must pass every star condition on g's."""
	_same_boundary(f, g)
	try:
		gf = normalize_to_graph(f, fuel, cong_budget).graph
		gg = normalize_to_graph(g, fuel, cong_budget).graph
	except FuelExhausted as e:
		return Inconclusive(str(e))
	bound = prime_bound(stats(gf), stats(gg))
	if p is None:
		p = int(nextprime(bound))
	elif not isprime(p):
		raise NotPrimeError(p)
	elif p <= bound:
		raise PrimeTooSmall(p, bound)
	check = check if check is not None else SemanticCheck(p)
	check.p = p
	try:
		verdict = _semantic(gf, gg, p, interp, check)
	except (GraphError, FlowError, ReconstructionError) as e:
		verdict = Inconclusive(f"semantic route unavailable: {e}")
	log.info("decide_semantic with p=%d: %s", p, verdict)
	return verdict


def normal_forms_agree(
	term: TermExpr, runs: int = 10, seed: int = 0, fuel: int = 10_000, cong_budget: int = 64
) -> str | None:
	"""Normalize under `runs` randomized strategies; the first disagreement found, if any."""
	base = normalize_to_graph(term, fuel, cong_budget).graph
	for i in range(runs):
		rng = random.Random(seed * 1_000 + i)
		other = normalize_to_graph(term, fuel, cong_budget, rng)
		diff = graph_difference(base, other.graph)
		if diff is not None:
			return f"strategy {i} on {pretty_print(term)}: {diff}"
	return None


__all__ = [
	"EquivalentUpToSim",
	"Distinct",
	"Inconclusive",
	"Verdict",
	"exit_code",
	"Normalized",
	"normalize_to_graph",
	"decide_equal",
	"prime_bound",
	"required_prime",
	"echo_interp",
	"SemanticCheck",
	"decide_semantic",
	"normal_forms_agree",
]
