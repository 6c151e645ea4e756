import json
from pathlib import Path

from pytest import raises

from lincat.errors import GraphError
from lincat.graph import (
	GraphBuilder,
	PartKind,
	from_json,
	graph_schema,
	term_to_graph,
	to_dot,
	to_json,
)
from lincat.syntax import Atom, Bang, Tensor, parse_document, parse_term, typecheck

FIXTURES = Path(__file__).resolve().parent / "fixtures"
a = Atom("a")


def load(name: str):
	return parse_document((FIXTURES / name).read_text(encoding="utf-8"))[1]


def test_duplicator_translation():
	g = term_to_graph(typecheck(parse_term("dup{a}")))
	assert g.count(PartKind.DUPLICATOR) == 1
	assert g.count(PartKind.TENSOR_INTRO) == 1
	assert g.top_types == [Bang(a)]
	assert g.bottom_types == [Tensor(Bang(a), Bang(a))]


def test_promotion_builds_one_board():
	g = term_to_graph(parse_term("!(eps{a})"))
	assert len(g.boards) == 1
	board = next(iter(g.boards.values()))
	assert len(board.neg_gates) == 1
	assert board.pos_gate is not None
	assert g.count(PartKind.EPS) == 1
	eps = next(p for p in g.parts.values() if p.kind == PartKind.EPS)
	assert eps.region == board.id


def test_monoidal_product_of_bangs():
	g = term_to_graph(parse_term("phi{a, b}"))
	assert g.count(PartKind.TENSOR_ELIM) == 1
	assert len(g.boards) == 1
	board = next(iter(g.boards.values()))
	assert len(board.neg_gates) == 2
	ti = next(p for p in g.parts.values() if p.kind == PartKind.TENSOR_INTRO)
	assert ti.region == board.id


def test_unit_elimination_is_dotted_to_kept_wire():
	g = term_to_graph(parse_term("lunitT{a}"))
	assert g.count(PartKind.TENSOR_ELIM) == 1
	assert g.count(PartKind.UNIT_ELIM) == 1
	(link,) = g.dotted
	assert g.parts[link.part].kind == PartKind.UNIT_ELIM
	assert link.host == g.outer_bottom[0]

	intro = term_to_graph(parse_term("lunitT'{a}"))
	assert intro.count(PartKind.UNIT_INTRO) == 1
	assert intro.count(PartKind.TENSOR_INTRO) == 1


def test_every_wire_has_both_ends():
	g = term_to_graph(load("promotion_left.lc"))
	for w in g.wires:
		assert g.has_upper(w) and g.has_lower(w)
	assert g.region_chain(None) == []


def test_json_round_trip():
	g = term_to_graph(load("promotion_right.lc"))
	text = to_json(g)
	assert from_json(text) == g
	data = json.loads(text)
	assert "outerTop" in data and "outerBottom" in data
	assert all("negGates" in b for b in data["boards"])


def test_schema_uses_wire_names():
	schema = graph_schema()
	assert "outerTop" in schema["properties"]
	assert "wires" in schema["properties"]
	checked_in = json.loads((FIXTURES.parent / "schemas" / "graph.schema.json").read_text(encoding="utf-8"))
	assert set(checked_in["properties"]) == set(schema["properties"])
	assert set(checked_in["$defs"]) == set(schema["$defs"])
	assert checked_in["$defs"]["PartKind"]["enum"] == [k.value for k in PartKind]


def test_dot_nests_boards_as_clusters():
	g = term_to_graph(parse_term("!(!(eps{a}))"))
	dot = to_dot(g)
	assert dot.startswith("digraph G {")
	assert dot.count("subgraph cluster_b") == 2
	assert "EpsLens" in dot


def test_metavariables_do_not_translate():
	term = parse_term("?f{a,a}", patterns=True)
	with raises(GraphError):
		term_to_graph(term)


def test_negative_gate_needs_a_bang():
	b = GraphBuilder()
	w = b.wire(a, None)
	board = b.board(None)
	with raises(GraphError):
		b.neg_gate(board, w)
