from lincat.graph import GraphBuilder, PartKind, term_to_graph
from lincat.netcheck import check_wellformed, graph_difference, merge_duplicators, stats
from lincat.netrules import beta_normalize, normalize_graph
from lincat.syntax import Atom, Par, Tensor, parse_term, typecheck

a, b = Atom("a"), Atom("b")


def graph(text: str):
	return term_to_graph(typecheck(parse_term(text)))


def test_translated_graphs_are_wellformed():
	for text in ["dup{a}", "phi{a, b}", "symT{a,b}", "id{a (%) b}", "lunitT{a}", "!(eps{a}) ; delta{a}"]:
		report = check_wellformed(normalize_graph(graph(text)), normal=True)
		assert report.ok, (text, report.violations)


def test_disconnected_switching_is_reported():
	bld = GraphBuilder()
	w = bld.wire(Tensor(a, b), None)
	x = bld.wire(a, None)
	y = bld.wire(b, None)
	out = bld.wire(Par(a, b), None)
	bld.part(PartKind.TENSOR_ELIM, [w], [x, y])
	bld.part(PartKind.PAR_INTRO, [x, y], [out])
	bld.outer_top.append(w)
	bld.outer_bottom.append(out)
	report = check_wellformed(bld.build())
	assert not report
	assert any("switching" in v for v in report.violations)


def test_dangling_wire_is_reported():
	bld = GraphBuilder()
	w = bld.wire(a, None)
	bld.outer_top.append(w)
	report = check_wellformed(bld.build())
	assert any("attachments" in v for v in report.violations)


def test_mistyped_part_is_reported():
	bld = GraphBuilder()
	w = bld.wire(Tensor(a, b), None)
	x = bld.wire(b, None)
	y = bld.wire(a, None)
	bld.part(PartKind.TENSOR_ELIM, [w], [x, y])
	bld.outer_top.append(w)
	bld.outer_bottom.extend([x, y])
	report = check_wellformed(bld.build())
	assert any("typing" in v for v in report.violations)


def test_duplicator_chains_merge():
	g = beta_normalize(graph("dup{a} ; (dup{a} (x) id{!a})"))
	assert g.count(PartKind.DUPLICATOR) == 2
	merged = merge_duplicators(g)
	(dup,) = [p for p in merged.parts.values() if p.kind == PartKind.DUPLICATOR]
	assert len(dup.bottom) == 3
	assert stats(g).dup_scale == 6


def test_duplicator_legs_are_unordered():
	left = normalize_graph(graph("dup{a}"))
	right = normalize_graph(graph("dup{a} ; symT{!a,!a}"))
	assert graph_difference(left, right) is None


def test_symmetry_is_not_identity():
	left = normalize_graph(graph("symT{a,a}"))
	right = normalize_graph(graph("id{a (x) a}"))
	assert graph_difference(left, right) is not None


def test_boundary_difference_is_named():
	diff = graph_difference(normalize_graph(graph("id{a}")), normalize_graph(graph("id{b}")))
	assert diff == "outer boundary types differ"


def test_stats_of_normal_duplicator():
	s = stats(normalize_graph(graph("dup{a}")))
	assert s.board_count == 2
	assert s.dup_scale == 2
	assert s.bioriented_count == 2
	assert s.size == 8
