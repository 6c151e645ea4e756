"""Well-formedness, the switching condition, comparison up to dotted links, and size measures."""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import networkx as nx
from networkx.algorithms.isomorphism import categorical_edge_match, categorical_node_match

from .graph import GATES, Graph, GraphBuilder, Part, PartKind
from .syntax import BOT, ONE, Atom, Bang, Dual, Par, Tensor, TypeExpr, show_type

log = logging.getLogger(__name__)

SWITCHING_CAP = 1 << 12


@dataclass
class WellformedReport:
	violations: list[str] = field(default_factory=list)
	notes: list[str] = field(default_factory=list)

	@property
	def ok(self) -> bool:
		return not self.violations

	def __bool__(self) -> bool:
		return self.ok


def _typing_errors(g: Graph) -> list[str]:
	out: list[str] = []

	def ty(w: int) -> TypeExpr:
		return g.wires[w].ty

	for p in g.parts.values():
		k, t, b = p.kind, p.top, p.bottom
		where = f"{k.value} #{p.id}"
		try:
			if k in (PartKind.TENSOR_INTRO, PartKind.PAR_INTRO):
				cons = Tensor if k == PartKind.TENSOR_INTRO else Par
				ok = len(t) == 2 and len(b) == 1 and ty(b[0]) == cons(ty(t[0]), ty(t[1]))
			elif k in (PartKind.TENSOR_ELIM, PartKind.PAR_ELIM):
				cons = Tensor if k == PartKind.TENSOR_ELIM else Par
				ok = len(t) == 1 and len(b) == 2 and ty(t[0]) == cons(ty(b[0]), ty(b[1]))
			elif k == PartKind.UNIT_INTRO:
				ok = not t and len(b) == 1 and ty(b[0]) == ONE
			elif k == PartKind.UNIT_ELIM:
				ok = len(t) == 1 and not b and ty(t[0]) == ONE
			elif k == PartKind.COUNIT_INTRO:
				ok = not t and len(b) == 1 and ty(b[0]) == BOT
			elif k == PartKind.COUNIT_ELIM:
				ok = len(t) == 1 and not b and ty(t[0]) == BOT
			elif k == PartKind.DIODE_RIGHT:
				ok = not t and len(b) == 2 and ty(b[1]) == Dual(ty(b[0]))
			elif k == PartKind.DIODE_LEFT:
				ok = len(t) == 2 and not b and ty(t[0]) == Dual(ty(t[1]))
			elif k == PartKind.DELTA:
				ok = len(t) == 1 and len(b) == 1 and ty(b[0]) == Bang(ty(t[0]))
			elif k == PartKind.EPS:
				ok = len(t) == 1 and len(b) == 1 and ty(t[0]) == Bang(ty(b[0]))
			elif k == PartKind.DUPLICATOR:
				ok = len(t) == 1 and len(b) >= 2 and isinstance(ty(t[0]), Bang) and all(ty(x) == ty(t[0]) for x in b)
			elif k == PartKind.ELIMINATOR:
				ok = len(t) == 1 and len(b) == 1 and isinstance(ty(t[0]), Bang) and ty(b[0]) == ONE
			elif k in GATES:
				outer, inner = (t[0], b[0]) if k == PartKind.NEG_GATE else (b[0], t[0])
				ok = len(t) == 1 and len(b) == 1 and ty(outer) == Bang(ty(inner)) and p.owner in g.boards
			else:
				ok = len(t) == 1 and len(b) == 1
		except KeyError:
			ok = False
		if not ok:
			out.append(f"{where}: ports do not match its typing")
	return out


def _attachment_errors(g: Graph) -> list[str]:
	ups: Counter = Counter(g.outer_top)
	downs: Counter = Counter(g.outer_bottom)
	for p in g.parts.values():
		ups.update(p.bottom)
		downs.update(p.top)
	out = []
	for w in g.wires:
		if ups[w] != 1 or downs[w] != 1:
			out.append(f"wire {w} has {ups[w]} upper and {downs[w]} lower attachments")
	for w in set(ups) | set(downs):
		if w not in g.wires:
			out.append(f"unknown wire {w} attached")
	for d in g.dotted:
		if d.part not in g.parts or d.host not in g.wires:
			out.append(f"dangling dotted link {d.part}->{d.host}")
	return out


def _board_errors(g: Graph) -> list[str]:
	out = []
	for b in g.boards.values():
		seen = set()
		cur = b.parent
		while cur is not None:
			if cur in seen or cur not in g.boards or cur == b.id:
				out.append(f"board {b.id} nesting is not a tree")
				break
			seen.add(cur)
			cur = g.boards[cur].parent
		if b.pos_gate is None:
			out.append(f"board {b.id} has no positive gate")
	for w in g.wires.values():
		if w.region is not None and w.region not in g.boards:
			out.append(f"wire {w.id} lies in unknown board {w.region}")
	for p in g.parts.values():
		if p.kind in GATES:
			parent = g.boards[p.owner].parent if p.owner in g.boards else None
			if p.region != parent:
				out.append(f"gate {p.id} is not on the boundary of board {p.owner}")
	return out


def _lens_errors(g: Graph) -> list[str]:
	out = []
	for p in g.parts.values():
		if p.kind == PartKind.DELTA and g.kind_below(p.bottom[0]) != PartKind.NEG_GATE:
			out.append(f"DeltaLens #{p.id} has no negative gate below")
	return out


def _switch_ports(p: Part) -> tuple[int, ...]:
	"""Premises of which a switching keeps exactly one."""
	if p.kind == PartKind.PAR_INTRO:
		return p.top
	if p.kind in (PartKind.TENSOR_ELIM, PartKind.DUPLICATOR):
		return p.bottom
	return ()


def _region_graph(g: Graph, region: int | None, switched: dict[int, int]) -> nx.MultiGraph:
	"""Wires as vertices, switched premises removed; inner boards collapse to one vertex."""
	h = nx.MultiGraph()
	for child in g.boards_in(region):
		h.add_node(("board", child.id))

	def vertex_of(part_id: int | None, side: str, index: int, wire: int):
		if part_id is None:
			return (side, index)
		p = g.parts[part_id]
		if p.kind in GATES:
			if p.owner != region:
				return ("board", p.owner)
			# gate of the enclosing board: a boundary leaf
			return ("gate", part_id, wire)
		return ("part", part_id)

	for w in g.wires_in(region):
		h.add_node(("wire", w.id))
		for end in (g.upper(w.id), g.lower(w.id)):
			pid = end.part
			if pid is not None and pid in switched:
				ports = _switch_ports(g.parts[pid])
				if w.id in ports and ports[switched[pid]] != w.id:
					continue
			h.add_edge(("wire", w.id), vertex_of(pid, end.side, end.index, w.id))
	for p in g.parts_in(region):
		h.add_node(("part", p.id))
	for d in g.dotted:
		p = g.parts.get(d.part)
		if p is not None and p.region == region and d.host in g.wires:
			h.add_edge(("part", p.id), ("wire", d.host), dotted=True)
	return h


def _switching_errors(g: Graph, region: int | None, report: WellformedReport) -> None:
	switchable = {p.id: len(_switch_ports(p)) for p in g.parts_in(region) if _switch_ports(p)}
	label = "root" if region is None else f"board {region}"
	total = math.prod(switchable.values())
	if total > SWITCHING_CAP:
		report.notes.append(f"{label}: {total} switchings exceed the cap, switching check skipped")
	elif g.wires_in(region) or g.parts_in(region) or g.boards_in(region):
		for choice in itertools.product(*(range(n) for n in switchable.values())):
			h = _region_graph(g, region, dict(zip(switchable, choice)))
			if not nx.is_tree(h):
				report.violations.append(f"{label}: switching {choice} is not a tree")
				break
	for child in g.boards_in(region):
		_switching_errors(g, child.id, report)


def check_wellformed(g: Graph, normal: bool = False) -> WellformedReport:
	"""Structural invariants plus the switching condition; `normal` also checks lens placement."""
	report = WellformedReport()
	report.violations += _attachment_errors(g)
	report.violations += _typing_errors(g)
	report.violations += _board_errors(g)
	if normal:
		report.violations += _lens_errors(g)
	if report.ok:
		_switching_errors(g, None, report)
	return report


# Duplicators -----------------------------------------------------------------


def merge_duplicators(g: Graph) -> Graph:
	"""Fold a duplicator feeding another duplicator into one multi-duplicator with unordered legs."""
	b = GraphBuilder.from_graph(g)
	changed = True
	while changed:
		changed = False
		for pid, p in list(b.parts.items()):
			if p["kind"] != PartKind.DUPLICATOR:
				continue
			for leg in p["bottom"]:
				child = next(
					(
						cid
						for cid, c in b.parts.items()
						if c["kind"] == PartKind.DUPLICATOR and c["top"] == [leg] and c["region"] == p["region"]
					),
					None,
				)
				if child is None:
					continue
				at = p["bottom"].index(leg)
				p["bottom"] = p["bottom"][:at] + b.parts[child]["bottom"] + p["bottom"][at + 1:]
				b.remove_part(child)
				b.remove_wire(leg, rehost=p["top"][0])
				changed = True
				break
			if changed:
				break
	return b.build()


# Comparison ------------------------------------------------------------------

_UNORDERED_BOTTOM = (PartKind.DUPLICATOR,)


def _labelled(g: Graph) -> nx.DiGraph:
	h = nx.DiGraph()
	for w in g.wires.values():
		h.add_node(("w", w.id), label=("wire", show_type(w.ty)))
	for p in g.parts.values():
		h.add_node(("p", p.id), label=(p.kind.value, p.label))
		for i, w in enumerate(p.top):
			h.add_edge(("w", w), ("p", p.id), label=("in", i))
		for i, w in enumerate(p.bottom):
			h.add_edge(("p", p.id), ("w", w), label=("out", 0 if p.kind in _UNORDERED_BOTTOM else i))
		if p.kind in GATES:
			h.add_edge(("p", p.id), ("b", p.owner), label=("gate", p.kind.value))
		elif p.region is not None:
			h.add_edge(("p", p.id), ("b", p.region), label=("in-region", ""))
	for x in g.boards.values():
		h.add_node(("b", x.id), label=("board", ""))
		if x.parent is not None:
			h.add_edge(("b", x.id), ("b", x.parent), label=("in-region", ""))
	for i, w in enumerate(g.outer_top):
		h.add_node(("top", i), label=("top", i))
		h.add_edge(("top", i), ("w", w), label=("outer", i))
	for i, w in enumerate(g.outer_bottom):
		h.add_node(("bottom", i), label=("bottom", i))
		h.add_edge(("w", w), ("bottom", i), label=("outer", i))
	return h


def _prepare(g: Graph) -> Graph:
	g = merge_duplicators(g)
	return Graph(g.wires, g.parts, g.boards, (), g.outer_top, g.outer_bottom)


def graph_difference(g1: Graph, g2: Graph) -> str | None:
	"""None when the graphs agree up to dotted links; otherwise a description of the first difference."""
	a, b = _prepare(g1), _prepare(g2)
	if a.top_types != b.top_types or a.bottom_types != b.bottom_types:
		return "outer boundary types differ"
	ka = Counter(p.kind.value for p in a.parts.values())
	kb = Counter(p.kind.value for p in b.parts.values())
	if ka != kb:
		diff = sorted(set(ka) | set(kb))
		parts = ", ".join(f"{k}: {ka[k]} vs {kb[k]}" for k in diff if ka[k] != kb[k])
		return f"part counts differ ({parts})"
	if len(a.boards) != len(b.boards):
		return f"board counts differ ({len(a.boards)} vs {len(b.boards)})"
	ta = Counter(show_type(w.ty) for w in a.wires.values())
	tb = Counter(show_type(w.ty) for w in b.wires.values())
	if ta != tb:
		return "wire types differ"
	ha, hb = _labelled(a), _labelled(b)
	if nx.is_isomorphic(
		ha, hb, node_match=categorical_node_match("label", None), edge_match=categorical_edge_match("label", None)
	):
		return None
	for h in (ha, hb):
		for _, data in h.nodes(data=True):
			data["text"] = repr(data["label"])
		for _, _, data in h.edges(data=True):
			data["text"] = repr(data["label"])
	wa = nx.weisfeiler_lehman_graph_hash(ha, node_attr="text", edge_attr="text")
	wb = nx.weisfeiler_lehman_graph_hash(hb, node_attr="text", edge_attr="text")
	if wa != wb:
		return f"neighbourhood hashes differ ({wa[:8]} vs {wb[:8]})"
	return "graphs are not isomorphic"


def almost_equal(g1: Graph, g2: Graph) -> bool:
	"""Equality after erasing dotted links, with duplicator legs unordered."""
	return graph_difference(g1, g2) is None


# Measures --------------------------------------------------------------------


@dataclass(frozen=True)
class GraphStats:
	size: int
	dup_scale: int
	board_count: int
	bioriented_count: int


def stats(g: Graph) -> GraphStats:
	merged = merge_duplicators(g)
	scale = 1
	for p in merged.parts.values():
		if p.kind == PartKind.DUPLICATOR:
			scale *= math.factorial(len(p.bottom))
	atomic = sum(1 for w in g.wires.values() if isinstance(w.ty, Atom))
	return GraphStats(len(g.wires), scale, len(g.boards), atomic)
