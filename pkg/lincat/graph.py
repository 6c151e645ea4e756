"""Two-sided proof-net graphs: parts, wires, boards and dotted links.

Every wire runs downward from an upper end (a part's bottom port or the outer top boundary)
to a lower end (a part's top port or the outer bottom boundary). Gates are parts too: a
negative gate has the outer wire on top and the inner wire below, a positive gate the
reverse. `region` is the innermost board containing a part or wire (None for the root).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

from pydantic import BaseModel, ConfigDict, Field

from .errors import GraphError
from .syntax import (
	BOT,
	ONE,
	Atom,
	Bang,
	BangM,
	Comp,
	Const,
	Dual,
	Gen,
	Id,
	Judgement,
	MetaMor,
	Par,
	ParM,
	Tensor,
	TensorM,
	TermExpr,
	TypeExpr,
	boundary,
	parse_type,
	show_type,
)

log = logging.getLogger(__name__)


class PartKind(str, Enum):
	TENSOR_INTRO = "TensorIntro"
	TENSOR_ELIM = "TensorElim"
	PAR_INTRO = "ParIntro"
	PAR_ELIM = "ParElim"
	UNIT_INTRO = "UnitIntro"
	UNIT_ELIM = "UnitElim"
	COUNIT_INTRO = "CounitIntro"
	COUNIT_ELIM = "CounitElim"
	DIODE_RIGHT = "DiodeRight"
	DIODE_LEFT = "DiodeLeft"
	DELTA = "DeltaLens"
	EPS = "EpsLens"
	DUPLICATOR = "Duplicator"
	ELIMINATOR = "Eliminator"
	GENERATOR = "Generator"
	NEG_GATE = "NegGate"
	POS_GATE = "PosGate"


GATES = (PartKind.NEG_GATE, PartKind.POS_GATE)
LENS_TOPS = (PartKind.DELTA, PartKind.EPS, PartKind.DUPLICATOR, PartKind.ELIMINATOR)
# parts that hang off a host wire through a dotted link
DOTTED_KINDS = (PartKind.UNIT_ELIM, PartKind.COUNIT_INTRO)


@dataclass(frozen=True)
class Wire:
	id: int
	ty: TypeExpr
	region: int | None = None


@dataclass(frozen=True)
class Part:
	id: int
	kind: PartKind
	top: tuple[int, ...]
	bottom: tuple[int, ...]
	region: int | None = None
	owner: int | None = None
	label: str = ""


@dataclass(frozen=True)
class Board:
	id: int
	parent: int | None
	neg_gates: tuple[int, ...] = ()
	pos_gate: int | None = None


@dataclass(frozen=True)
class DottedLink:
	part: int
	host: int


class End(NamedTuple):
	"""Attachment of a wire end: `part` None means the outer boundary."""

	part: int | None
	side: str  # "top" or "bottom" of the part (or boundary)
	index: int


@dataclass(frozen=True)
class Graph:
	wires: dict[int, Wire] = field(default_factory=dict)
	parts: dict[int, Part] = field(default_factory=dict)
	boards: dict[int, Board] = field(default_factory=dict)
	dotted: tuple[DottedLink, ...] = ()
	outer_top: tuple[int, ...] = ()
	outer_bottom: tuple[int, ...] = ()

	@cached_property
	def _ends(self) -> tuple[dict[int, End], dict[int, End]]:
		upper: dict[int, End] = {}
		lower: dict[int, End] = {}
		for i, w in enumerate(self.outer_top):
			upper[w] = End(None, "top", i)
		for i, w in enumerate(self.outer_bottom):
			lower[w] = End(None, "bottom", i)
		for p in self.parts.values():
			for i, w in enumerate(p.bottom):
				upper[w] = End(p.id, "bottom", i)
			for i, w in enumerate(p.top):
				lower[w] = End(p.id, "top", i)
		return upper, lower

	def upper(self, wire: int) -> End:
		"""Where the wire starts (its upper end)."""
		return self._ends[0][wire]

	def lower(self, wire: int) -> End:
		return self._ends[1][wire]

	def has_upper(self, wire: int) -> bool:
		return wire in self._ends[0]

	def has_lower(self, wire: int) -> bool:
		return wire in self._ends[1]

	def part_at(self, end: End) -> Part | None:
		return None if end.part is None else self.parts[end.part]

	def kind_above(self, wire: int) -> PartKind | None:
		p = self.part_at(self.upper(wire))
		return None if p is None else p.kind

	def kind_below(self, wire: int) -> PartKind | None:
		p = self.part_at(self.lower(wire))
		return None if p is None else p.kind

	def region_chain(self, region: int | None) -> list[int]:
		"""Boards containing `region`, innermost first."""
		out: list[int] = []
		while region is not None:
			out.append(region)
			region = self.boards[region].parent
		return out

	def parts_in(self, region: int | None) -> list[Part]:
		return [p for p in self.parts.values() if p.region == region and p.kind not in GATES]

	def boards_in(self, region: int | None) -> list[Board]:
		return [b for b in self.boards.values() if b.parent == region]

	def wires_in(self, region: int | None) -> list[Wire]:
		return [w for w in self.wires.values() if w.region == region]

	def dotted_of(self, part: int) -> DottedLink | None:
		for d in self.dotted:
			if d.part == part:
				return d
		return None

	def board_ports(self, board: int) -> tuple[list[int], int | None, list[int], int | None]:
		"""(outer neg wires, outer pos wire, inner neg wires, inner pos wire) of a board."""
		b = self.boards[board]
		outer_neg = [self.parts[g].top[0] for g in b.neg_gates]
		inner_neg = [self.parts[g].bottom[0] for g in b.neg_gates]
		if b.pos_gate is None:
			return outer_neg, None, inner_neg, None
		pos = self.parts[b.pos_gate]
		return outer_neg, pos.bottom[0], inner_neg, pos.top[0]

	@property
	def top_types(self) -> list[TypeExpr]:
		return [self.wires[w].ty for w in self.outer_top]

	@property
	def bottom_types(self) -> list[TypeExpr]:
		return [self.wires[w].ty for w in self.outer_bottom]

	def count(self, kind: PartKind) -> int:
		return sum(1 for p in self.parts.values() if p.kind == kind)


class GraphBuilder:
	"""Mutable workspace for constructing and editing a Graph."""

	def __init__(self) -> None:
		self.wires: dict[int, list] = {}  # id -> [type, region]
		self.parts: dict[int, dict] = {}
		self.boards: dict[int, dict] = {}
		self.dotted: list[DottedLink] = []
		self.outer_top: list[int] = []
		self.outer_bottom: list[int] = []
		self._next = 0

	def _fresh(self) -> int:
		self._next += 1
		return self._next

	@classmethod
	def from_graph(cls, g: Graph) -> "GraphBuilder":
		b = cls()
		b.wires = {w.id: [w.ty, w.region] for w in g.wires.values()}
		b.parts = {
			p.id: {
				"kind": p.kind,
				"top": list(p.top),
				"bottom": list(p.bottom),
				"region": p.region,
				"owner": p.owner,
				"label": p.label,
			}
			for p in g.parts.values()
		}
		b.boards = {
			x.id: {"parent": x.parent, "neg": list(x.neg_gates), "pos": x.pos_gate} for x in g.boards.values()
		}
		b.dotted = list(g.dotted)
		b.outer_top = list(g.outer_top)
		b.outer_bottom = list(g.outer_bottom)
		b._next = max([0, *b.wires, *b.parts, *b.boards])
		return b

	def wire(self, ty: TypeExpr, region: int | None) -> int:
		wid = self._fresh()
		self.wires[wid] = [ty, region]
		return wid

	def part(
		self,
		kind: PartKind,
		top: Iterable[int] = (),
		bottom: Iterable[int] = (),
		region: int | None = None,
		owner: int | None = None,
		label: str = "",
	) -> int:
		pid = self._fresh()
		self.parts[pid] = {
			"kind": kind,
			"top": list(top),
			"bottom": list(bottom),
			"region": region,
			"owner": owner,
			"label": label,
		}
		return pid

	def board(self, parent: int | None) -> int:
		bid = self._fresh()
		self.boards[bid] = {"parent": parent, "neg": [], "pos": None}
		return bid

	def neg_gate(self, board: int, outer: int) -> int:
		"""Attach a negative gate below `outer`; returns the new inner wire."""
		ty = self.wires[outer][0]
		if not isinstance(ty, Bang):
			raise GraphError(f"negative gate on non-! wire {show_type(ty)}")
		inner = self.wire(ty.body, board)
		gid = self.part(PartKind.NEG_GATE, [outer], [inner], self.boards[board]["parent"], owner=board)
		self.boards[board]["neg"].append(gid)
		return inner

	def pos_gate(self, board: int, inner: int) -> int:
		"""Close `board` with a positive gate below `inner`; returns the outer wire."""
		outer = self.wire(Bang(self.wires[inner][0]), self.boards[board]["parent"])
		gid = self.part(PartKind.POS_GATE, [inner], [outer], self.boards[board]["parent"], owner=board)
		self.boards[board]["pos"] = gid
		return outer

	def link(self, part: int, host: int) -> None:
		self.dotted.append(DottedLink(part, host))

	def replace_wire(self, old: int, new: int) -> None:
		"""Every attachment of `old` becomes an attachment of `new`; `old` disappears."""
		if old == new:
			return
		for p in self.parts.values():
			p["top"] = [new if w == old else w for w in p["top"]]
			p["bottom"] = [new if w == old else w for w in p["bottom"]]
		self.outer_top = [new if w == old else w for w in self.outer_top]
		self.outer_bottom = [new if w == old else w for w in self.outer_bottom]
		self.dotted = [DottedLink(d.part, new) if d.host == old else d for d in self.dotted]
		del self.wires[old]

	def fuse(self, upper: int, lower: int) -> None:
		"""Join a wire whose lower end is free with a wire whose upper end is free."""
		self.replace_wire(lower, upper)

	def remove_part(self, pid: int) -> None:
		del self.parts[pid]
		self.dotted = [d for d in self.dotted if d.part != pid]

	def remove_wire(self, wid: int, rehost: int | None = None) -> None:
		moved = []
		for d in self.dotted:
			if d.host == wid:
				if rehost is not None:
					moved.append(DottedLink(d.part, rehost))
			else:
				moved.append(d)
		self.dotted = moved
		del self.wires[wid]

	def any_wire(self, region: int | None, avoid: Iterable[int] = ()) -> int | None:
		avoid = set(avoid)
		for wid in sorted(self.wires):
			if self.wires[wid][1] == region and wid not in avoid:
				return wid
		return None

	def build(self) -> Graph:
		return Graph(
			wires={k: Wire(k, ty, reg) for k, (ty, reg) in self.wires.items()},
			parts={
				k: Part(k, p["kind"], tuple(p["top"]), tuple(p["bottom"]), p["region"], p["owner"], p["label"])
				for k, p in self.parts.items()
			},
			boards={k: Board(k, b["parent"], tuple(b["neg"]), b["pos"]) for k, b in self.boards.items()},
			dotted=tuple(self.dotted),
			outer_top=tuple(self.outer_top),
			outer_bottom=tuple(self.outer_bottom),
		)


# Translation -----------------------------------------------------------------


def _split(b: GraphBuilder, kind: PartKind, w: int, region: int | None) -> tuple[int, int]:
	ty = b.wires[w][0]
	x = b.wire(ty.left, region)
	y = b.wire(ty.right, region)
	b.part(kind, [w], [x, y], region)
	return x, y


def _join(b: GraphBuilder, kind: PartKind, x: int, y: int, region: int | None) -> int:
	cons = Tensor if kind == PartKind.TENSOR_INTRO else Par
	out = b.wire(cons(b.wires[x][0], b.wires[y][0]), region)
	b.part(kind, [x, y], [out], region)
	return out


def _single(b: GraphBuilder, kind: PartKind, w: int, target: TypeExpr, region: int | None, label: str = "") -> int:
	out = b.wire(target, region)
	b.part(kind, [w], [out], region, label=label)
	return out


def _unit_elim(b: GraphBuilder, w: int, host: int, region: int | None) -> None:
	pid = b.part(PartKind.UNIT_ELIM, [w], [], region)
	b.link(pid, host)


def _counit_intro(b: GraphBuilder, host: int, region: int | None) -> int:
	out = b.wire(BOT, region)
	pid = b.part(PartKind.COUNIT_INTRO, [], [out], region)
	b.link(pid, host)
	return out


def _generator(b: GraphBuilder, g: Gen, w: int, region: int | None) -> int:
	TE, TI, PE, PI = PartKind.TENSOR_ELIM, PartKind.TENSOR_INTRO, PartKind.PAR_ELIM, PartKind.PAR_INTRO
	name, args = g.name, g.args
	if name == "delta":
		return _single(b, PartKind.DELTA, w, Bang(Bang(args[0])), region)
	if name == "eps":
		return _single(b, PartKind.EPS, w, args[0], region)
	if name == "dup":
		x = b.wire(Bang(args[0]), region)
		y = b.wire(Bang(args[0]), region)
		b.part(PartKind.DUPLICATOR, [w], [x, y], region)
		return _join(b, TI, x, y, region)
	if name == "weak":
		return _single(b, PartKind.ELIMINATOR, w, ONE, region)
	if name == "phi":
		x, y = _split(b, TE, w, region)
		board = b.board(region)
		xi = b.neg_gate(board, x)
		yi = b.neg_gate(board, y)
		return b.pos_gate(board, _join(b, TI, xi, yi, board))
	if name == "phi0":
		board = b.board(region)
		u = b.wire(ONE, board)
		b.part(PartKind.UNIT_INTRO, [], [u], board)
		out = b.pos_gate(board, u)
		_unit_elim(b, w, out, region)
		return out
	if name == "dist":
		a, bc = _split(b, TE, w, region)
		x, c = _split(b, PE, bc, region)
		return _join(b, PI, _join(b, TI, a, x, region), c, region)
	if name == "dist'":
		ab, c = _split(b, TE, w, region)
		a, x = _split(b, PE, ab, region)
		return _join(b, PI, a, _join(b, TI, x, c, region), region)
	if name == "tau":
		a = b.wire(args[0], region)
		na = b.wire(Dual(args[0]), region)
		b.part(PartKind.DIODE_RIGHT, [], [a, na], region)
		_unit_elim(b, w, a, region)
		return _join(b, PI, a, na, region)
	if name == "gamma":
		na, a = _split(b, TE, w, region)
		b.part(PartKind.DIODE_LEFT, [na, a], [], region)
		return _counit_intro(b, na, region)
	if name in ("assocT", "assocP"):
		e, i = (TE, TI) if name == "assocT" else (PE, PI)
		ab, c = _split(b, e, w, region)
		a, x = _split(b, e, ab, region)
		return _join(b, i, a, _join(b, i, x, c, region), region)
	if name in ("assocT'", "assocP'"):
		e, i = (TE, TI) if name == "assocT'" else (PE, PI)
		a, bc = _split(b, e, w, region)
		x, c = _split(b, e, bc, region)
		return _join(b, i, _join(b, i, a, x, region), c, region)
	if name in ("symT", "symP"):
		e, i = (TE, TI) if name == "symT" else (PE, PI)
		a, x = _split(b, e, w, region)
		return _join(b, i, x, a, region)
	if name in ("lunitT", "runitT"):
		left, right = _split(b, TE, w, region)
		unit, keep = (left, right) if name == "lunitT" else (right, left)
		_unit_elim(b, unit, keep, region)
		return keep
	if name in ("lunitP", "runitP"):
		left, right = _split(b, PE, w, region)
		unit, keep = (left, right) if name == "lunitP" else (right, left)
		b.part(PartKind.COUNIT_ELIM, [unit], [], region)
		return keep
	if name in ("lunitT'", "runitT'"):
		u = b.wire(ONE, region)
		b.part(PartKind.UNIT_INTRO, [], [u], region)
		return _join(b, TI, u, w, region) if name == "lunitT'" else _join(b, TI, w, u, region)
	if name in ("lunitP'", "runitP'"):
		u = _counit_intro(b, w, region)
		return _join(b, PI, u, w, region) if name == "lunitP'" else _join(b, PI, w, u, region)
	if name == "shuffleT":
		ab, cd = _split(b, TE, w, region)
		a, x = _split(b, TE, ab, region)
		c, d = _split(b, TE, cd, region)
		return _join(b, TI, _join(b, TI, a, c, region), _join(b, TI, x, d, region), region)
	raise GraphError(f"no graph for generator {name}")


def _translate(b: GraphBuilder, t: TermExpr, w: int, region: int | None) -> int:
	if isinstance(t, Id):
		return w
	if isinstance(t, Comp):
		return _translate(b, t.second, _translate(b, t.first, w, region), region)
	if isinstance(t, (TensorM, ParM)):
		elim, intro = (
			(PartKind.TENSOR_ELIM, PartKind.TENSOR_INTRO)
			if isinstance(t, TensorM)
			else (PartKind.PAR_ELIM, PartKind.PAR_INTRO)
		)
		x, y = _split(b, elim, w, region)
		return _join(b, intro, _translate(b, t.left, x, region), _translate(b, t.right, y, region), region)
	if isinstance(t, BangM):
		board = b.board(region)
		inner = b.neg_gate(board, w)
		return b.pos_gate(board, _translate(b, t.body, inner, board))
	if isinstance(t, Gen):
		return _generator(b, t, w, region)
	if isinstance(t, Const):
		return _single(b, PartKind.GENERATOR, w, t.target, region, label=t.name)
	if isinstance(t, MetaMor):
		raise GraphError(f"cannot translate metavariable ?{t.name}")
	raise GraphError(f"not a term: {t!r}")


def term_to_graph(j: Judgement | TermExpr) -> Graph:
	"""Compositional translation of a (typechecked) term into a graph."""
	if not isinstance(j, Judgement):
		src, tgt = boundary(j)
		j = Judgement(j, src, tgt)
	b = GraphBuilder()
	w = b.wire(j.source, None)
	b.outer_top.append(w)
	b.outer_bottom.append(_translate(b, j.term, w, None))
	g = b.build()
	log.debug("translated term into %d parts, %d wires, %d boards", len(g.parts), len(g.wires), len(g.boards))
	return g


# JSON ------------------------------------------------------------------------


class WireModel(BaseModel):
	id: int
	type: str
	region: int | None = None


class PartModel(BaseModel):
	id: int
	kind: PartKind
	top: list[int] = Field(default_factory=list)
	bottom: list[int] = Field(default_factory=list)
	region: int | None = None
	owner: int | None = None
	label: str = ""


class BoardModel(BaseModel):
	model_config = ConfigDict(populate_by_name=True)

	id: int
	parent: int | None = None
	neg_gates: list[int] = Field(default_factory=list, alias="negGates")
	pos_gate: int | None = Field(default=None, alias="posGate")


class DottedModel(BaseModel):
	part: int
	host: int


class GraphModel(BaseModel):
	model_config = ConfigDict(populate_by_name=True)

	wires: list[WireModel] = Field(default_factory=list)
	parts: list[PartModel] = Field(default_factory=list)
	boards: list[BoardModel] = Field(default_factory=list)
	dotted: list[DottedModel] = Field(default_factory=list)
	outer_top: list[int] = Field(default_factory=list, alias="outerTop")
	outer_bottom: list[int] = Field(default_factory=list, alias="outerBottom")


def to_model(g: Graph) -> GraphModel:
	return GraphModel(
		wires=[WireModel(id=w.id, type=show_type(w.ty), region=w.region) for w in sorted(g.wires.values(), key=lambda w: w.id)],
		parts=[
			PartModel(id=p.id, kind=p.kind, top=list(p.top), bottom=list(p.bottom), region=p.region, owner=p.owner, label=p.label)
			for p in sorted(g.parts.values(), key=lambda p: p.id)
		],
		boards=[
			BoardModel(id=x.id, parent=x.parent, neg_gates=list(x.neg_gates), pos_gate=x.pos_gate)
			for x in sorted(g.boards.values(), key=lambda x: x.id)
		],
		dotted=[DottedModel(part=d.part, host=d.host) for d in g.dotted],
		outer_top=list(g.outer_top),
		outer_bottom=list(g.outer_bottom),
	)


def from_model(m: GraphModel) -> Graph:
	return Graph(
		wires={w.id: Wire(w.id, parse_type(w.type), w.region) for w in m.wires},
		parts={
			p.id: Part(p.id, p.kind, tuple(p.top), tuple(p.bottom), p.region, p.owner, p.label) for p in m.parts
		},
		boards={x.id: Board(x.id, x.parent, tuple(x.neg_gates), x.pos_gate) for x in m.boards},
		dotted=tuple(DottedLink(d.part, d.host) for d in m.dotted),
		outer_top=tuple(m.outer_top),
		outer_bottom=tuple(m.outer_bottom),
	)


def to_json(g: Graph, indent: int | None = 2) -> str:
	return to_model(g).model_dump_json(by_alias=True, indent=indent)


def from_json(text: str) -> Graph:
	return from_model(GraphModel.model_validate_json(text))


def graph_schema() -> dict:
	return GraphModel.model_json_schema(by_alias=True)


# DOT -------------------------------------------------------------------------


def _end_node(end: End) -> str:
	if end.part is None:
		return f"{'top' if end.side == 'top' else 'bot'}{end.index}"
	return f"p{end.part}"


def _dot_region(g: Graph, region: int | None, indent: str) -> Iterator[str]:
	for p in sorted(g.parts.values(), key=lambda p: p.id):
		home = p.owner if p.kind in GATES else p.region
		if home != region:
			continue
		label = p.kind.value + (f" {p.label}" if p.label else "")
		yield f'{indent}p{p.id} [label="{label}"];'
	for child in sorted(g.boards_in(region), key=lambda x: x.id):
		yield f"{indent}subgraph cluster_b{child.id} {{"
		yield f'{indent}  label="board {child.id}";'
		yield from _dot_region(g, child.id, indent + "  ")
		yield f"{indent}}}"


def to_dot(g: Graph) -> str:
	"""Graphviz rendering; boards become nested clusters."""
	lines = ["digraph G {", "  rankdir=TB;"]
	for i in range(len(g.outer_top)):
		lines.append(f'  top{i} [shape=point];')
	for i in range(len(g.outer_bottom)):
		lines.append(f'  bot{i} [shape=point];')
	lines.extend(_dot_region(g, None, "  "))
	for w in sorted(g.wires.values(), key=lambda w: w.id):
		lines.append(
			f'  {_end_node(g.upper(w.id))} -> {_end_node(g.lower(w.id))} [label="{show_type(w.ty)}"];'
		)
	for d in g.dotted:
		lines.append(f'  p{d.part} -> {_end_node(g.upper(d.host))} [style=dotted, arrowhead=none];')
	lines.append("}")
	return "\n".join(lines)


def is_atomic(ty: TypeExpr) -> bool:
	return isinstance(ty, Atom)


__all__ = [
	"PartKind",
	"Wire",
	"Part",
	"Board",
	"DottedLink",
	"End",
	"Graph",
	"GraphBuilder",
	"GraphModel",
	"term_to_graph",
	"to_json",
	"from_json",
	"to_dot",
	"graph_schema",
	"is_atomic",
]
