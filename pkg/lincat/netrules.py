"""Graph contraction (beta) and constrained expansion (eta)."""

from __future__ import annotations

import logging
import random

from .graph import LENS_TOPS, Graph, GraphBuilder, PartKind
from .syntax import Bang, Bot, Dual, One, Par, Tensor

log = logging.getLogger(__name__)

_INTRO_ELIM = {
	PartKind.TENSOR_INTRO: PartKind.TENSOR_ELIM,
	PartKind.PAR_INTRO: PartKind.PAR_ELIM,
}
_TERMINALS = {
	PartKind.UNIT_INTRO: PartKind.UNIT_ELIM,
	PartKind.COUNIT_INTRO: PartKind.COUNIT_ELIM,
}


def _above(b: GraphBuilder, wire: int) -> tuple[int, int] | None:
	for pid, p in b.parts.items():
		if wire in p["bottom"]:
			return pid, p["bottom"].index(wire)
	return None


def _below(b: GraphBuilder, wire: int) -> tuple[int, int] | None:
	for pid, p in b.parts.items():
		if wire in p["top"]:
			return pid, p["top"].index(wire)
	return None


def _redex_kind(b: GraphBuilder, wire: int) -> str | None:
	up, down = _above(b, wire), _below(b, wire)
	if up is None or down is None:
		return None
	(pu, iu), (pd, idn) = up, down
	ku, kd = b.parts[pu]["kind"], b.parts[pd]["kind"]
	if _INTRO_ELIM.get(ku) == kd:
		return "intro-elim"
	if _TERMINALS.get(ku) == kd:
		return "terminal"
	if ku == PartKind.POS_GATE and kd == PartKind.NEG_GATE:
		return "boards"
	if ku == PartKind.DIODE_RIGHT and kd == PartKind.DIODE_LEFT and iu == 1 and idn == 0:
		return "diodes"
	return None


def _merge_boards(b: GraphBuilder, pos: int, neg: int) -> None:
	"""A positive gate sitting on a negative gate: the upper board flows into the lower."""
	upper = b.parts[pos]["owner"]
	lower = b.parts[neg]["owner"]
	inner_up = b.parts[pos]["top"][0]
	inner_down = b.parts[neg]["bottom"][0]
	link = b.parts[pos]["bottom"][0]
	gates = b.boards[lower]["neg"]
	at = gates.index(neg)
	b.boards[lower]["neg"] = gates[:at] + b.boards[upper]["neg"] + gates[at + 1:]
	for gid in b.boards[upper]["neg"]:
		b.parts[gid]["owner"] = lower
	for p in b.parts.values():
		if p["region"] == upper:
			p["region"] = lower
	for w in b.wires.values():
		if w[1] == upper:
			w[1] = lower
	for x in b.boards.values():
		if x["parent"] == upper:
			x["parent"] = lower
	b.remove_part(pos)
	b.remove_part(neg)
	b.remove_wire(link, rehost=inner_up)
	b.fuse(inner_up, inner_down)
	del b.boards[upper]


def _contract(b: GraphBuilder, wire: int, kind: str) -> None:
	(pu, _), (pd, _) = _above(b, wire), _below(b, wire)
	if kind == "intro-elim":
		ins = list(b.parts[pu]["top"])
		outs = list(b.parts[pd]["bottom"])
		b.remove_part(pu)
		b.remove_part(pd)
		b.remove_wire(wire, rehost=ins[0])
		for x, y in zip(ins, outs):
			b.fuse(x, y)
	elif kind == "terminal":
		link = next((d for d in b.dotted if d.part in (pu, pd)), None)
		b.remove_part(pu)
		b.remove_part(pd)
		host = link.host if link is not None and link.host != wire else b.any_wire(b.wires[wire][1], avoid=[wire])
		b.remove_wire(wire, rehost=host)
	elif kind == "boards":
		_merge_boards(b, pu, pd)
	elif kind == "diodes":
		a_down = b.parts[pu]["bottom"][0]
		a_up = b.parts[pd]["top"][1]
		b.remove_part(pu)
		b.remove_part(pd)
		if a_down == a_up:
			b.remove_wire(wire)
			b.remove_wire(a_down)
			return
		b.remove_wire(wire, rehost=a_up)
		b.fuse(a_up, a_down)


def beta_normalize(g: Graph, rng: random.Random | None = None) -> Graph:
	"""Contract redexes until none remain; `rng` picks among redexes in random order."""
	b = GraphBuilder.from_graph(g)
	steps = 0
	while True:
		found = [(w, k) for w in sorted(b.wires) if (k := _redex_kind(b, w)) is not None]
		if not found:
			break
		wire, kind = rng.choice(found) if rng is not None else found[0]
		log.debug("beta %s at wire %d", kind, wire)
		_contract(b, wire, kind)
		steps += 1
	if steps:
		log.debug("beta: %d contractions", steps)
	return b.build()


def _kind_at(b: GraphBuilder, end: tuple[int, int] | None) -> tuple[PartKind | None, int]:
	if end is None:
		return None, -1
	return b.parts[end[0]]["kind"], end[1]


def _eta_blocked(b: GraphBuilder, wire: int) -> bool:
	ty = b.wires[wire][0]
	up_kind, up_idx = _kind_at(b, _above(b, wire))
	down_kind, down_idx = _kind_at(b, _below(b, wire))
	if isinstance(ty, Tensor):
		return up_kind == PartKind.TENSOR_INTRO or down_kind == PartKind.TENSOR_ELIM
	if isinstance(ty, Par):
		return up_kind == PartKind.PAR_INTRO or down_kind == PartKind.PAR_ELIM
	if isinstance(ty, One):
		return up_kind == PartKind.UNIT_INTRO or down_kind == PartKind.UNIT_ELIM
	if isinstance(ty, Bot):
		return up_kind == PartKind.COUNIT_INTRO or down_kind == PartKind.COUNIT_ELIM
	if isinstance(ty, Bang):
		return up_kind == PartKind.POS_GATE or down_kind == PartKind.NEG_GATE or down_kind in LENS_TOPS
	if isinstance(ty, Dual):
		return (up_kind == PartKind.DIODE_RIGHT and up_idx == 1) or (
			down_kind == PartKind.DIODE_LEFT and down_idx == 0
		)
	return True


def _detach_lower(b: GraphBuilder, wire: int) -> int:
	"""Give `wire` a fresh lower half: returns the new wire now holding the old lower end."""
	ty, region = b.wires[wire]
	fresh = b.wire(ty, region)
	down = _below(b, wire)
	if down is None:
		b.outer_bottom = [fresh if w == wire else w for w in b.outer_bottom]
	else:
		pid, idx = down
		b.parts[pid]["top"][idx] = fresh
	return fresh


def _expand(b: GraphBuilder, wire: int) -> list[int]:
	ty, region = b.wires[wire]
	lower = _detach_lower(b, wire)
	if isinstance(ty, (Tensor, Par)):
		elim, intro = (
			(PartKind.TENSOR_ELIM, PartKind.TENSOR_INTRO) if isinstance(ty, Tensor) else (PartKind.PAR_ELIM, PartKind.PAR_INTRO)
		)
		x = b.wire(ty.left, region)
		y = b.wire(ty.right, region)
		b.part(elim, [wire], [x, y], region)
		b.part(intro, [x, y], [lower], region)
		return [x, y]
	if isinstance(ty, One):
		pid = b.part(PartKind.UNIT_ELIM, [wire], [], region)
		b.part(PartKind.UNIT_INTRO, [], [lower], region)
		b.link(pid, lower)
		return []
	if isinstance(ty, Bot):
		b.part(PartKind.COUNIT_ELIM, [wire], [], region)
		pid = b.part(PartKind.COUNIT_INTRO, [], [lower], region)
		b.link(pid, wire)
		return []
	if isinstance(ty, Bang):
		board = b.board(region)
		inner = b.neg_gate(board, wire)
		gid = b.part(PartKind.POS_GATE, [inner], [lower], region, owner=board)
		b.boards[board]["pos"] = gid
		return [inner]
	# Dual(A): cap on the incoming half, cup feeding the outgoing half
	a = b.wire(ty.body, region)
	b.part(PartKind.DIODE_LEFT, [wire, a], [], region)
	b.part(PartKind.DIODE_RIGHT, [], [a, lower], region)
	return [a]


def eta_expand(g: Graph) -> Graph:
	"""Expand compound wires, outer regions first, skipping expansions that would make redexes."""
	b = GraphBuilder.from_graph(g)
	depth = {None: 0}

	def region_depth(r: int | None) -> int:
		if r not in depth:
			depth[r] = region_depth(b.boards[r]["parent"]) + 1
		return depth[r]

	queue = sorted(b.wires, key=lambda w: (region_depth(b.wires[w][1]), w))
	count = 0
	while queue:
		wire = queue.pop(0)
		if wire not in b.wires or _eta_blocked(b, wire):
			continue
		new = _expand(b, wire)
		count += 1
		log.debug("eta on wire %d", wire)
		queue.extend(new)
	if count:
		log.debug("eta: %d expansions", count)
	return b.build()


def normalize_graph(g: Graph, rng: random.Random | None = None) -> Graph:
	return eta_expand(beta_normalize(g, rng))
