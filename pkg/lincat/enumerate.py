"""The counting process on normal graphs.

Wires carry (unbarred) elements. Every part contributes a weight once all of its ports are
known; the coefficient is the sum, over all completions of the outer annotation, of the
product of weights. Deterministic parts propagate values, the rest are branched on: a
duplicator splits a known top into ordered legs, a board with a known positive gate expands
into its column polynomial, a board known only on its negative gates ranges over the positive
values whose columns reach them, a lens with a known flat side ranges over the nested
multisets that flatten to it, and a cap with both ends open ranges over the truncated index set.

Modulo a prime p the board polynomial of a multiplicity n is taken digit by digit in base p,
(sum_a w_a x^a)^(p^j) = sum_a w_a x^(p^j a) (mod p), so counts such as p^(p^k) never unfold.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from sympy import isprime, multiplicity
from sympy.utilities.iterables import multiset_partitions

from .errors import AnnotationError, EnumerationLimit, GraphError, NotPrimeError
from .graph import Graph, PartKind
from .semantics import (
	EMPTY,
	STAR,
	BarVal,
	Element,
	Interp,
	MSet,
	PairVal,
	elem_key,
	elements,
	format_element,
	member,
	strip_bars,
)
from .syntax import Bang, Dual, Par, Tensor, TypeExpr

log = logging.getLogger(__name__)

DEFAULT_ENUM_CAP = 64
OPTION_LIMIT = 50_000

Values = dict[int, Element]
Node = tuple[str, int]
Poly = dict[tuple[MSet, ...], int]

_INTRO = (PartKind.TENSOR_INTRO, PartKind.PAR_INTRO)
_ELIM = (PartKind.TENSOR_ELIM, PartKind.PAR_ELIM)


# Modular helpers -------------------------------------------------------------


def _require_prime(p: int) -> None:
	if not isprime(p):
		raise NotPrimeError(p)


def pow_reduce(a: int, l: int, p: int) -> int:
	"""a^(p^l) mod p, which Fermat collapses to a mod p."""
	_require_prime(p)
	if l < 0:
		raise ValueError("exponent level must be >= 0")
	return a % p


def binom_mod(n: int, j: int, p: int) -> int:
	"""C(n, j) mod p digit by digit in base p (Lucas)."""
	_require_prime(p)
	if j < 0 or j > n:
		return 0
	out = 1
	while n or j:
		n, nd = divmod(n, p)
		j, jd = divmod(j, p)
		if jd > nd:
			return 0
		out = out * math.comb(nd, jd) % p
	return out


def multinomial_mod(n: int, parts: list[int] | tuple[int, ...], p: int) -> int:
	"""n! / prod(k!) mod p as a product of Lucas binomials."""
	if sum(parts) != n or any(k < 0 for k in parts):
		raise ValueError("parts must be non-negative and sum to n")
	out = 1
	remaining = n
	for k in parts:
		out = out * binom_mod(remaining, k, p) % p
		remaining -= k
	return out % p


# Multiset helpers ------------------------------------------------------------


class _Conflict(Exception):
	pass


def _as_mset(e: Element) -> MSet:
	if not isinstance(e, MSet):
		raise _Conflict
	return e


def _flatten(e: Element) -> MSet:
	total = EMPTY
	for inner, n in _as_mset(e).entries:
		total = total + _as_mset(inner).scale(n)
	return total


def _compositions(c: int, k: int) -> Iterator[tuple[int, ...]]:
	if k == 1:
		yield (c,)
		return
	for first in range(c + 1):
		for rest in _compositions(c - first, k - 1):
			yield (first, *rest)


def ordered_splits(m: MSet, k: int) -> Iterator[tuple[MSet, ...]]:
	"""Every way to write m = m_1 + ... + m_k with the m_i in order."""
	if k == 0:
		if not m.entries:
			yield ()
		return
	per_elem = [[(e, comp) for comp in _compositions(n, k)] for e, n in m.entries]

	def walk(i: int, acc: list[Counter]) -> Iterator[tuple[MSet, ...]]:
		if i == len(per_elem):
			yield tuple(MSet.from_counts(c) for c in acc)
			return
		for e, comp in per_elem[i]:
			nxt = [Counter(c) for c in acc]
			for slot, n in enumerate(comp):
				if n:
					nxt[slot][e] += n
			yield from walk(i + 1, nxt)

	yield from walk(0, [Counter() for _ in range(k)])


def split_count(m: MSet, k: int) -> int:
	if k == 0:
		return 0 if m.entries else 1
	return math.prod(math.comb(n + k - 1, k - 1) for _, n in m.entries)


def nested_splits(m: MSet, cap: int) -> Iterator[MSet]:
	"""Every multiset of multisets with at most `cap` members whose flattening is m.

	Empty members are allowed, so the list depends on the cap.
	"""
	items = [i for i, (_, n) in enumerate(m.entries) for _ in range(n)]
	partitions = multiset_partitions(items) if items else iter([[]])
	for blocks in partitions:
		if len(blocks) > cap:
			continue
		full = MSet.of(MSet.of(m.entries[i][0] for i in block) for block in blocks)
		for empties in range(cap - len(blocks) + 1):
			yield full + MSet(((EMPTY, empties),)) if empties else full


def _columns(alpha: list[MSet]) -> Iterator[Counter]:
	"""Ways to read equally sized multisets as a multiset of columns, one entry from each."""
	if not alpha[0].entries:
		yield Counter()
		return
	first = alpha[0].entries[0][0]
	for picks in itertools.product(*(m.distinct() for m in alpha[1:])):
		row = (first, *picks)
		rest = [m - MSet(((x, 1),)) for m, x in zip(alpha, row)]
		for tail in _columns(rest):
			tail[row] += 1
			yield tail


def _truncated(ty: TypeExpr) -> bool:
	if isinstance(ty, Bang):
		return True
	if isinstance(ty, (Tensor, Par)):
		return _truncated(ty.left) or _truncated(ty.right)
	if isinstance(ty, Dual):
		return _truncated(ty.body)
	return False


def _widest(e: Element) -> int:
	"""Largest multiset cardinality anywhere inside `e`."""
	if isinstance(e, MSet):
		return max([e.cardinality, *(_widest(x) for x, _ in e.entries)])
	if isinstance(e, PairVal):
		return max(_widest(e.left), _widest(e.right))
	if isinstance(e, BarVal):
		return _widest(e.body)
	return 0


def annotation_size(e: Element) -> int:
	"""Total number of multiset occurrences, counted with multiplicity."""
	if isinstance(e, MSet):
		return sum(n * (1 + annotation_size(x)) for x, n in e.entries)
	if isinstance(e, PairVal):
		return annotation_size(e.left) + annotation_size(e.right)
	if isinstance(e, BarVal):
		return annotation_size(e.body)
	return 0


# The process -----------------------------------------------------------------


@dataclass
class EnumResult:
	value: int
	modulus: int | None = None
	branches: int = 0
	memo_hits: int = 0

	def __int__(self) -> int:
		return self.value


class _Process:
	def __init__(self, g: Graph, interp: Interp, modulus: int | None = None) -> None:
		self.g = g
		self.interp = interp
		self.modulus = modulus
		self.cap = interp.degree_cap
		self.branches = 0
		self.memo_hits = 0
		self._boards: dict[tuple[int, Element], Poly] = {}
		self._interiors: dict[tuple[int, Element], dict[tuple, int]] = {}
		self._sources: dict[tuple[int, tuple[Element, ...]], list[MSet]] = {}
		self._producers: dict[tuple[int, tuple[Element, ...]], list[Element]] = {}

	def _mod(self, n: int) -> int:
		return n % self.modulus if self.modulus else n

	# structure

	def nodes(self, region: int | None) -> list[Node]:
		return [("part", p.id) for p in self.g.parts_in(region)] + [("board", b.id) for b in self.g.boards_in(region)]

	def ports(self, node: Node) -> tuple[int, ...]:
		kind, i = node
		if kind == "part":
			p = self.g.parts[i]
			return p.top + p.bottom
		outer_neg, outer_pos, _, _ = self.g.board_ports(i)
		if outer_pos is None:
			raise GraphError(f"board {i} has no positive gate")
		return (*outer_neg, outer_pos)

	def _identity_board(self, bid: int) -> bool:
		_, _, inner_neg, inner_pos = self.g.board_ports(bid)
		return len(inner_neg) == 1 and inner_neg[0] == inner_pos

	# boards

	def interior(self, bid: int, b: Element) -> dict[tuple, int]:
		key = (bid, b)
		if key not in self._interiors:
			_, _, inner_neg, inner_pos = self.g.board_ports(bid)
			self._interiors[key] = self.solve(bid, {inner_pos: b}, tuple(inner_neg))
		return self._interiors[key]

	def _lift(self, col: dict[tuple, int], shift: int) -> Poly:
		out: Poly = {}
		for a, w in col.items():
			w = self._mod(w)
			if w:
				out[tuple(MSet(((x, shift),)) for x in a)] = w
		return out

	def _mul(self, poly: Poly, factor: Poly) -> Poly:
		out: Counter = Counter()
		for m, c in poly.items():
			for f, w in factor.items():
				out[tuple(x + y for x, y in zip(m, f))] += c * w
		return {k: self._mod(v) for k, v in out.items() if self._mod(v)}

	def board_column(self, bid: int, beta: Element) -> Poly:
		"""{(alpha_1, ..., alpha_n): weight} for the board with positive annotation beta."""
		key = (bid, beta)
		if key in self._boards:
			self.memo_hits += 1
			log.debug("board %d memo hit", bid)
			return self._boards[key]
		outer_neg, _, _, _ = self.g.board_ports(bid)
		poly: Poly = {tuple(EMPTY for _ in outer_neg): 1}
		entries = beta.entries if isinstance(beta, MSet) else ()
		if not isinstance(beta, MSet):
			poly = {}
		for b, count in entries:
			col = self.interior(bid, b)
			if self.modulus:
				shift = 1
				while count and poly:
					# skip runs of zero digits in one step
					zeros = multiplicity(self.modulus, count)
					if zeros:
						count //= self.modulus**zeros
						shift *= self.modulus**zeros
					count, digit = divmod(count, self.modulus)
					if digit:
						factor = self._lift(col, shift)
						for _ in range(digit):
							poly = self._mul(poly, factor)
					shift *= self.modulus
			else:
				factor = self._lift(col, 1)
				for _ in range(count):
					poly = self._mul(poly, factor)
					if not poly:
						break
			if not poly:
				break
		self._boards[key] = poly
		return poly

	def producers(self, bid: int, row: tuple[Element, ...]) -> list[Element]:
		"""Inner positive values whose interior reaches the inner negative values `row`."""
		key = (bid, row)
		if key not in self._producers:
			_, _, inner_neg, inner_pos = self.g.board_ports(bid)
			known: Values = {}
			try:
				for w, x in zip(inner_neg, row):
					self._assign(known, w, x)
			except _Conflict:
				self._producers[key] = []
			else:
				self._producers[key] = [b for (b,) in self.solve(bid, known, (inner_pos,))]
		return self._producers[key]

	def _column_rows(self, alpha: list[MSet]) -> Iterator[Counter]:
		n = alpha[0].cardinality
		if len(alpha) == 1:
			yield Counter({(x,): m for x, m in alpha[0].entries})
		elif n == 0 or all(m.is_homogeneous() for m in alpha):
			yield Counter({tuple(m.entries[0][0] for m in alpha): n} if n else {})
		elif n <= self.cap:
			seen = set()
			for rows in _columns(alpha):
				key = frozenset(rows.items())
				if key not in seen:
					seen.add(key)
					yield rows
		else:
			raise EnumerationLimit(f"{len(alpha)} negative annotations of {n} elements cannot be read as columns")

	def board_sources(self, bid: int, alpha: tuple[Element, ...]) -> list[MSet]:
		"""Positive annotations whose board column reaches the negative annotations `alpha`."""
		key = (bid, alpha)
		if key in self._sources:
			self.memo_hits += 1
			return self._sources[key]
		msets = [_as_mset(a) for a in alpha]
		found: set[MSet] = set()
		if len({m.cardinality for m in msets}) == 1:
			for rows in self._column_rows(msets):
				partial = [EMPTY]
				for row, n in rows.items():
					values = self.producers(bid, row)
					k = len(values)
					if k > 1 and math.comb(n + k - 1, k - 1) > OPTION_LIMIT:
						raise EnumerationLimit(f"{n} copies of a column split over {k} positive values")
					shares = [MSet.from_counts(dict(zip(values, c))) for c in _compositions(n, k)] if k else []
					partial = [s + t for s in partial for t in shares]
					if len(partial) > OPTION_LIMIT:
						raise EnumerationLimit(f"a board has more than {OPTION_LIMIT} positive annotations")
					if not partial:
						break
				found.update(partial)
		self._sources[key] = sorted(found, key=elem_key)
		log.debug("board %d: %d positive annotations reach its negative gates", bid, len(found))
		return self._sources[key]

	# parts

	def _weight(self, node: Node, v: Values) -> int:
		kind, i = node
		if kind == "board":
			outer_neg, outer_pos, _, _ = self.g.board_ports(i)
			return self.board_column(i, v[outer_pos]).get(tuple(v[w] for w in outer_neg), 0)
		p = self.g.parts[i]
		k, t, b = p.kind, p.top, p.bottom
		try:
			if k in _INTRO:
				ok = v[b[0]] == PairVal(v[t[0]], v[t[1]])
			elif k in _ELIM:
				ok = v[t[0]] == PairVal(v[b[0]], v[b[1]])
			elif k in (PartKind.UNIT_INTRO, PartKind.COUNIT_INTRO):
				ok = v[b[0]] == STAR
			elif k in (PartKind.UNIT_ELIM, PartKind.COUNIT_ELIM):
				ok = v[t[0]] == STAR
			elif k == PartKind.DIODE_RIGHT:
				ok = v[b[0]] == v[b[1]]
			elif k == PartKind.DIODE_LEFT:
				ok = v[t[0]] == v[t[1]]
			elif k == PartKind.EPS:
				ok = v[t[0]] == MSet(((v[b[0]], 1),))
			elif k == PartKind.ELIMINATOR:
				ok = v[t[0]] == EMPTY and v[b[0]] == STAR
			elif k == PartKind.DELTA:
				ok = v[t[0]] == _flatten(v[b[0]])
			elif k == PartKind.DUPLICATOR:
				total = EMPTY
				for leg in b:
					total = total + _as_mset(v[leg])
				ok = v[t[0]] == total
			elif k == PartKind.GENERATOR:
				return self._constant(p.label).get(v[b[0]], {}).get(v[t[0]], 0)
			else:
				raise GraphError(f"{k.value} part {i} cannot be counted")
		except _Conflict:
			return 0
		return 1 if ok else 0

	def _constant(self, name: str):
		table = self.interp.constants.get(name)
		if table is None:
			raise AnnotationError(f"no matrix given for constant {name!r}")
		return table

	def _infer(self, node: Node, v: Values) -> dict[int, Element]:
		kind, i = node
		if kind == "board":
			if self._identity_board(i):
				outer_neg, outer_pos, _, _ = self.g.board_ports(i)
				if outer_pos in v and outer_neg[0] not in v:
					return {outer_neg[0]: v[outer_pos]}
				if outer_neg[0] in v and outer_pos not in v:
					return {outer_pos: v[outer_neg[0]]}
			return {}
		p = self.g.parts[i]
		k, t, b = p.kind, p.top, p.bottom
		if k in _INTRO or k in _ELIM:
			(x, y), z = (t, b[0]) if k in _INTRO else (b, t[0])
			if z in v:
				pair = v[z]
				if not isinstance(pair, PairVal):
					raise _Conflict
				return {x: pair.left, y: pair.right}
			if x in v and y in v:
				return {z: PairVal(v[x], v[y])}
		elif k in (PartKind.UNIT_INTRO, PartKind.COUNIT_INTRO):
			return {b[0]: STAR}
		elif k in (PartKind.UNIT_ELIM, PartKind.COUNIT_ELIM):
			return {t[0]: STAR}
		elif k in (PartKind.DIODE_RIGHT, PartKind.DIODE_LEFT):
			x, y = b if k == PartKind.DIODE_RIGHT else t
			if x in v:
				return {y: v[x]}
			if y in v:
				return {x: v[y]}
		elif k == PartKind.EPS:
			m, x = t[0], b[0]
			if x in v:
				return {m: MSet(((v[x], 1),))}
			if m in v:
				ms = _as_mset(v[m])
				if ms.cardinality != 1:
					raise _Conflict
				return {x: ms.entries[0][0]}
		elif k == PartKind.ELIMINATOR:
			return {t[0]: EMPTY, b[0]: STAR}
		elif k == PartKind.DELTA:
			if b[0] in v:
				return {t[0]: _flatten(v[b[0]])}
		elif k == PartKind.DUPLICATOR:
			open_legs = [w for w in b if w not in v]
			known = EMPTY
			for w in b:
				if w in v:
					known = known + _as_mset(v[w])
			if not open_legs:
				return {t[0]: known}
			if len(open_legs) == 1 and t[0] in v:
				top = _as_mset(v[t[0]])
				if not top.contains(known):
					raise _Conflict
				return {open_legs[0]: top - known}
		return {}

	# branching

	def _check_domain(self, v: Values) -> None:
		# a truncated index set cannot contain values wider than the cap
		widest = max((_widest(e) for e in v.values()), default=0)
		if widest > self.cap:
			raise EnumerationLimit(f"a known value of width {widest} exceeds the truncated index sets (cap {self.cap})")

	def _options(self, node: Node, v: Values) -> tuple[int, Iterator[dict[int, Element]], bool] | None:
		"""(count, choices, whether the choices range over a truncated index set)."""
		kind, i = node
		if kind == "board":
			outer_neg, outer_pos, _, _ = self.g.board_ports(i)
			if outer_pos in v:
				col = self.board_column(i, v[outer_pos])
				return len(col), (dict(zip(outer_neg, alpha)) for alpha in col), False
			if not outer_neg or any(w not in v for w in outer_neg):
				return None
			try:
				sources = self.board_sources(i, tuple(v[w] for w in outer_neg))
			except EnumerationLimit:
				return None
			return len(sources), ({outer_pos: beta} for beta in sources), False
		p = self.g.parts[i]
		if p.kind == PartKind.DELTA and p.top[0] in v and p.bottom[0] not in v:
			flat = _as_mset(v[p.top[0]])
			if flat.cardinality > self.cap:
				return None
			nested = list(nested_splits(flat, self.cap))
			return len(nested), ({p.bottom[0]: m} for m in nested), True
		if p.kind == PartKind.DUPLICATOR and p.top[0] in v:
			top = _as_mset(v[p.top[0]])
			known = EMPTY
			for w in p.bottom:
				if w in v:
					known = known + _as_mset(v[w])
			if not top.contains(known):
				return 0, iter(()), False
			open_legs = [w for w in p.bottom if w not in v]
			rest = top - known
			return split_count(rest, len(open_legs)), (dict(zip(open_legs, s)) for s in ordered_splits(rest, len(open_legs))), False
		if p.kind == PartKind.GENERATOR and p.bottom[0] in v:
			col = self._constant(p.label).get(v[p.bottom[0]], {})
			return len(col), ({p.top[0]: a} for a in col), False
		if p.kind in (PartKind.DIODE_RIGHT, PartKind.DIODE_LEFT):
			x, y = p.bottom if p.kind == PartKind.DIODE_RIGHT else p.top
			dom = elements(self.g.wires[y].ty, self.interp, self.cap)
			return len(dom), ({x: e, y: e} for e in dom), _truncated(self.g.wires[y].ty)
		return None

	@staticmethod
	def _rank(opt: tuple[int, Iterator[dict[int, Element]], bool]) -> tuple[bool, bool, int]:
		return opt[0] > OPTION_LIMIT, opt[2], opt[0]

	def _branch(self, v: Values, pending: set[Node]) -> Iterator[dict[int, Element]]:
		best: tuple[int, Iterator[dict[int, Element]], bool] | None = None
		for node in sorted(pending):
			try:
				opt = self._options(node, v)
			except _Conflict:
				return iter(())
			# exact choices first, then the fewest
			if opt is not None and (best is None or self._rank(opt) < self._rank(best)):
				best = opt
		if best is None:
			open_wires = sorted({w for node in pending for w in self.ports(node) if w not in v})
			if not open_wires:
				raise GraphError("enumeration stuck with every port known")
			doms = [(len(elements(self.g.wires[w].ty, self.interp, self.cap)), w) for w in open_wires]
			size, wire = min(doms)
			dom = elements(self.g.wires[wire].ty, self.interp, self.cap)
			log.debug("branching on wire %d over %d truncated elements", wire, size)
			best = (size, ({wire: e} for e in dom), _truncated(self.g.wires[wire].ty))
		if best[2]:
			self._check_domain(v)
		if best[0] > OPTION_LIMIT:
			raise EnumerationLimit(f"a branch point has {best[0]} options")
		return best[1]

	# search

	@staticmethod
	def _assign(v: Values, wire: int, value: Element) -> bool:
		if wire in v:
			if v[wire] != value:
				raise _Conflict
			return False
		v[wire] = value
		return True

	def _propagate(self, v: Values, pending: set[Node], weight: int) -> int:
		changed = True
		while changed and pending:
			changed = False
			for node in sorted(pending):
				if all(w in v for w in self.ports(node)):
					weight = self._mod(weight * self._weight(node, v))
					pending.discard(node)
					changed = True
					if not weight:
						return 0
					continue
				for w, value in self._infer(node, v).items():
					changed |= self._assign(v, w, value)
		return weight

	def _search(self, v: Values, pending: set[Node], weight: int, query: tuple[int, ...], out: Counter) -> None:
		v = dict(v)
		pending = set(pending)
		try:
			weight = self._propagate(v, pending, weight)
		except _Conflict:
			return
		if not weight:
			return
		if not pending:
			key = tuple(v[w] for w in query)
			out[key] = self._mod(out[key] + weight)
			return
		self.branches += 1
		for assignment in self._branch(v, pending):
			trial = dict(v)
			try:
				for w, value in assignment.items():
					self._assign(trial, w, value)
			except _Conflict:
				continue
			self._search(trial, pending, weight, query, out)

	def solve(self, region: int | None, known: Values, query: tuple[int, ...]) -> dict[tuple, int]:
		out: Counter = Counter()
		self._search(known, set(self.nodes(region)), 1, query, out)
		return {k: n for k, n in out.items() if n}


def _annotate(g: Graph, top: list[Element], bottom: list[Element], interp: Interp) -> Values | None:
	if len(top) != len(g.outer_top) or len(bottom) != len(g.outer_bottom):
		raise AnnotationError(
			f"graph has {len(g.outer_top)} top and {len(g.outer_bottom)} bottom wires, "
			f"got {len(top)} and {len(bottom)} annotations"
		)
	values: Values = {}
	for w, e in [*zip(g.outer_top, top), *zip(g.outer_bottom, bottom)]:
		ty = g.wires[w].ty
		if not member(e, ty, interp):
			raise AnnotationError(f"{format_element(e)} is not an element of the wire type")
		e = strip_bars(e)
		if values.get(w, e) != e:
			return None
		values[w] = e
	return values


def pi(g: Graph, top: list[Element], bottom: list[Element], interp: Interp, p: int | None = None) -> EnumResult:
	if p is not None:
		_require_prime(p)
	proc = _Process(g, interp, p)
	values = _annotate(g, top, bottom, interp)
	value = 0
	if values is not None:
		value = proc.solve(None, values, ()).get((), 0)
	log.debug("pi: value %d after %d branch points, %d memo hits", value, proc.branches, proc.memo_hits)
	return EnumResult(value, p, proc.branches, proc.memo_hits)


def pi_exact(
	g: Graph, top: list[Element], bottom: list[Element], interp: Interp, cap: int = DEFAULT_ENUM_CAP
) -> int:
	"""The coefficient counted by the process; refuses annotations larger than `cap`."""
	size = sum(annotation_size(e) for e in [*top, *bottom])
	if size > cap:
		raise EnumerationLimit(f"annotation size {size} exceeds the cap {cap}")
	return pi(g, top, bottom, interp).value


def pi_mod_p(g: Graph, top: list[Element], bottom: list[Element], p: int, interp: Interp) -> int:
	"""The coefficient modulo the prime p, with multiplicities handled digit by digit."""
	return pi(g, top, bottom, interp, p).value
