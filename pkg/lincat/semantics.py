"""The model: objects as sets, morphisms as natural-number coefficient matrices.

An element of an interpreted object is an atom label, the point `*`, a pair, or a finite
multiset (run-length: element -> multiplicity). A morphism f : A -> B is the matrix
M[a;b] with y[b] = sum_a M[a;b] x[a]. Every matrix we build is column-finite, so a column
(fixed target b) is computed exactly; the degree cap only bounds enumerated index sets.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Iterable, Iterator, Mapping, Union

from sympy import multiplicity, primerange
from tenacity import retry, retry_if_exception_type, stop_after_attempt

from .errors import (
	AnnotationError,
	IndexOutsideTruncation,
	ParseError,
	TruncationInstability,
	UndeclaredAtomError,
)
from .syntax import (
	Atom,
	Bang,
	BangM,
	Bot,
	Comp,
	Const,
	Dual,
	Gen,
	Id,
	Judgement,
	One,
	Par,
	ParM,
	Tensor,
	TensorM,
	TermExpr,
	TypeExpr,
	show_type,
)

log = logging.getLogger(__name__)


# Elements ------------------------------------------------------------------


@dataclass(frozen=True)
class AtomVal:
	label: str


@dataclass(frozen=True)
class Star:
	pass


@dataclass(frozen=True)
class PairVal:
	left: "Element"
	right: "Element"


@dataclass(frozen=True)
class BarVal:
	body: "Element"


@dataclass(frozen=True)
class MSet:
	"""Finite multiset; `entries` is sorted and has no zero multiplicities."""

	entries: tuple[tuple["Element", int], ...] = ()

	@classmethod
	def from_counts(cls, counts: Mapping["Element", int]) -> "MSet":
		items = [(e, n) for e, n in counts.items() if n]
		if any(n < 0 for _, n in items):
			raise ValueError("negative multiplicity")
		return cls(tuple(sorted(items, key=lambda en: elem_key(en[0]))))

	@classmethod
	def of(cls, elems: Iterable["Element"]) -> "MSet":
		return cls.from_counts(Counter(elems))

	def counts(self) -> dict["Element", int]:
		return dict(self.entries)

	@property
	def cardinality(self) -> int:
		return sum(n for _, n in self.entries)

	def __add__(self, other: "MSet") -> "MSet":
		c = Counter(self.counts())
		for e, n in other.entries:
			c[e] += n
		return MSet.from_counts(c)

	def __len__(self) -> int:
		return self.cardinality

	def is_homogeneous(self) -> bool:
		return len(self.entries) == 1

	def distinct(self) -> list["Element"]:
		return [e for e, _ in self.entries]

	def contains(self, other: "MSet") -> bool:
		mine = self.counts()
		return all(mine.get(e, 0) >= n for e, n in other.entries)

	def __sub__(self, other: "MSet") -> "MSet":
		c = Counter(self.counts())
		for e, n in other.entries:
			c[e] -= n
			if c[e] < 0:
				raise ValueError("multiset difference would be negative")
		return MSet.from_counts(c)

	def scale(self, k: int) -> "MSet":
		return MSet(tuple((e, n * k) for e, n in self.entries))

	def __repr__(self) -> str:
		return f"MSet({format_element(self)})"


Element = Union[AtomVal, Star, PairVal, MSet, BarVal]
STAR = Star()
EMPTY = MSet()


def elem_key(e: Element) -> tuple:
	if isinstance(e, AtomVal):
		return (0, e.label)
	if isinstance(e, Star):
		return (1,)
	if isinstance(e, PairVal):
		return (2, elem_key(e.left), elem_key(e.right))
	if isinstance(e, MSet):
		return (3, tuple((elem_key(x), n) for x, n in e.entries))
	return (4, elem_key(e.body))


def strip_bars(e: Element) -> Element:
	if isinstance(e, BarVal):
		return strip_bars(e.body)
	if isinstance(e, PairVal):
		return PairVal(strip_bars(e.left), strip_bars(e.right))
	if isinstance(e, MSet):
		c: Counter = Counter()
		for x, n in e.entries:
			c[strip_bars(x)] += n
		return MSet.from_counts(c)
	return e


def sign(e: Element, t: TypeExpr) -> Element:
	"""Insert a bar at every dual position of `t`."""
	e = strip_bars(e)
	if isinstance(t, Dual):
		return BarVal(sign(e, t.body))
	if isinstance(t, (Tensor, Par)):
		if not isinstance(e, PairVal):
			raise AnnotationError(f"expected a pair for {show_type(t)}")
		return PairVal(sign(e.left, t.left), sign(e.right, t.right))
	if isinstance(t, Bang):
		if not isinstance(e, MSet):
			raise AnnotationError(f"expected a multiset for {show_type(t)}")
		c: Counter = Counter()
		for x, n in e.entries:
			c[sign(x, t.body)] += n
		return MSet.from_counts(c)
	return e


@dataclass(frozen=True)
class Occurrence:
	kind: str  # "mset" or "atom"
	value: Any
	positive: bool
	count: int


def polarity_walk(e: Element, positive: bool = True, mult: int = 1) -> Iterator[Occurrence]:
	"""Every multiset and atom occurrence with its sign and total multiplicity.

	A position is positive under an even number of enclosing bars.
	"""
	if isinstance(e, BarVal):
		yield from polarity_walk(e.body, not positive, mult)
	elif isinstance(e, PairVal):
		yield from polarity_walk(e.left, positive, mult)
		yield from polarity_walk(e.right, positive, mult)
	elif isinstance(e, MSet):
		yield Occurrence("mset", e, positive, mult)
		for x, n in e.entries:
			yield from polarity_walk(x, positive, mult * n)
	elif isinstance(e, AtomVal):
		yield Occurrence("atom", e.label, positive, mult)


# Element syntax --------------------------------------------------------------


_SHORT_BITS = 4096


def _digits(n: int) -> str:
	# str() refuses integers beyond a few thousand digits
	if n.bit_length() <= _SHORT_BITS:
		return str(n)
	for q in primerange(2, 100):
		if n % q == 0:
			l = multiplicity(q, n)
			if q**l == n:
				return f"{q}^{format_count(l)}"
			break
	return f"<{n.bit_length()}-bit count>"


def format_count(n: int, p: int | None = None) -> str:
	"""Render a multiplicity; with `p`, counts p^l with l a sum of distinct p-powers print as p^(p^k1 + ...)."""
	if p is None or n < p:
		return _digits(n)
	l = multiplicity(p, n) if n else 0
	if n != p**l:
		return _digits(n)
	ks = []
	k = 0
	total = l
	while l:
		digit = l % p
		if digit > 1:
			return f"p^{total}"
		if digit:
			ks.append(f"p^{k}")
		l //= p
		k += 1
	return f"p^({' + '.join(ks)})"


def format_element(e: Element, p: int | None = None) -> str:
	if isinstance(e, AtomVal):
		return e.label
	if isinstance(e, Star):
		return "*"
	if isinstance(e, PairVal):
		return f"({format_element(e.left, p)},{format_element(e.right, p)})"
	if isinstance(e, BarVal):
		return f"bar({format_element(e.body, p)})"
	inner = ", ".join(f"{format_element(x, p)}:{format_count(n, p)}" for x, n in e.entries)
	return "{" + inner + "}"


_ELEM_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[*(),{}:^]))")


def parse_element(text: str) -> Element:
	"""Parse `a | * | (e,e) | {e:n, ...} | bar(e)`; `{a, a, b}` is accepted too."""
	toks: list[tuple[str, str, int]] = []
	pos = 0
	while True:
		while pos < len(text) and text[pos].isspace():
			pos += 1
		if pos >= len(text):
			break
		m = _ELEM_TOKEN.match(text, pos)
		if m is None:
			raise ParseError(f"unexpected character {text[pos]!r} in element", pos)
		kind = m.lastgroup or "sym"
		toks.append((kind, m.group(kind), m.start(kind)))
		pos = m.end()
	toks.append(("eof", "", len(text)))
	i = 0

	def peek() -> str:
		return toks[i][1]

	def take(expect: str | None = None) -> tuple[str, str, int]:
		nonlocal i
		tok = toks[i]
		if expect is not None and tok[1] != expect:
			raise ParseError(f"expected {expect!r} in element", tok[2])
		i += 1
		return tok

	def elem() -> Element:
		kind, val, at = take()
		if val == "*":
			return STAR
		if kind == "ident" and val == "bar" and peek() == "(":
			take("(")
			body = elem()
			take(")")
			return BarVal(body)
		if kind == "ident":
			return AtomVal(val)
		if val == "(":
			left = elem()
			take(",")
			right = elem()
			take(")")
			return PairVal(left, right)
		if val == "{":
			counts: Counter = Counter()
			while peek() != "}":
				x = elem()
				n = 1
				if peek() == ":":
					take(":")
					n = count()
				counts[x] += n
				if peek() == ",":
					take(",")
			take("}")
			return MSet.from_counts(counts)
		raise ParseError(f"unexpected {val!r} in element", at)

	def count() -> int:
		kind, val, at = take()
		if kind != "num":
			raise ParseError("expected a multiplicity", at)
		n = int(val)
		if peek() == "^":
			take("^")
			kind2, val2, at2 = take()
			if kind2 != "num":
				raise ParseError("expected an exponent", at2)
			n = n ** int(val2)
		return n

	out = elem()
	if toks[i][0] != "eof":
		raise ParseError("trailing input in element", toks[i][2])
	return out


# Interpretations -------------------------------------------------------------


@dataclass(frozen=True)
class Interp:
	atom_sets: Mapping[str, tuple[str, ...]]
	degree_cap: int = 3
	# constant name -> target element -> {source element: coefficient}
	constants: Mapping[str, Mapping[Element, Mapping[Element, int]]] = field(default_factory=dict)

	def __post_init__(self) -> None:
		if self.degree_cap < 0:
			raise ValueError("degree cap must be >= 0")
		for name, labels in self.atom_sets.items():
			if not labels:
				raise ValueError(f"atom set for {name!r} is empty")

	def __hash__(self) -> int:
		return hash((tuple(sorted((k, tuple(v)) for k, v in self.atom_sets.items())), self.degree_cap, tuple(sorted(self.constants))))

	def with_cap(self, cap: int) -> "Interp":
		return replace(self, degree_cap=cap)

	@classmethod
	def uniform(cls, atoms: Iterable[str], size: int, degree_cap: int = 3) -> "Interp":
		return cls({a: tuple(f"{a}{i}" for i in range(1, size + 1)) for a in atoms}, degree_cap)


def elements(t: TypeExpr, interp: Interp, cap: int | None = None) -> tuple[Element, ...]:
	"""The interpreted index set of `t`, multisets truncated to cardinality <= cap."""
	return _elements(t, _frozen_sets(interp), interp.degree_cap if cap is None else cap)


def _frozen_sets(interp: Interp) -> tuple[tuple[str, tuple[str, ...]], ...]:
	return tuple(sorted((k, tuple(v)) for k, v in interp.atom_sets.items()))


@lru_cache(maxsize=4096)
def _elements(t: TypeExpr, sets: tuple[tuple[str, tuple[str, ...]], ...], cap: int) -> tuple[Element, ...]:
	if isinstance(t, Atom):
		table = dict(sets)
		if t.name not in table:
			raise UndeclaredAtomError(f"atom {t.name!r} has no interpretation")
		return tuple(AtomVal(x) for x in table[t.name])
	if isinstance(t, (One, Bot)):
		return (STAR,)
	if isinstance(t, (Tensor, Par)):
		left = _elements(t.left, sets, cap)
		right = _elements(t.right, sets, cap)
		return tuple(PairVal(x, y) for x in left for y in right)
	if isinstance(t, Dual):
		return _elements(t.body, sets, cap)
	if isinstance(t, Bang):
		base = _elements(t.body, sets, cap)
		out: list[Element] = []
		for n in range(cap + 1):
			for combo in itertools.combinations_with_replacement(base, n):
				out.append(MSet.of(combo))
		return tuple(out)
	raise AnnotationError(f"cannot interpret {t!r}")


def interpret_type(t: TypeExpr, interp: Interp) -> tuple[Element, ...]:
	return elements(t, interp)


def _depth_ok(e: Element, cap: int) -> bool:
	if isinstance(e, MSet):
		return e.cardinality <= cap and all(_depth_ok(x, cap) for x, _ in e.entries)
	if isinstance(e, PairVal):
		return _depth_ok(e.left, cap) and _depth_ok(e.right, cap)
	if isinstance(e, BarVal):
		return _depth_ok(e.body, cap)
	return True


def member(e: Element, t: TypeExpr, interp: Interp | None = None) -> bool:
	"""Whether `e` (bars ignored) is an element of the interpretation of `t`."""
	e = strip_bars(e)
	if isinstance(t, Atom):
		if not isinstance(e, AtomVal):
			return False
		return interp is None or e.label in interp.atom_sets.get(t.name, ())
	if isinstance(t, (One, Bot)):
		return isinstance(e, Star)
	if isinstance(t, (Tensor, Par)):
		return isinstance(e, PairVal) and member(e.left, t.left, interp) and member(e.right, t.right, interp)
	if isinstance(t, Dual):
		return member(e, t.body, interp)
	if isinstance(t, Bang):
		return isinstance(e, MSet) and all(member(x, t.body, interp) for x, _ in e.entries)
	return False


# Columns ---------------------------------------------------------------------

Column = dict[Element, int]


def _pair(e: Element) -> PairVal:
	if not isinstance(e, PairVal):
		raise AnnotationError(f"expected a pair, got {format_element(e)}")
	return e


def _mset(e: Element) -> MSet:
	if not isinstance(e, MSet):
		raise AnnotationError(f"expected a multiset, got {format_element(e)}")
	return e


def _unzip(m: MSet) -> PairVal:
	left: Counter = Counter()
	right: Counter = Counter()
	for x, n in m.entries:
		p = _pair(x)
		left[p.left] += n
		right[p.right] += n
	return PairVal(MSet.from_counts(left), MSet.from_counts(right))


def _generator_column(g: Gen, beta: Element, interp: Interp, cap: int) -> Column:
	name, args = g.name, g.args
	if name == "delta":
		total = EMPTY
		for inner, n in _mset(beta).entries:
			total = total + _mset(inner).scale(n)
		return {total: 1}
	if name == "eps":
		return {MSet(((beta, 1),)): 1}
	if name == "dup":
		p = _pair(beta)
		return {_mset(p.left) + _mset(p.right): 1}
	if name == "weak":
		return {EMPTY: 1}
	if name == "phi":
		return {_unzip(_mset(beta)): 1}
	if name == "phi0":
		return {STAR: 1}
	if name == "tau":
		p = _pair(beta)
		return {STAR: 1} if strip_bars(p.left) == strip_bars(p.right) else {}
	if name == "gamma":
		return {PairVal(a, a): 1 for a in elements(args[0], interp, cap)}
	if name in ("dist", "assocT", "assocP"):
		# ((a,b),c) <- (a,(b,c))  resp. (a,(b,c)) <- ((a,b),c)
		if name == "dist":
			ab, c = _pair(_pair(beta).left), _pair(beta).right
			return {PairVal(ab.left, PairVal(ab.right, c)): 1}
		a, bc = _pair(beta).left, _pair(_pair(beta).right)
		return {PairVal(PairVal(a, bc.left), bc.right): 1}
	if name in ("dist'", "assocT'", "assocP'"):
		a, bc = _pair(beta).left, _pair(_pair(beta).right)
		if name == "dist'":
			return {PairVal(PairVal(a, bc.left), bc.right): 1}
		ab, c = _pair(_pair(beta).left), _pair(beta).right
		return {PairVal(ab.left, PairVal(ab.right, c)): 1}
	if name in ("symT", "symP"):
		p = _pair(beta)
		return {PairVal(p.right, p.left): 1}
	if name in ("lunitT", "lunitP"):
		return {PairVal(STAR, beta): 1}
	if name in ("runitT", "runitP"):
		return {PairVal(beta, STAR): 1}
	if name in ("lunitT'", "lunitP'", "runitT'", "runitP'"):
		p = _pair(beta)
		return {p.right if name.startswith("l") else p.left: 1}
	if name == "shuffleT":
		ac, bd = _pair(_pair(beta).left), _pair(_pair(beta).right)
		return {PairVal(PairVal(ac.left, bd.left), PairVal(ac.right, bd.right)): 1}
	raise AnnotationError(f"no interpretation for generator {name}")


def _poly_mul(poly: Column, column: Column) -> Column:
	out: Counter = Counter()
	for mono, c in poly.items():
		for a, v in column.items():
			out[_mset(mono) + MSet(((a, 1),))] += c * v
	return {k: v for k, v in out.items() if v}


def bang_column(beta: MSet, column_of: Any) -> Column:
	"""Coefficients of x^alpha in the product over b in beta of (sum_a M[a;b] x_a)."""
	poly: Column = {EMPTY: 1}
	for b, n in beta.entries:
		col = column_of(b)
		for _ in range(n):
			poly = _poly_mul(poly, col)
			if not poly:
				return {}
	return poly


def column(t: TermExpr, beta: Element, interp: Interp, cap: int | None = None) -> Column:
	"""Column `beta` of the matrix of `t`: {alpha: M[alpha; beta]} for nonzero entries."""
	cap = interp.degree_cap if cap is None else cap
	beta = strip_bars(beta)
	if isinstance(t, Id):
		return {beta: 1}
	if isinstance(t, Comp):
		out: Counter = Counter()
		for b, w in column(t.second, beta, interp, cap).items():
			for a, v in column(t.first, b, interp, cap).items():
				out[a] += w * v
		return {k: v for k, v in out.items() if v}
	if isinstance(t, (TensorM, ParM)):
		p = _pair(beta)
		left = column(t.left, p.left, interp, cap)
		right = column(t.right, p.right, interp, cap)
		return {PairVal(a, b): v * w for a, v in left.items() for b, w in right.items()}
	if isinstance(t, BangM):
		return bang_column(_mset(beta), lambda b: column(t.body, b, interp, cap))
	if isinstance(t, Gen):
		return _generator_column(t, beta, interp, cap)
	if isinstance(t, Const):
		table = interp.constants.get(t.name)
		if table is None:
			raise AnnotationError(f"no matrix given for constant {t.name!r}")
		return {a: v for a, v in table.get(beta, {}).items() if v}
	raise AnnotationError(f"cannot interpret {t!r}")


# Matrices --------------------------------------------------------------------


@dataclass(frozen=True)
class CoeffMatrix:
	source: tuple[Element, ...]
	target: tuple[Element, ...]
	entries: Mapping[tuple[Element, Element], Any]

	def __getitem__(self, key: tuple[Element, Element]) -> Any:
		return self.entries.get(key, 0)

	def nonzero(self) -> dict[tuple[Element, Element], Any]:
		return {k: v for k, v in self.entries.items() if v != 0}

	def __eq__(self, other: object) -> bool:
		if not isinstance(other, CoeffMatrix):
			return NotImplemented
		return self.nonzero() == other.nonzero()

	def __hash__(self) -> int:
		return hash(tuple(sorted(self.nonzero().items(), key=lambda kv: (elem_key(kv[0][0]), elem_key(kv[0][1])))))

	def compose(self, other: "CoeffMatrix") -> "CoeffMatrix":
		"""Diagrammatic product: (self ; other)[a;c] = sum_b self[a;b] other[b;c]."""
		by_row: dict[Element, list[tuple[Element, Any]]] = {}
		for (b, c), w in other.entries.items():
			by_row.setdefault(b, []).append((c, w))
		out: dict[tuple[Element, Element], Any] = {}
		for (a, b), v in self.entries.items():
			for c, w in by_row.get(b, ()):
				out[(a, c)] = out.get((a, c), 0) + v * w
		return CoeffMatrix(self.source, other.target, {k: v for k, v in out.items() if v != 0})

	def dump(self) -> str:
		keys = sorted(self.nonzero(), key=lambda k: (elem_key(k[0]), elem_key(k[1])))
		return "\n".join(f"{format_element(a)} ; {format_element(b)} ; {self.entries[(a, b)]}" for a, b in keys)


def _multisets(base: tuple[Element, ...], cap: int) -> list[MSet]:
	out = []
	for n in range(cap + 1):
		for combo in itertools.combinations_with_replacement(base, n):
			out.append(MSet.of(combo))
	return out


def exp_matrix(m: CoeffMatrix, cap: int) -> CoeffMatrix:
	"""The matrix of !f from the matrix of f, restricted to multisets of size <= cap.

	Entry (alpha, beta) is the coefficient of x^alpha in the product over b in beta of
	(sum_a M[a;b] x_a). Coefficients may be ints or any ring elements (e.g. sympy symbols).
	"""
	cols: dict[Element, dict[Element, Any]] = {}
	for (a, b), v in m.entries.items():
		cols.setdefault(b, {})[a] = v
	source = _multisets(m.source, cap)
	target = _multisets(m.target, cap)
	out: dict[tuple[Element, Element], Any] = {}
	for beta in target:
		poly: dict[MSet, Any] = {EMPTY: 1}
		for b, n in beta.entries:
			for _ in range(n):
				nxt: dict[MSet, Any] = {}
				for mono, c in poly.items():
					for a, v in cols.get(b, {}).items():
						key = mono + MSet(((a, 1),))
						nxt[key] = nxt.get(key, 0) + c * v
				poly = nxt
		for alpha, c in poly.items():
			if c != 0:
				out[(alpha, beta)] = c
	return CoeffMatrix(tuple(source), tuple(target), out)


def _matrix_at(j: Judgement, interp: Interp, cap: int, restrict: int) -> CoeffMatrix:
	source = elements(j.source, interp, restrict)
	target = elements(j.target, interp, restrict)
	srcset = set(source)
	entries: dict[tuple[Element, Element], int] = {}
	for beta in target:
		for alpha, v in column(j.term, beta, interp, cap).items():
			if alpha in srcset:
				entries[(alpha, beta)] = v
	return CoeffMatrix(source, target, entries)


def interpret_term(j: Judgement, interp: Interp, check_stability: bool = True) -> CoeffMatrix:
	"""Matrix of `j.term` on multisets of size <= the degree cap.

	With `check_stability` the same entries are recomputed with the cap raised by one and
	any change raises TruncationInstability.
	"""
	cap = interp.degree_cap
	low = _matrix_at(j, interp, cap, cap)
	if check_stability:
		high = _matrix_at(j, interp, cap + 1, cap)
		for key in set(low.entries) | set(high.entries):
			if low[key] != high[key]:
				raise TruncationInstability(key, low[key], high[key])
	return low


def coeff(j: Judgement, alpha: Element, beta: Element, interp: Interp) -> int:
	cap = interp.degree_cap
	alpha, beta = strip_bars(alpha), strip_bars(beta)
	for e, t in ((alpha, j.source), (beta, j.target)):
		if not member(e, t, interp):
			raise AnnotationError(f"{format_element(e)} is not an element of {show_type(t)}")
		if not _depth_ok(e, cap):
			raise IndexOutsideTruncation(f"{format_element(e)} exceeds degree cap {cap}")
	low = column(j.term, beta, interp, cap).get(alpha, 0)
	high = column(j.term, beta, interp, cap + 1).get(alpha, 0)
	if low != high:
		raise TruncationInstability((alpha, beta), low, high)
	return low


def coeff_stable(j: Judgement, alpha: Element, beta: Element, interp: Interp, attempts: int = 3) -> int:
	"""coeff, raising the degree cap by one after each truncation instability."""
	caps = iter(range(interp.degree_cap, interp.degree_cap + attempts))

	@retry(retry=retry_if_exception_type(TruncationInstability), stop=stop_after_attempt(attempts), reraise=True)
	def attempt() -> int:
		cap = next(caps)
		if cap > interp.degree_cap:
			log.debug("raising degree cap to %d", cap)
		return coeff(j, alpha, beta, interp.with_cap(cap))

	return attempt()


def interpret_term_stable(j: Judgement, interp: Interp, attempts: int = 3) -> CoeffMatrix:
	"""interpret_term, raising the degree cap by one after each truncation instability."""
	caps = iter(range(interp.degree_cap, interp.degree_cap + attempts))

	@retry(retry=retry_if_exception_type(TruncationInstability), stop=stop_after_attempt(attempts), reraise=True)
	def attempt() -> CoeffMatrix:
		cap = next(caps)
		if cap > interp.degree_cap:
			log.debug("raising degree cap to %d", cap)
		return interpret_term(j, interp.with_cap(cap))

	return attempt()


def matrix_of_constant(table: Mapping[tuple[Element, Element], int]) -> dict[Element, dict[Element, int]]:
	"""Turn {(alpha, beta): v} into the column table Interp.constants expects."""
	out: dict[Element, dict[Element, int]] = {}
	for (a, b), v in table.items():
		if v:
			out.setdefault(b, {})[a] = v
	return out
