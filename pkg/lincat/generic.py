"""Generic forms of normal graphs, their instances, echo instances and both reconstructions.

Flows are oriented per part: intro parts and positive gates pass downward, elim parts, lenses,
duplicators, eliminators and negative gates pass upward, diodes turn a flow around, and atomic
wires are bioriented sources. Board lists are kept innermost first; instance sequences are
absolute tuples of child indices, outermost board first.
"""

from __future__ import annotations

import logging
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from sympy import isprime, multiplicity

from .enumerate import pi_mod_p
from .errors import (
	EchoParamError,
	EnumerationLimit,
	FlowError,
	GraphError,
	InconsistentAssignment,
	ParseError,
	ReconstructionError,
)
from .graph import Graph, GraphBuilder, PartKind, is_atomic
from .semantics import (
	EMPTY,
	STAR as STAR_VALUE,
	AtomVal,
	BarVal,
	Element,
	Interp,
	MSet,
	PairVal,
	elem_key,
	polarity_walk,
	sign,
	strip_bars,
)
from .syntax import ONE, Atom, Bang, Bot, Dual, One, Par, Tensor, TypeExpr, show_type

log = logging.getLogger(__name__)

BoardId = Union[int, str]


# Forms -----------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
	name: str
	boards: tuple[BoardId, ...] = ()


@dataclass(frozen=True)
class Star:
	pass


@dataclass(frozen=True)
class Dot:
	left: "Form"
	right: "Form"


@dataclass(frozen=True)
class Plus:
	terms: tuple["Form", ...]


@dataclass(frozen=True)
class Empty:
	pass


@dataclass(frozen=True)
class Boxed:
	"""{body}_L with L innermost first; L == () is the singleton {body}_1."""

	body: "Form"
	boards: tuple[BoardId, ...]


Form = Union[Var, Star, Dot, Plus, Empty, Boxed]
STAR = Star()
EMPTY_FORM = Empty()


def single(body: Form) -> Boxed:
	return Boxed(body, ())


def _board_key(b: BoardId) -> tuple:
	return (0, b, "") if isinstance(b, int) else (1, 0, b)


def form_key(f: Form) -> tuple:
	if isinstance(f, Var):
		return (0, f.name, tuple(_board_key(b) for b in f.boards))
	if isinstance(f, Star):
		return (1,)
	if isinstance(f, Dot):
		return (2, form_key(f.left), form_key(f.right))
	if isinstance(f, Plus):
		return (3, tuple(form_key(t) for t in f.terms))
	if isinstance(f, Empty):
		return (4,)
	return (5, tuple(_board_key(b) for b in f.boards), form_key(f.body))


def plus(terms: list[Form]) -> Form:
	"""Flattened sum with summands in canonical order."""
	flat: list[Form] = []
	for t in terms:
		flat.extend(t.terms if isinstance(t, Plus) else (t,))
	if len(flat) == 1:
		return flat[0]
	return Plus(tuple(sorted(flat, key=form_key)))


@dataclass(frozen=True)
class FormPair:
	"""(top forms ; bottom forms) with the atomic type of every variable."""

	top: tuple[Form, ...]
	bottom: tuple[Form, ...]
	var_types: Mapping[str, TypeExpr] = field(default_factory=dict, compare=False)

	def forms(self) -> tuple[Form, ...]:
		return self.top + self.bottom


# Text syntax -----------------------------------------------------------------


def _show_board(b: BoardId) -> str:
	return str(b)


def show_form(f: Form) -> str:
	if isinstance(f, Var):
		return f.name + (f"[{','.join(_show_board(b) for b in f.boards)}]" if f.boards else "")
	if isinstance(f, Star):
		return "*"
	if isinstance(f, Empty):
		return "{}0"
	if isinstance(f, Boxed):
		inner = show_form(f.body)
		if not f.boards:
			return f"{{{inner}}}1"
		return f"{{{inner}}}[{','.join(_show_board(b) for b in f.boards)}]"
	if isinstance(f, Dot):
		return f"{_show_factor(f.left)} . {_show_factor(f.right)}"
	return " + ".join(show_form(t) for t in f.terms)


def _show_factor(f: Form) -> str:
	text = show_form(f)
	return f"({text})" if isinstance(f, (Dot, Plus)) else text


def show_pair(fp: FormPair) -> str:
	top = ", ".join(show_form(f) for f in fp.top)
	bottom = ", ".join(show_form(f) for f in fp.bottom)
	return f"({top} ; {bottom})"


_FORM_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[\[\]{}(),.+*;]))")


class _FormParser:
	def __init__(self, text: str) -> None:
		self.toks: list[tuple[str, str, int]] = []
		pos = 0
		text = text.rstrip()
		while pos < len(text):
			m = _FORM_TOKEN.match(text, pos)
			if m is None or m.end() == pos:
				raise ParseError(f"unexpected character {text[pos:pos + 1]!r} in generic form", pos)
			kind = m.lastgroup or "sym"
			self.toks.append((kind, m.group(kind), m.start(kind)))
			pos = m.end()
		self.i = 0

	def peek(self) -> str | None:
		return self.toks[self.i][1] if self.i < len(self.toks) else None

	def take(self, expected: str | None = None) -> tuple[str, str, int]:
		if self.i >= len(self.toks):
			raise ParseError(f"expected {expected or 'more input'}, found end of input")
		tok = self.toks[self.i]
		if expected is not None and tok[1] != expected:
			raise ParseError(f"expected {expected!r}, found {tok[1]!r}", tok[2])
		self.i += 1
		return tok

	def boards(self) -> tuple[BoardId, ...]:
		self.take("[")
		out: list[BoardId] = []
		while self.peek() != "]":
			kind, text, pos = self.take()
			if kind == "num":
				out.append(int(text))
			elif kind == "ident":
				out.append(text)
			else:
				raise ParseError(f"bad board id {text!r}", pos)
			if self.peek() == ",":
				self.take(",")
		self.take("]")
		return tuple(out)

	def sum(self) -> Form:
		terms = [self.product()]
		while self.peek() == "+":
			self.take("+")
			terms.append(self.product())
		return plus(terms)

	def product(self) -> Form:
		left = self.atom()
		while self.peek() == ".":
			self.take(".")
			left = Dot(left, self.atom())
		return left

	def atom(self) -> Form:
		kind, text, pos = self.take()
		if text == "*":
			return STAR
		if text == "(":
			inner = self.sum()
			self.take(")")
			return inner
		if text == "{":
			if self.peek() == "}":
				self.take("}")
				self.take("0")
				return EMPTY_FORM
			body = self.sum()
			self.take("}")
			if self.peek() == "1":
				self.take("1")
				return single(body)
			return Boxed(body, self.boards())
		if kind == "ident":
			return Var(text, self.boards() if self.peek() == "[" else ())
		raise ParseError(f"unexpected {text!r} in generic form", pos)


def parse_form(text: str) -> Form:
	p = _FormParser(text)
	f = p.sum()
	if p.peek() is not None:
		raise ParseError(f"trailing {p.peek()!r} after generic form")
	return f


def parse_pair(text: str) -> FormPair:
	"""`(f1, f2 ; g1)`; the surrounding parentheses are optional."""
	text = text.strip()
	if text.startswith("(") and text.endswith(")") and ";" in text:
		text = text[1:-1]
	if ";" not in text:
		raise ParseError("a form pair needs ';' between top and bottom forms")
	top, bottom = text.split(";", 1)

	def side(s: str) -> tuple[Form, ...]:
		p = _FormParser(s)
		out = []
		while p.peek() is not None:
			out.append(p.sum())
			if p.peek() == ",":
				p.take(",")
		return tuple(out)

	return FormPair(side(top), side(bottom))


# Flows -----------------------------------------------------------------------

UP, DOWN, BOTH = "up", "down", "both"

_OUT_TOP = {
	PartKind.TENSOR_ELIM,
	PartKind.PAR_ELIM,
	PartKind.UNIT_ELIM,
	PartKind.COUNIT_ELIM,
	PartKind.DELTA,
	PartKind.EPS,
	PartKind.DUPLICATOR,
	PartKind.ELIMINATOR,
	PartKind.NEG_GATE,
}
_OUT_BOTTOM = {
	PartKind.TENSOR_INTRO,
	PartKind.PAR_INTRO,
	PartKind.UNIT_INTRO,
	PartKind.COUNIT_INTRO,
	PartKind.POS_GATE,
}


def _port_out(kind: PartKind, side: str, index: int) -> bool:
	if kind == PartKind.GENERATOR:
		raise GraphError("constant parts carry no flow")
	if kind == PartKind.DIODE_RIGHT:
		return side == "bottom" and index == 1
	if kind == PartKind.DIODE_LEFT:
		return side == "top" and index == 0
	return kind in (_OUT_TOP if side == "top" else _OUT_BOTTOM)


def orient_flows(g: Graph) -> dict[int, str]:
	"""Direction of the flow on every wire; raises FlowError on collisions and loops."""
	flows: dict[int, str] = {}
	for w in g.wires.values():
		up_end, low_end = g.upper(w.id), g.lower(w.id)
		if up_end.part is None:
			from_upper = UP
		else:
			from_upper = DOWN if _port_out(g.parts[up_end.part].kind, "bottom", up_end.index) else UP
		if low_end.part is None:
			from_lower = DOWN
		else:
			from_lower = UP if _port_out(g.parts[low_end.part].kind, "top", low_end.index) else DOWN
		upper_sink = up_end.part is None or from_upper == UP
		lower_sink = low_end.part is None or from_lower == DOWN
		if is_atomic(w.ty):
			if not (upper_sink and lower_sink):
				raise FlowError("collision", f"atomic wire {w.id} meets an outgoing port")
			flows[w.id] = BOTH
		elif from_upper != from_lower:
			what = "has no source" if upper_sink and lower_sink else "is fed from both ends"
			raise FlowError("collision", f"wire {w.id} of type {show_type(w.ty)} {what}")
		else:
			flows[w.id] = from_upper
	_check_loops(g, flows)
	return flows


def _sources(g: Graph, flows: dict[int, str], wire: int) -> list[int]:
	"""Wires whose flow feeds the part producing `wire`."""
	d = flows[wire]
	if d == BOTH:
		return []
	end = g.upper(wire) if d == DOWN else g.lower(wire)
	p = g.parts[end.part]
	ins = []
	for side, ports in (("top", p.top), ("bottom", p.bottom)):
		for i, w in enumerate(ports):
			if w != wire and not _port_out(p.kind, side, i):
				ins.append(w)
	return ins


def _check_loops(g: Graph, flows: dict[int, str]) -> None:
	state: dict[int, int] = {}
	for start in g.wires:
		if start in state:
			continue
		stack = [(start, iter(_sources(g, flows, start)))]
		state[start] = 1
		while stack:
			wire, it = stack[-1]
			nxt = next(it, None)
			if nxt is None:
				state[wire] = 2
				stack.pop()
				continue
			if state.get(nxt) == 1:
				raise FlowError("loop", f"flow through wire {nxt} returns to itself")
			if nxt not in state:
				state[nxt] = 1
				stack.append((nxt, iter(_sources(g, flows, nxt))))


# Generic forms ---------------------------------------------------------------


def _flatten_box(f: Form, board: BoardId) -> Form:
	"""{{phi}_L}_i -> {phi}_(L + i), distributing over sums."""
	if isinstance(f, Boxed):
		return Boxed(f.body, f.boards + (board,))
	if isinstance(f, Plus):
		return plus([_flatten_box(t, board) for t in f.terms])
	if isinstance(f, Empty):
		return f
	raise FlowError("collision", f"digging lens over a non-multiset form {show_form(f)}")


def generic_form(g: Graph) -> FormPair:
	flows = orient_flows(g)
	memo: dict[int, Form] = {}
	var_types: dict[str, TypeExpr] = {}

	def form_of(wire: int) -> Form:
		if wire in memo:
			return memo[wire]
		d = flows[wire]
		w = g.wires[wire]
		if d == BOTH:
			name = f"x{wire}"
			var_types[name] = w.ty
			f: Form = Var(name, tuple(g.region_chain(w.region)))
		else:
			end = g.upper(wire) if d == DOWN else g.lower(wire)
			p = g.parts[end.part]
			k = p.kind
			if k in (PartKind.TENSOR_INTRO, PartKind.PAR_INTRO):
				f = Dot(form_of(p.top[0]), form_of(p.top[1]))
			elif k in (PartKind.TENSOR_ELIM, PartKind.PAR_ELIM):
				f = Dot(form_of(p.bottom[0]), form_of(p.bottom[1]))
			elif k in (PartKind.UNIT_INTRO, PartKind.UNIT_ELIM, PartKind.COUNIT_INTRO, PartKind.COUNIT_ELIM):
				f = STAR
			elif k == PartKind.DIODE_RIGHT:
				f = form_of(p.bottom[0])
			elif k == PartKind.DIODE_LEFT:
				f = form_of(p.top[1])
			elif k == PartKind.EPS:
				f = single(form_of(p.bottom[0]))
			elif k == PartKind.ELIMINATOR:
				f = EMPTY_FORM
			elif k == PartKind.DUPLICATOR:
				f = plus([form_of(leg) for leg in p.bottom])
			elif k == PartKind.DELTA:
				below = form_of(p.bottom[0])
				if not isinstance(below, Boxed) or len(below.boards) != 1:
					raise FlowError("collision", f"digging lens {p.id} has no board below")
				f = _flatten_box(below.body, below.boards[0])
			elif k == PartKind.NEG_GATE:
				f = Boxed(form_of(p.bottom[0]), (p.owner,))
			elif k == PartKind.POS_GATE:
				f = Boxed(form_of(p.top[0]), (p.owner,))
			else:
				raise GraphError(f"{k.value} carries no generic form")
		memo[wire] = f
		return f

	top = tuple(form_of(w) for w in g.outer_top)
	bottom = tuple(form_of(w) for w in g.outer_bottom)
	return FormPair(top, bottom, var_types)


# Renaming --------------------------------------------------------------------


def _rename(f: Form, vars_: Mapping[str, str], boards: Mapping[BoardId, BoardId]) -> Form:
	if isinstance(f, Var):
		return Var(vars_.get(f.name, f.name), tuple(boards.get(b, b) for b in f.boards))
	if isinstance(f, Dot):
		return Dot(_rename(f.left, vars_, boards), _rename(f.right, vars_, boards))
	if isinstance(f, Plus):
		return plus([_rename(t, vars_, boards) for t in f.terms])
	if isinstance(f, Boxed):
		return Boxed(_rename(f.body, vars_, boards), tuple(boards.get(b, b) for b in f.boards))
	return f


def _shape(f: Form) -> tuple:
	"""Name-free key used to order summands before renaming."""
	if isinstance(f, Var):
		return (0, len(f.boards))
	if isinstance(f, Dot):
		return (2, _shape(f.left), _shape(f.right))
	if isinstance(f, Plus):
		return (3, tuple(sorted(_shape(t) for t in f.terms)))
	if isinstance(f, Boxed):
		return (5, len(f.boards), _shape(f.body))
	return form_key(f)


def canonicalize(fp: FormPair) -> FormPair:
	"""Rename variables x1, x2, ... and boards 1, 2, ... in traversal order."""
	vars_: dict[str, str] = {}
	boards: dict[BoardId, BoardId] = {}

	def visit(f: Form) -> None:
		if isinstance(f, Var):
			for b in reversed(f.boards):
				boards.setdefault(b, len(boards) + 1)
			vars_.setdefault(f.name, f"x{len(vars_) + 1}")
		elif isinstance(f, Dot):
			visit(f.left)
			visit(f.right)
		elif isinstance(f, Plus):
			for t in sorted(f.terms, key=_shape):
				visit(t)
		elif isinstance(f, Boxed):
			for b in reversed(f.boards):
				boards.setdefault(b, len(boards) + 1)
			visit(f.body)

	for f in fp.forms():
		visit(f)
	types = {vars_.get(k, k): v for k, v in fp.var_types.items()}
	return FormPair(
		tuple(_rename(f, vars_, boards) for f in fp.top),
		tuple(_rename(f, vars_, boards) for f in fp.bottom),
		types,
	)


@dataclass
class _Renaming:
	vars_: dict[str, str] = field(default_factory=dict)
	vars_back: dict[str, str] = field(default_factory=dict)
	boards: dict[BoardId, BoardId] = field(default_factory=dict)
	boards_back: dict[BoardId, BoardId] = field(default_factory=dict)

	def copy(self) -> "_Renaming":
		return _Renaming(dict(self.vars_), dict(self.vars_back), dict(self.boards), dict(self.boards_back))

	def bind_var(self, a: str, b: str) -> bool:
		if self.vars_.get(a, b) != b or self.vars_back.get(b, a) != a:
			return False
		self.vars_[a] = b
		self.vars_back[b] = a
		return True

	def bind_boards(self, xs: tuple[BoardId, ...], ys: tuple[BoardId, ...]) -> bool:
		if len(xs) != len(ys):
			return False
		for a, b in zip(xs, ys):
			if self.boards.get(a, b) != b or self.boards_back.get(b, a) != a:
				return False
			self.boards[a] = b
			self.boards_back[b] = a
		return True


def _match(f: Form, g: Form, env: _Renaming) -> Iterator[_Renaming]:
	if type(f) is not type(g):
		return
	if isinstance(f, Var):
		env = env.copy()
		if env.bind_var(f.name, g.name) and env.bind_boards(f.boards, g.boards):
			yield env
	elif isinstance(f, (Star, Empty)):
		yield env
	elif isinstance(f, Dot):
		for e1 in _match(f.left, g.left, env):
			yield from _match(f.right, g.right, e1)
	elif isinstance(f, Boxed):
		env = env.copy()
		if env.bind_boards(f.boards, g.boards):
			yield from _match(f.body, g.body, env)
	elif isinstance(f, Plus):
		if len(f.terms) == len(g.terms):
			yield from _match_terms(list(f.terms), list(g.terms), env)


def _match_terms(fs: list[Form], gs: list[Form], env: _Renaming) -> Iterator[_Renaming]:
	if not fs:
		yield env
		return
	head, rest = fs[0], fs[1:]
	for i, cand in enumerate(gs):
		if _shape(cand) != _shape(head):
			continue
		for e1 in _match(head, cand, env):
			yield from _match_terms(rest, gs[:i] + gs[i + 1:], e1)


def _match_lists(fs: tuple[Form, ...], gs: tuple[Form, ...], env: _Renaming) -> Iterator[_Renaming]:
	if not fs:
		yield env
		return
	for e1 in _match(fs[0], gs[0], env):
		yield from _match_lists(fs[1:], gs[1:], e1)


def forms_equivalent(a: FormPair, b: FormPair) -> bool:
	"""Equality up to a bijective renaming of variables and of boards."""
	if len(a.top) != len(b.top) or len(a.bottom) != len(b.bottom):
		return False
	return next(_match_lists(a.forms(), b.forms(), _Renaming()), None) is not None


# Assignment pairs and instances ----------------------------------------------

Seq = tuple[int, ...]


@dataclass(frozen=True)
class AssignmentPair:
	"""Board sizes m_i(s) and variable values eta(x, s); a plain value means constant in s."""

	m: Mapping[BoardId, Union[int, Mapping[Seq, int]]]
	eta: Mapping[str, Union[Element, Mapping[Seq, Element]]]

	def size(self, board: BoardId, s: Seq) -> int:
		if board not in self.m:
			raise InconsistentAssignment(f"no size for board {board}")
		v = self.m[board]
		if isinstance(v, int):
			return v
		if s not in v:
			raise InconsistentAssignment(f"board {board} has no size at {s}")
		return v[s]

	def value(self, var: str, s: Seq) -> Element:
		if var not in self.eta:
			raise InconsistentAssignment(f"no value for variable {var}")
		v = self.eta[var]
		if isinstance(v, Mapping):
			if s not in v:
				raise InconsistentAssignment(f"variable {var} has no value at {s}")
			return v[s]
		return v

	@property
	def uniform(self) -> bool:
		return all(isinstance(v, int) for v in self.m.values()) and not any(
			isinstance(v, Mapping) for v in self.eta.values()
		)

	def sequences(self, outer_first: tuple[BoardId, ...], s: Seq = ()) -> Iterator[Seq]:
		"""Extensions s' of s through the listed boards, outermost first."""
		if not outer_first:
			yield ()
			return
		head, rest = outer_first[0], outer_first[1:]
		for r in range(1, self.size(head, s) + 1):
			for tail in self.sequences(rest, s + (r,)):
				yield (r,) + tail

	def q(self, outer_first: tuple[BoardId, ...]) -> int:
		"""Number of nodes at the level of the innermost listed board."""
		if self.uniform:
			return math.prod(self.size(b, ()) for b in outer_first)
		return sum(1 for _ in self.sequences(outer_first))


def instantiate(f: Form, P: AssignmentPair, s: Seq = ()) -> Element:
	if isinstance(f, Var):
		return P.value(f.name, s)
	if isinstance(f, Star):
		return STAR_VALUE
	if isinstance(f, Dot):
		return PairVal(instantiate(f.left, P, s), instantiate(f.right, P, s))
	if isinstance(f, Plus):
		total = EMPTY
		for t in f.terms:
			part = instantiate(t, P, s)
			if not isinstance(part, MSet):
				raise InconsistentAssignment(f"summand {show_form(t)} is not a multiset")
			total = total + part
		return total
	if isinstance(f, Empty):
		return EMPTY
	outer_first = tuple(reversed(f.boards))
	if P.uniform:
		n = math.prod(P.size(b, ()) for b in outer_first)
		if not n:
			return EMPTY
		return MSet(((instantiate(f.body, P, s + (1,) * len(outer_first)), n),))
	counts: Counter = Counter()
	for tail in P.sequences(outer_first, s):
		counts[instantiate(f.body, P, s + tail)] += 1
	return MSet.from_counts(counts)


def instance(fp: FormPair, P: AssignmentPair) -> tuple[tuple[Element, ...], tuple[Element, ...]]:
	return tuple(instantiate(f, P) for f in fp.top), tuple(instantiate(f, P) for f in fp.bottom)


def form_boards(fp: FormPair) -> list[BoardId]:
	seen: dict[BoardId, None] = {}

	def visit(f: Form) -> None:
		if isinstance(f, Var):
			for b in f.boards:
				seen.setdefault(b)
		elif isinstance(f, Dot):
			visit(f.left)
			visit(f.right)
		elif isinstance(f, Plus):
			for t in f.terms:
				visit(t)
		elif isinstance(f, Boxed):
			for b in f.boards:
				seen.setdefault(b)
			visit(f.body)

	for f in fp.forms():
		visit(f)
	return sorted(seen, key=_board_key)


def form_vars(fp: FormPair) -> list[str]:
	seen: dict[str, None] = {}

	def visit(f: Form) -> None:
		if isinstance(f, Var):
			seen.setdefault(f.name)
		elif isinstance(f, Dot):
			visit(f.left)
			visit(f.right)
		elif isinstance(f, Plus):
			for t in f.terms:
				visit(t)
		elif isinstance(f, Boxed):
			visit(f.body)

	for f in fp.forms():
		visit(f)
	return list(seen)


# Echo instances --------------------------------------------------------------


@dataclass(frozen=True)
class EchoParams:
	p: int
	k: Mapping[BoardId, int]
	labels: Mapping[str, str]

	def validate(self) -> None:
		if not isprime(self.p):
			raise EchoParamError(f"{self.p} is not prime")
		if len(set(self.k.values())) != len(self.k):
			raise EchoParamError("distinct boards need distinct exponents")
		if any(k < 0 for k in self.k.values()):
			raise EchoParamError("exponents must be >= 0")
		if len(set(self.labels.values())) != len(self.labels):
			raise EchoParamError("distinct variables need distinct labels")

	def assignment(self) -> AssignmentPair:
		return AssignmentPair(
			{b: self.p ** (self.p**k) for b, k in self.k.items()},
			{x: AtomVal(label) for x, label in self.labels.items()},
		)


def default_echo_params(g: Graph, p: int, fp: FormPair | None = None) -> EchoParams:
	"""Exponents 0, 1, 2, ... from the innermost boards out; labels a1, a2, ... per atom."""
	fp = fp or generic_form(g)
	depth = {b: len(g.region_chain(b)) for b in g.boards}
	boards = sorted(g.boards, key=lambda b: (-depth[b], b))
	used: Counter = Counter()
	labels: dict[str, str] = {}
	for x in form_vars(fp):
		ty = fp.var_types.get(x)
		atom = ty.name if isinstance(ty, Atom) else "a"
		used[atom] += 1
		labels[x] = f"{atom}{used[atom]}"
	return EchoParams(p, {b: k for k, b in enumerate(boards)}, labels)


def echo_instance(
	g: Graph, params: EchoParams, fp: FormPair | None = None
) -> tuple[tuple[Element, ...], tuple[Element, ...]]:
	params.validate()
	fp = fp or generic_form(g)
	missing = [b for b in form_boards(fp) if b not in params.k]
	if missing:
		raise EchoParamError(f"no exponent for boards {missing}")
	unlabeled = [x for x in form_vars(fp) if x not in params.labels]
	if unlabeled:
		raise EchoParamError(f"no label for variables {unlabeled}")
	return instance(fp, params.assignment())


# Star conditions -------------------------------------------------------------


def _is_p_power(n: int, p: int) -> int | None:
	"""l with n == p^l, else None."""
	if n < 1:
		return None
	if n == 1:
		return 0
	l = multiplicity(p, n)
	return l if p**l == n else None


def _is_pp(n: int, p: int) -> bool:
	l = _is_p_power(n, p)
	return l is not None and l >= 1 and _is_p_power(l, p) is not None


def signed(alpha, beta, top_types, bottom_types) -> tuple[list[Element], list[Element]]:
	return (
		[sign(a, t) for a, t in zip(alpha, top_types)],
		[sign(b, t) for b, t in zip(beta, bottom_types)],
	)


def occurrences(alpha, beta):
	"""Every signed occurrence; the source side starts negative."""
	for a in alpha:
		yield from polarity_walk(a, positive=False)
	for b in beta:
		yield from polarity_walk(b, positive=True)


@dataclass
class StarReport:
	star1: bool
	star2: bool
	star3: bool
	star4: bool
	star5: bool
	witnesses: dict[str, str] = field(default_factory=dict)
	# star1 could not be evaluated within the enumeration limits
	undetermined: bool = False

	@property
	def all(self) -> bool:
		return self.star1 and self.star2 and self.star3 and self.star4 and self.star5

	def failed(self) -> list[int]:
		flags = (self.star1, self.star2, self.star3, self.star4, self.star5)
		return [i + 1 for i, ok in enumerate(flags) if not ok]


def check_element_stars(alpha, beta, p: int, top_types=None, bottom_types=None) -> StarReport:
	"""Conditions two to five, which only look at the elements."""
	if top_types is not None and bottom_types is not None:
		alpha, beta = signed(alpha, beta, top_types, bottom_types)
	report = StarReport(True, True, True, True, True)
	positive: Counter = Counter()
	atoms: Counter = Counter()
	for occ in occurrences(alpha, beta):
		if occ.kind == "mset" and occ.positive:
			positive[occ.value] += occ.count
		elif occ.kind == "atom":
			atoms[(occ.value, occ.positive)] += occ.count
	by_size: dict[int, MSet] = {}
	for m, count in positive.items():
		if not (m.is_homogeneous() and _is_pp(m.cardinality, p)):
			report.star2 = False
			report.witnesses.setdefault("star2", f"positive multiset of {m.cardinality} elements, {len(m.entries)} distinct")
		other = by_size.setdefault(m.cardinality, m)
		if other != m:
			report.star3 = False
			report.witnesses.setdefault("star3", f"two different positive multisets of {m.cardinality} elements")
		if _is_p_power(count, p) is None:
			report.star4 = False
			report.witnesses.setdefault("star4", f"a positive multiset occurs {count} times")
	for (label, pos), count in atoms.items():
		if _is_p_power(count, p) is None:
			report.star5 = False
			sgn = "+" if pos else "-"
			report.witnesses.setdefault("star5", f"atom {label} ({sgn}) occurs {count} times")
	return report


def check_stars(g: Graph, alpha, beta, p: int, interp: Interp) -> StarReport:
	report = check_element_stars(alpha, beta, p, g.top_types, g.bottom_types)
	try:
		residue = pi_mod_p(g, list(alpha), list(beta), p, interp)
		report.star1 = residue != 0
		if not report.star1:
			report.witnesses["star1"] = f"coefficient vanishes mod {p}"
	except EnumerationLimit as e:
		report.star1 = False
		report.undetermined = True
		report.witnesses["star1"] = f"not computed: {e}"
	log.debug("star conditions: failed %s", report.failed() or "none")
	return report


# Reconstruction from an echo instance ---------------------------------------


def _digits(n: int, p: int) -> list[int]:
	out = []
	while n:
		n, d = divmod(n, p)
		out.append(d)
	return out


def reconstruct_generic(alpha, beta, p: int, top_types=None, bottom_types=None) -> FormPair:
	"""Read the generic form back from a p-echo instance (signed, or with the outer types)."""
	if top_types is not None and bottom_types is not None:
		alpha, beta = signed(alpha, beta, top_types, bottom_types)
	positive: Counter = Counter()
	for occ in occurrences(alpha, beta):
		if occ.kind == "mset" and occ.positive:
			positive[occ.value] += occ.count

	# one board per distinct positive multiset; k from its cardinality
	board_of: dict[MSet, int] = {}
	k_of: dict[int, int] = {}
	for bid, m in enumerate(sorted(positive, key=elem_key), start=1):
		l = _is_p_power(m.cardinality, p)
		k = _is_p_power(l, p) if l else None
		if not m.is_homogeneous() or k is None:
			raise ReconstructionError(f"positive multiset of {m.cardinality} elements is not p^(p^k)-homogeneous")
		if k in k_of.values():
			raise ReconstructionError("two boards share one size")
		board_of[m] = bid
		k_of[bid] = k
	board_at = {k: b for b, k in k_of.items()}

	def boards_of_exponent(l: int) -> frozenset[int]:
		out = set()
		for pos, d in enumerate(_digits(l, p)):
			if d > 1 or (d and pos not in board_at):
				raise ReconstructionError(f"exponent {l} is not a sum of board sizes")
			if d:
				out.add(board_at[pos])
		return frozenset(out)

	# nesting: the boards enclosing b are read off the occurrence count of its multiset
	enclosing: dict[int, frozenset[int]] = {}
	for m, count in positive.items():
		l = _is_p_power(count, p)
		if l is None:
			raise ReconstructionError(f"a positive multiset occurs {count} times")
		enclosing[board_of[m]] = boards_of_exponent(l)

	def outer_first(bs: frozenset[int] | set[int]) -> list[int]:
		return sorted(bs, key=lambda b: len(enclosing.get(b, ())))

	names: dict[str, str] = {}

	def var(label: str, chain: tuple[int, ...]) -> Var:
		name = names.setdefault(label, f"x{len(names) + 1}")
		return Var(name, tuple(reversed(chain)))

	def conv(e: Element, positive: bool, chain: tuple[int, ...]) -> Form:
		if isinstance(e, BarVal):
			return conv(e.body, not positive, chain)
		if isinstance(e, PairVal):
			return Dot(conv(e.left, positive, chain), conv(e.right, positive, chain))
		if isinstance(e, AtomVal):
			return var(e.label, chain)
		if not isinstance(e, MSet):
			return STAR
		if positive:
			b = board_of[e]
			inner = tuple(outer_first(enclosing[b])) + (b,)
			return Boxed(conv(e.entries[0][0], positive, inner), (b,))
		if not e.entries:
			return EMPTY_FORM
		blocks: list[Form] = []
		for x, count in e.entries:
			for level, digit in enumerate(_digits(count, p)):
				for _ in range(digit):
					if level == 0:
						blocks.append(single(conv(x, positive, chain)))
						continue
					bs = outer_first(boards_of_exponent(level))
					blocks.append(Boxed(conv(x, positive, chain + tuple(bs)), tuple(reversed(bs))))
		if len(blocks) >= p:
			raise ReconstructionError(f"negative multiset needs {len(blocks)} blocks, at least p")
		return plus(blocks)

	top = tuple(conv(a, False, ()) for a in alpha)
	bottom = tuple(conv(b, True, ()) for b in beta)
	return canonicalize(FormPair(top, bottom))


# Reconstruction of a graph from its generic form ----------------------------


def reconstruct_graph(fp: FormPair, top_types: list[TypeExpr], bottom_types: list[TypeExpr]) -> Graph:
	"""Rebuild a graph whose generic form is `fp`, up to the placement of dotted links."""
	if len(top_types) != len(fp.top) or len(bottom_types) != len(fp.bottom):
		raise ReconstructionError("one type per outer form is needed")
	b = GraphBuilder()
	boards: dict[BoardId, int] = {}
	pending_vars: dict[str, list[tuple[int, str]]] = defaultdict(list)
	needs_host: list[tuple[int, int, int | None]] = []
	work: list[tuple[int, Form, str, int | None]] = []

	for ty, f in zip(top_types, fp.top):
		w = b.wire(ty, None)
		b.outer_top.append(w)
		work.append((w, f, UP, None))
	for ty, f in zip(bottom_types, fp.bottom):
		w = b.wire(ty, None)
		b.outer_bottom.append(w)
		work.append((w, f, DOWN, None))

	def board(label: BoardId, parent: int | None) -> int:
		if label not in boards:
			boards[label] = b.board(parent)
		elif b.boards[boards[label]]["parent"] != parent:
			raise ReconstructionError(f"board {label} is reached from two regions")
		return boards[label]

	def mismatch(f: Form, ty: TypeExpr) -> ReconstructionError:
		return ReconstructionError(f"form {show_form(f)} does not fit type {show_type(ty)}")

	while work:
		w, f, d, region = work.pop(0)
		ty = b.wires[w][0]
		if isinstance(ty, Atom):
			if not isinstance(f, Var):
				raise mismatch(f, ty)
			pending_vars[f.name].append((w, d))
		elif isinstance(ty, (Tensor, Par)):
			if not isinstance(f, Dot):
				raise mismatch(f, ty)
			x = b.wire(ty.left, region)
			y = b.wire(ty.right, region)
			if d == UP:
				kind = PartKind.TENSOR_ELIM if isinstance(ty, Tensor) else PartKind.PAR_ELIM
				b.part(kind, [w], [x, y], region)
			else:
				kind = PartKind.TENSOR_INTRO if isinstance(ty, Tensor) else PartKind.PAR_INTRO
				b.part(kind, [x, y], [w], region)
			work += [(x, f.left, d, region), (y, f.right, d, region)]
		elif isinstance(ty, (One, Bot)):
			if not isinstance(f, Star):
				raise mismatch(f, ty)
			if isinstance(ty, One):
				if d == UP:
					needs_host.append((b.part(PartKind.UNIT_ELIM, [w], [], region), w, region))
				else:
					b.part(PartKind.UNIT_INTRO, [], [w], region)
			elif d == UP:
				b.part(PartKind.COUNIT_ELIM, [w], [], region)
			else:
				needs_host.append((b.part(PartKind.COUNIT_INTRO, [], [w], region), w, region))
		elif isinstance(ty, Dual):
			a = b.wire(ty.body, region)
			if d == UP:
				b.part(PartKind.DIODE_LEFT, [w, a], [], region)
				work.append((a, f, DOWN, region))
			else:
				b.part(PartKind.DIODE_RIGHT, [], [a, w], region)
				work.append((a, f, UP, region))
		elif isinstance(ty, Bang):
			if d == DOWN:
				if not (isinstance(f, Boxed) and len(f.boards) == 1):
					raise mismatch(f, ty)
				bid = board(f.boards[0], region)
				if b.boards[bid]["pos"] is not None:
					raise ReconstructionError(f"board {f.boards[0]} has two positive gates")
				inner = b.wire(ty.body, bid)
				b.boards[bid]["pos"] = b.part(PartKind.POS_GATE, [inner], [w], region, owner=bid)
				work.append((inner, f.body, DOWN, bid))
			elif isinstance(f, Empty):
				u = b.wire(ONE, region)
				b.part(PartKind.ELIMINATOR, [w], [u], region)
				work.append((u, STAR, UP, region))
			elif isinstance(f, Plus):
				legs = [b.wire(ty, region) for _ in f.terms]
				b.part(PartKind.DUPLICATOR, [w], legs, region)
				work += [(leg, t, UP, region) for leg, t in zip(legs, f.terms)]
			elif isinstance(f, Boxed) and not f.boards:
				x = b.wire(ty.body, region)
				b.part(PartKind.EPS, [w], [x], region)
				work.append((x, f.body, UP, region))
			elif isinstance(f, Boxed) and len(f.boards) == 1:
				bid = board(f.boards[0], region)
				inner = b.wire(ty.body, bid)
				gid = b.part(PartKind.NEG_GATE, [w], [inner], region, owner=bid)
				b.boards[bid]["neg"].append(gid)
				work.append((inner, f.body, UP, bid))
			elif isinstance(f, Boxed):
				v = b.wire(Bang(ty), region)
				b.part(PartKind.DELTA, [w], [v], region)
				work.append((v, Boxed(Boxed(f.body, f.boards[:-1]), (f.boards[-1],)), UP, region))
			else:
				raise mismatch(f, ty)
		else:
			raise mismatch(f, ty)

	for name, ends in pending_vars.items():
		ups = [w for w, d in ends if d == UP]
		downs = [w for w, d in ends if d == DOWN]
		if len(ups) != 1 or len(downs) != 1:
			raise ReconstructionError(f"variable {name} needs one upward and one downward occurrence")
		if b.wires[ups[0]][0] != b.wires[downs[0]][0]:
			raise ReconstructionError(f"variable {name} is used at two types")
		b.fuse(ups[0], downs[0])
	for label, bid in boards.items():
		if b.boards[bid]["pos"] is None:
			raise ReconstructionError(f"board {label} has no positive gate")
	for pid, own, region in needs_host:
		host = b.any_wire(region, avoid=[own])
		b.link(pid, own if host is None else host)
	return b.build()


# Uniform assignments ---------------------------------------------------------


def is_discernible(P: AssignmentPair) -> bool:
	"""Distinct boards have distinct sizes and distinct variables distinct values."""
	if not P.uniform:
		return False
	sizes = list(P.m.values())
	values = list(P.eta.values())
	return len(set(sizes)) == len(sizes) and len(set(values)) == len(values)


def extract_uniform(g: Graph, alpha, beta, p: int | None = None, fp: FormPair | None = None) -> AssignmentPair | None:
	"""A uniform assignment pair whose instance of the generic form of `g` is (alpha; beta)."""
	fp = fp or generic_form(g)
	alpha = [strip_bars(a) for a in alpha]
	beta = [strip_bars(b) for b in beta]
	if len(alpha) != len(fp.top) or len(beta) != len(fp.bottom):
		return None
	for m, eta in _unify_list(list(fp.forms()), [*alpha, *beta], {}, {}):
		P = AssignmentPair(dict(m), dict(eta))
		try:
			if instance(fp, P) == (tuple(alpha), tuple(beta)):
				return P
		except InconsistentAssignment:
			continue
	return None


def _unify_list(fs, es, m, eta) -> Iterator[tuple[dict, dict]]:
	if not fs:
		yield m, eta
		return
	for m1, eta1 in _unify(fs[0], es[0], m, eta):
		yield from _unify_list(fs[1:], es[1:], m1, eta1)


def _unify(f: Form, e: Element, m: dict, eta: dict) -> Iterator[tuple[dict, dict]]:
	if isinstance(f, Var):
		if eta.get(f.name, e) == e:
			yield m, {**eta, f.name: e}
	elif isinstance(f, Star):
		if e == STAR_VALUE:
			yield m, eta
	elif isinstance(f, Dot):
		if isinstance(e, PairVal):
			for m1, eta1 in _unify(f.left, e.left, m, eta):
				yield from _unify(f.right, e.right, m1, eta1)
	elif isinstance(f, Empty):
		if e == EMPTY:
			yield m, eta
	elif isinstance(f, Boxed):
		if not isinstance(e, MSet) or len(e.entries) > 1:
			return
		n = e.cardinality
		for m1 in _solve_product(f.boards, n, m):
			if n == 0:
				yield m1, eta
			else:
				yield from _unify(f.body, e.entries[0][0], m1, eta)
	elif isinstance(f, Plus):
		if isinstance(e, MSet):
			yield from _unify_sum(list(f.terms), e, m, eta)


def _solve_product(boards: tuple[BoardId, ...], n: int, m: dict) -> Iterator[dict]:
	known = math.prod(m[b] for b in boards if b in m)
	free = [b for b in dict.fromkeys(boards) if b not in m]
	if not free:
		if known == n:
			yield m
		return
	if known == 0 or n % known:
		return
	rest = n // known
	if len(free) == 1:
		yield {**m, free[0]: rest}
		return
	# several unknown sizes: try the divisors of the remaining product
	first = free[0]
	for d in range(1, min(rest, 4096) + 1):
		if rest % d == 0:
			yield from _solve_product(boards, n, {**m, first: d})


def _unify_sum(terms: list[Form], e: MSet, m: dict, eta: dict) -> Iterator[tuple[dict, dict]]:
	if not terms:
		if not e.entries:
			yield m, eta
		return
	head, rest = terms[0], terms[1:]
	if isinstance(head, Empty):
		yield from _unify_sum(rest, e, m, eta)
		return
	for x, have in e.entries:
		for take in _counts_to_try(head, have, m):
			remaining = e - MSet(((x, take),))
			for m1, eta1 in _unify(head, MSet(((x, take),)), m, eta):
				yield from _unify_sum(rest, remaining, m1, eta1)


def _counts_to_try(f: Form, have: int, m: dict) -> list[int]:
	if isinstance(f, Boxed) and all(b in m for b in f.boards):
		n = math.prod(m[b] for b in f.boards)
		return [n] if 0 < n <= have else []
	if have <= 64:
		return list(range(1, have + 1))
	return [have]


__all__ = [
	"Var",
	"Star",
	"Dot",
	"Plus",
	"Empty",
	"Boxed",
	"Form",
	"FormPair",
	"single",
	"plus",
	"show_form",
	"show_pair",
	"parse_form",
	"parse_pair",
	"orient_flows",
	"generic_form",
	"canonicalize",
	"forms_equivalent",
	"AssignmentPair",
	"instantiate",
	"instance",
	"EchoParams",
	"default_echo_params",
	"echo_instance",
	"StarReport",
	"check_element_stars",
	"check_stars",
	"reconstruct_generic",
	"reconstruct_graph",
	"extract_uniform",
	"is_discernible",
]
