from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Union

from .errors import ParseError, TypeCheckError, UndeclaredAtomError


# Objects -----------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
	name: str


@dataclass(frozen=True)
class One:
	pass


@dataclass(frozen=True)
class Bot:
	pass


@dataclass(frozen=True)
class Tensor:
	left: "TypeExpr"
	right: "TypeExpr"


@dataclass(frozen=True)
class Par:
	left: "TypeExpr"
	right: "TypeExpr"


@dataclass(frozen=True)
class Dual:
	body: "TypeExpr"


@dataclass(frozen=True)
class Bang:
	body: "TypeExpr"


@dataclass(frozen=True)
class TypeVar:
	"""Type metavariable; only appears in rule patterns."""

	name: str


TypeExpr = Union[Atom, One, Bot, Tensor, Par, Dual, Bang, TypeVar]

ONE = One()
BOT = Bot()


# Morphisms ---------------------------------------------------------------


@dataclass(frozen=True)
class Id:
	ty: TypeExpr


@dataclass(frozen=True)
class Comp:
	first: "TermExpr"
	second: "TermExpr"


@dataclass(frozen=True)
class TensorM:
	left: "TermExpr"
	right: "TermExpr"


@dataclass(frozen=True)
class ParM:
	left: "TermExpr"
	right: "TermExpr"


@dataclass(frozen=True)
class BangM:
	body: "TermExpr"


@dataclass(frozen=True)
class Gen:
	"""A generator or structural isomorphism, indexed by objects."""

	name: str
	args: tuple[TypeExpr, ...] = ()


@dataclass(frozen=True)
class Const:
	"""A declared morphism constant `gen f : A -> B`."""

	name: str
	source: TypeExpr
	target: TypeExpr


@dataclass(frozen=True)
class MetaMor:
	"""Morphism metavariable `?f{A,B}` of rule patterns."""

	name: str
	source: TypeExpr
	target: TypeExpr


TermExpr = Union[Id, Comp, TensorM, ParM, BangM, Gen, Const, MetaMor]


@dataclass(frozen=True)
class Judgement:
	term: TermExpr
	source: TypeExpr
	target: TypeExpr


@dataclass(frozen=True)
class Signature:
	atoms: frozenset[str] | None = None
	constants: Mapping[str, tuple[TypeExpr, TypeExpr]] = field(default_factory=dict)

	def check_atom(self, name: str, position: int | None = None) -> None:
		if self.atoms is not None and name not in self.atoms:
			raise UndeclaredAtomError(f"unknown atom {name!r}", position)


OPEN = Signature()


# Typing table --------------------------------------------------------------

_Typing = Callable[..., tuple[TypeExpr, TypeExpr]]


def _t(a: TypeExpr, b: TypeExpr) -> Tensor:
	return Tensor(a, b)


def _p(a: TypeExpr, b: TypeExpr) -> Par:
	return Par(a, b)


GENERATORS: dict[str, tuple[int, _Typing]] = {
	"delta": (1, lambda a: (Bang(a), Bang(Bang(a)))),
	"eps": (1, lambda a: (Bang(a), a)),
	"dup": (1, lambda a: (Bang(a), _t(Bang(a), Bang(a)))),
	"weak": (1, lambda a: (Bang(a), ONE)),
	"phi": (2, lambda a, b: (_t(Bang(a), Bang(b)), Bang(_t(a, b)))),
	"phi0": (0, lambda: (ONE, Bang(ONE))),
	"dist": (3, lambda a, b, c: (_t(a, _p(b, c)), _p(_t(a, b), c))),
	"dist'": (3, lambda a, b, c: (_t(_p(a, b), c), _p(a, _t(b, c)))),
	"tau": (1, lambda a: (ONE, _p(a, Dual(a)))),
	"gamma": (1, lambda a: (_t(Dual(a), a), BOT)),
	"assocT": (3, lambda a, b, c: (_t(_t(a, b), c), _t(a, _t(b, c)))),
	"assocT'": (3, lambda a, b, c: (_t(a, _t(b, c)), _t(_t(a, b), c))),
	"assocP": (3, lambda a, b, c: (_p(_p(a, b), c), _p(a, _p(b, c)))),
	"assocP'": (3, lambda a, b, c: (_p(a, _p(b, c)), _p(_p(a, b), c))),
	"symT": (2, lambda a, b: (_t(a, b), _t(b, a))),
	"symP": (2, lambda a, b: (_p(a, b), _p(b, a))),
	"lunitT": (1, lambda a: (_t(ONE, a), a)),
	"lunitT'": (1, lambda a: (a, _t(ONE, a))),
	"runitT": (1, lambda a: (_t(a, ONE), a)),
	"runitT'": (1, lambda a: (a, _t(a, ONE))),
	"lunitP": (1, lambda a: (_p(BOT, a), a)),
	"lunitP'": (1, lambda a: (a, _p(BOT, a))),
	"runitP": (1, lambda a: (_p(a, BOT), a)),
	"runitP'": (1, lambda a: (a, _p(a, BOT))),
	"shuffleT": (4, lambda a, b, c, d: (_t(_t(a, b), _t(c, d)), _t(_t(a, c), _t(b, d)))),
}


def gen(name: str, *args: TypeExpr) -> Gen:
	arity, _ = GENERATORS[name]
	if len(args) != arity:
		raise TypeCheckError(f"{name} takes {arity} object arguments, got {len(args)}")
	return Gen(name, tuple(args))


def compose(*terms: TermExpr) -> TermExpr:
	"""Left-nested composite of one or more terms."""
	out = terms[0]
	for t in terms[1:]:
		out = Comp(out, t)
	return out


# Tokenizer -----------------------------------------------------------------

_TOKEN = re.compile(
	r"\s*(?:(?P<op>\(x\)|\(%\)|->)"
	r"|(?P<meta>\?[A-Za-z_][A-Za-z0-9_]*)"
	r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)"
	r"|(?P<sym>[(){},;!^#1:]))"
)


@dataclass(frozen=True)
class _Tok:
	kind: str
	text: str
	pos: int


def _tokenize(text: str) -> list[_Tok]:
	toks: list[_Tok] = []
	pos = 0
	while True:
		while pos < len(text) and text[pos].isspace():
			pos += 1
		if pos >= len(text):
			break
		m = _TOKEN.match(text, pos)
		if m is None or m.end() == pos:
			raise ParseError(f"unexpected character {text[pos]!r}", pos)
		kind = m.lastgroup or "sym"
		toks.append(_Tok(kind, m.group(kind), m.start(kind)))
		pos = m.end()
	toks.append(_Tok("eof", "", len(text)))
	return toks


class _Parser:
	def __init__(self, text: str, signature: Signature, patterns: bool) -> None:
		self.toks = _tokenize(text)
		self.i = 0
		self.sig = signature
		self.patterns = patterns

	@property
	def peek(self) -> _Tok:
		return self.toks[self.i]

	def next(self) -> _Tok:
		tok = self.toks[self.i]
		self.i += 1
		return tok

	def expect(self, text: str) -> _Tok:
		tok = self.next()
		if tok.text != text:
			found = tok.text or "end of input"
			raise ParseError(f"expected {text!r}, found {found!r}", tok.pos)
		return tok

	def done(self) -> None:
		if self.peek.kind != "eof":
			raise ParseError(f"unexpected {self.peek.text!r}", self.peek.pos)

	# objects

	def type_expr(self) -> TypeExpr:
		left = self.type_unary()
		op: str | None = None
		while self.peek.text in ("(x)", "(%)"):
			tok = self.next()
			if op is not None and tok.text != op:
				raise ParseError("mixed (x) and (%) need parentheses", tok.pos)
			op = tok.text
			right = self.type_unary()
			left = Tensor(left, right) if op == "(x)" else Par(left, right)
		return left

	def type_unary(self) -> TypeExpr:
		if self.peek.text == "!":
			self.next()
			return Bang(self.type_unary())
		t = self.type_primary()
		while self.peek.text == "^":
			self.next()
			t = Dual(t)
		return t

	def type_primary(self) -> TypeExpr:
		tok = self.next()
		if tok.text == "1":
			return ONE
		if tok.text == "#":
			return BOT
		if tok.text == "(":
			t = self.type_expr()
			self.expect(")")
			return t
		if tok.kind == "ident":
			if tok.text[0].isupper():
				if not self.patterns:
					raise ParseError(f"type metavariable {tok.text!r} outside a pattern", tok.pos)
				return TypeVar(tok.text)
			self.sig.check_atom(tok.text, tok.pos)
			return Atom(tok.text)
		raise ParseError(f"expected an object, found {tok.text or 'end of input'!r}", tok.pos)

	# morphisms

	def term(self) -> TermExpr:
		out = self.term_tensor()
		while self.peek.text == ";":
			self.next()
			out = Comp(out, self.term_tensor())
		return out

	def term_tensor(self) -> TermExpr:
		left = self.term_factor()
		op: str | None = None
		while self.peek.text in ("(x)", "(%)"):
			tok = self.next()
			if op is not None and tok.text != op:
				raise ParseError("mixed (x) and (%) need parentheses", tok.pos)
			op = tok.text
			right = self.term_factor()
			left = TensorM(left, right) if op == "(x)" else ParM(left, right)
		return left

	def type_args(self) -> tuple[TypeExpr, ...]:
		if self.peek.text != "{":
			return ()
		self.next()
		args = [self.type_expr()]
		while self.peek.text == ",":
			self.next()
			args.append(self.type_expr())
		self.expect("}")
		return tuple(args)

	def term_factor(self) -> TermExpr:
		tok = self.next()
		if tok.text == "!":
			return BangM(self.term_factor())
		if tok.text == "(":
			t = self.term()
			self.expect(")")
			return t
		if tok.kind == "meta":
			if not self.patterns:
				raise ParseError(f"morphism metavariable {tok.text!r} outside a pattern", tok.pos)
			args = self.type_args()
			if len(args) != 2:
				raise ParseError("a morphism metavariable needs {source,target}", tok.pos)
			return MetaMor(tok.text[1:], args[0], args[1])
		if tok.kind == "ident":
			if tok.text == "id":
				args = self.type_args()
				if len(args) != 1:
					raise ParseError("id takes exactly one object", tok.pos)
				return Id(args[0])
			if tok.text in GENERATORS:
				arity, _ = GENERATORS[tok.text]
				args = self.type_args()
				if len(args) != arity:
					raise ParseError(f"{tok.text} takes {arity} objects, got {len(args)}", tok.pos)
				return Gen(tok.text, args)
			if tok.text in self.sig.constants:
				src, tgt = self.sig.constants[tok.text]
				return Const(tok.text, src, tgt)
			raise ParseError(f"unknown morphism {tok.text!r}", tok.pos)
		raise ParseError(f"expected a morphism, found {tok.text or 'end of input'!r}", tok.pos)


def parse_type(text: str, signature: Signature = OPEN, patterns: bool = False) -> TypeExpr:
	p = _Parser(text, signature, patterns)
	t = p.type_expr()
	p.done()
	return t


def parse_term(text: str, signature: Signature = OPEN, patterns: bool = False) -> TermExpr:
	p = _Parser(text, signature, patterns)
	t = p.term()
	p.done()
	return t


def parse_document(text: str, signature: Signature | None = None) -> tuple[Signature, TermExpr]:
	"""Parse a term file: optional `atoms ...` and `gen f : A -> B` lines, then one term.

	Lines starting with `--` are comments.
	"""
	sig = signature or OPEN
	atoms = set(sig.atoms) if sig.atoms is not None else None
	consts = dict(sig.constants)
	body: list[str] = []
	for line in text.splitlines():
		stripped = line.strip()
		if not stripped or stripped.startswith("--"):
			continue
		if stripped.startswith("atoms "):
			atoms = (atoms or set()) | set(stripped[len("atoms "):].replace(",", " ").split())
			continue
		if stripped.startswith("gen "):
			decl = stripped[len("gen "):]
			name, _, typing = decl.partition(":")
			src_text, arrow, tgt_text = typing.partition("->")
			if not arrow:
				raise ParseError(f"bad declaration {stripped!r}")
			cur = Signature(frozenset(atoms) if atoms is not None else None, consts)
			consts[name.strip()] = (parse_type(src_text, cur), parse_type(tgt_text, cur))
			continue
		body.append(stripped)
	sig = Signature(frozenset(atoms) if atoms is not None else None, consts)
	if not body:
		raise ParseError("empty input: no term found", 0)
	return sig, parse_term(" ".join(body), sig)


# Printing ------------------------------------------------------------------

_TIGHT = (Atom, One, Bot, TypeVar)


def show_type(t: TypeExpr) -> str:
	if isinstance(t, (Atom, TypeVar)):
		return t.name
	if isinstance(t, One):
		return "1"
	if isinstance(t, Bot):
		return "#"
	if isinstance(t, Dual):
		inner = show_type(t.body)
		return f"{inner}^" if isinstance(t.body, _TIGHT + (Dual,)) else f"({inner})^"
	if isinstance(t, Bang):
		inner = show_type(t.body)
		return f"!{inner}" if isinstance(t.body, _TIGHT + (Dual, Bang)) else f"!({inner})"
	op = " (x) " if isinstance(t, Tensor) else " (%) "
	same = Tensor if isinstance(t, Tensor) else Par
	left = show_type(t.left)
	if isinstance(t.left, (Tensor, Par)) and not isinstance(t.left, same):
		left = f"({left})"
	right = show_type(t.right)
	if isinstance(t.right, (Tensor, Par)):
		right = f"({right})"
	return left + op + right


def pretty_print(t: TermExpr) -> str:
	if isinstance(t, Id):
		return f"id{{{show_type(t.ty)}}}"
	if isinstance(t, Comp):
		right = pretty_print(t.second)
		if isinstance(t.second, Comp):
			right = f"({right})"
		return f"{pretty_print(t.first)} ; {right}"
	if isinstance(t, (TensorM, ParM)):
		op = " (x) " if isinstance(t, TensorM) else " (%) "
		same = TensorM if isinstance(t, TensorM) else ParM
		left = pretty_print(t.left)
		if isinstance(t.left, Comp) or (isinstance(t.left, (TensorM, ParM)) and not isinstance(t.left, same)):
			left = f"({left})"
		right = pretty_print(t.right)
		if isinstance(t.right, (Comp, TensorM, ParM)):
			right = f"({right})"
		return left + op + right
	if isinstance(t, BangM):
		return f"!({pretty_print(t.body)})"
	if isinstance(t, Gen):
		if not t.args:
			return t.name
		return f"{t.name}{{{','.join(show_type(a) for a in t.args)}}}"
	if isinstance(t, Const):
		return t.name
	if isinstance(t, MetaMor):
		return f"?{t.name}{{{show_type(t.source)},{show_type(t.target)}}}"
	raise TypeError(f"not a term: {t!r}")


# Typechecking --------------------------------------------------------------


def _synth(t: TermExpr, path: tuple[int, ...]) -> tuple[TypeExpr, TypeExpr]:
	if isinstance(t, Id):
		return t.ty, t.ty
	if isinstance(t, Comp):
		a, b = _synth(t.first, path + (0,))
		c, d = _synth(t.second, path + (1,))
		if b != c:
			raise TypeCheckError(
				f"composition mismatch: {show_type(b)} vs {show_type(c)}", path, expected=b, found=c
			)
		return a, d
	if isinstance(t, (TensorM, ParM)):
		a, b = _synth(t.left, path + (0,))
		c, d = _synth(t.right, path + (1,))
		if isinstance(t, TensorM):
			return Tensor(a, c), Tensor(b, d)
		return Par(a, c), Par(b, d)
	if isinstance(t, BangM):
		a, b = _synth(t.body, path + (0,))
		return Bang(a), Bang(b)
	if isinstance(t, Gen):
		if t.name not in GENERATORS:
			raise TypeCheckError(f"unknown generator {t.name!r}", path)
		arity, typing = GENERATORS[t.name]
		if len(t.args) != arity:
			raise TypeCheckError(f"{t.name} takes {arity} objects", path)
		return typing(*t.args)
	if isinstance(t, (Const, MetaMor)):
		return t.source, t.target
	raise TypeCheckError(f"not a term: {t!r}", path)


def boundary(t: TermExpr) -> tuple[TypeExpr, TypeExpr]:
	return _synth(t, ())


def typecheck(t: TermExpr) -> Judgement:
	src, tgt = _synth(t, ())
	return Judgement(t, src, tgt)


# Traversal helpers ---------------------------------------------------------


def subterm(t: TermExpr, path: tuple[int, ...]) -> TermExpr:
	for i in path:
		kids = children(t)
		if i >= len(kids):
			raise IndexError(f"path step {i} out of range")
		t = kids[i]
	return t


def children(t: TermExpr) -> tuple[TermExpr, ...]:
	if isinstance(t, Comp):
		return (t.first, t.second)
	if isinstance(t, (TensorM, ParM)):
		return (t.left, t.right)
	if isinstance(t, BangM):
		return (t.body,)
	return ()


def iter_types(t: TypeExpr) -> Iterator[TypeExpr]:
	yield t
	if isinstance(t, (Tensor, Par)):
		yield from iter_types(t.left)
		yield from iter_types(t.right)
	elif isinstance(t, (Dual, Bang)):
		yield from iter_types(t.body)


def type_atoms(t: TypeExpr) -> set[str]:
	return {s.name for s in iter_types(t) if isinstance(s, Atom)}


def subst_type(t: TypeExpr, env: Mapping[str, TypeExpr]) -> TypeExpr:
	if isinstance(t, TypeVar):
		return env.get(t.name, t)
	if isinstance(t, Tensor):
		return Tensor(subst_type(t.left, env), subst_type(t.right, env))
	if isinstance(t, Par):
		return Par(subst_type(t.left, env), subst_type(t.right, env))
	if isinstance(t, Dual):
		return Dual(subst_type(t.body, env))
	if isinstance(t, Bang):
		return Bang(subst_type(t.body, env))
	return t


def subst_term(
	t: TermExpr,
	types: Mapping[str, TypeExpr],
	mors: Mapping[str, TermExpr] | None = None,
) -> TermExpr:
	"""Instantiate type and morphism metavariables."""
	mors = mors or {}
	if isinstance(t, Id):
		return Id(subst_type(t.ty, types))
	if isinstance(t, Comp):
		return Comp(subst_term(t.first, types, mors), subst_term(t.second, types, mors))
	if isinstance(t, TensorM):
		return TensorM(subst_term(t.left, types, mors), subst_term(t.right, types, mors))
	if isinstance(t, ParM):
		return ParM(subst_term(t.left, types, mors), subst_term(t.right, types, mors))
	if isinstance(t, BangM):
		return BangM(subst_term(t.body, types, mors))
	if isinstance(t, Gen):
		return Gen(t.name, tuple(subst_type(a, types) for a in t.args))
	if isinstance(t, MetaMor):
		if t.name in mors:
			return mors[t.name]
		return MetaMor(t.name, subst_type(t.source, types), subst_type(t.target, types))
	return t


def term_depth(t: TermExpr) -> int:
	kids = children(t)
	return 1 + max((term_depth(k) for k in kids), default=0)
