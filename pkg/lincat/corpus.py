"""Seeded random types and well-typed terms for property runs."""

from __future__ import annotations

import logging
import random
from typing import Callable, Iterator, Sequence

from .syntax import (
	BOT,
	ONE,
	Atom,
	Bang,
	BangM,
	Bot,
	Comp,
	Dual,
	Id,
	One,
	Par,
	ParM,
	Tensor,
	TensorM,
	TermExpr,
	TypeExpr,
	boundary,
	gen,
)

log = logging.getLogger(__name__)

DEFAULT_ATOMS = ("a", "b")


def random_type(rng: random.Random, atoms: Sequence[str] = DEFAULT_ATOMS, depth: int = 2) -> TypeExpr:
	if depth <= 0 or rng.random() < 0.3:
		roll = rng.random()
		if roll < 0.1:
			return ONE
		if roll < 0.15:
			return BOT
		return Atom(rng.choice(list(atoms)))
	kind = rng.choice(("tensor", "par", "bang", "bang", "dual"))
	if kind == "tensor":
		return Tensor(random_type(rng, atoms, depth - 1), random_type(rng, atoms, depth - 1))
	if kind == "par":
		return Par(random_type(rng, atoms, depth - 1), random_type(rng, atoms, depth - 1))
	if kind == "dual":
		return Dual(Atom(rng.choice(list(atoms))))
	return Bang(random_type(rng, atoms, depth - 1))


Move = Callable[[], TermExpr]


def _moves(rng: random.Random, a: TypeExpr, depth: int, atoms: Sequence[str]) -> list[Move]:
	"""Terms with source `a`, one per applicable constructor."""
	def sub(t: TypeExpr) -> TermExpr:
		return random_term(rng, t, depth - 1, atoms)

	out: list[Move] = [lambda: Id(a)]
	if isinstance(a, Bang):
		b = a.body
		out += [
			lambda: gen("eps", b),
			lambda: gen("delta", b),
			lambda: gen("dup", b),
			lambda: gen("weak", b),
			lambda: BangM(sub(b)),
		]
	if isinstance(a, Tensor):
		l, r = a.left, a.right
		out += [lambda: TensorM(sub(l), sub(r)), lambda: gen("symT", l, r)]
		if isinstance(l, Tensor):
			out.append(lambda: gen("assocT", l.left, l.right, r))
		if isinstance(r, Tensor):
			out.append(lambda: gen("assocT'", l, r.left, r.right))
		if isinstance(l, One):
			out.append(lambda: gen("lunitT", r))
		if isinstance(r, One):
			out.append(lambda: gen("runitT", l))
		if isinstance(l, Bang) and isinstance(r, Bang):
			out.append(lambda: gen("phi", l.body, r.body))
		if isinstance(r, Par):
			out.append(lambda: gen("dist", l, r.left, r.right))
		if isinstance(l, Par):
			out.append(lambda: gen("dist'", l.left, l.right, r))
		if isinstance(l, Dual) and l.body == r:
			out.append(lambda: gen("gamma", r))
		if isinstance(l, Tensor) and isinstance(r, Tensor):
			out.append(lambda: gen("shuffleT", l.left, l.right, r.left, r.right))
	if isinstance(a, Par):
		l, r = a.left, a.right
		out += [lambda: ParM(sub(l), sub(r)), lambda: gen("symP", l, r)]
		if isinstance(l, Par):
			out.append(lambda: gen("assocP", l.left, l.right, r))
		if isinstance(r, Par):
			out.append(lambda: gen("assocP'", l, r.left, r.right))
		if isinstance(l, Bot):
			out.append(lambda: gen("lunitP", r))
		if isinstance(r, Bot):
			out.append(lambda: gen("runitP", l))
	if isinstance(a, One):
		out += [lambda: gen("phi0"), lambda: gen("tau", Atom(rng.choice(list(atoms))))]
	if rng.random() < 0.15:
		out.append(lambda: gen(rng.choice(("runitT'", "lunitT'", "runitP'", "lunitP'")), a))
	return out


def random_term(
	rng: random.Random, source: TypeExpr, depth: int = 3, atoms: Sequence[str] = DEFAULT_ATOMS
) -> TermExpr:
	"""A well-typed term out of `source`; its target is whatever the moves produce."""
	if depth <= 0:
		return Id(source)
	first = rng.choice(_moves(rng, source, depth, atoms))()
	if rng.random() < 0.5:
		_, mid = boundary(first)
		return Comp(first, random_term(rng, mid, depth - 1, atoms))
	return first


def corpus(seed: int = 0, count: int = 20, depth: int = 3, atoms: Sequence[str] = DEFAULT_ATOMS) -> Iterator[TermExpr]:
	"""`count` random terms, the same ones for the same seed."""
	rng = random.Random(seed)
	for _ in range(count):
		source = random_type(rng, atoms, 2)
		yield random_term(rng, source, depth, atoms)


__all__ = ["random_type", "random_term", "corpus", "DEFAULT_ATOMS"]
