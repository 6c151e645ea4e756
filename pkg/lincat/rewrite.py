"""Rewriting modulo congruence on morphism terms.

Terms are handled in spine form: a composite is a flat tuple of factors, identities are
empty spines, and adjacent tensor/par/bang factors are merged ("vertical-first"), so
associativity of composition, functoriality and interchange hold on the nose. The
remaining equations are searched breadth-first up to a budget.
"""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterator, Mapping, Union

import yaml

from .errors import FuelExhausted, NoMatchError, PathError
from .syntax import (
	Bang,
	BangM,
	Comp,
	Const,
	Dual,
	Gen,
	Id,
	MetaMor,
	Par,
	ParM,
	Tensor,
	TensorM,
	TermExpr,
	TypeExpr,
	TypeVar,
	boundary,
	compose,
	parse_term,
	pretty_print,
	subst_term,
	subst_type,
	typecheck,
)

log = logging.getLogger(__name__)


# Spine form ----------------------------------------------------------------


@dataclass(frozen=True)
class Spine:
	factors: tuple["Factor", ...]
	source: TypeExpr
	target: TypeExpr


@dataclass(frozen=True)
class TensorF:
	left: Spine
	right: Spine


@dataclass(frozen=True)
class ParF:
	left: Spine
	right: Spine


@dataclass(frozen=True)
class BangF:
	body: Spine


Factor = Union[Gen, Const, MetaMor, TensorF, ParF, BangF]


def _mergeable(a: Factor, b: Factor) -> bool:
	return type(a) is type(b) and isinstance(a, (TensorF, ParF, BangF))


def _merge(a: Factor, b: Factor) -> Factor:
	if isinstance(a, BangF):
		return BangF(join(a.body, b.body))  # type: ignore[union-attr]
	return type(a)(join(a.left, b.left), join(a.right, b.right))  # type: ignore[union-attr]


def join(a: Spine, b: Spine) -> Spine:
	factors = list(a.factors)
	for f in b.factors:
		if factors and _mergeable(factors[-1], f):
			factors[-1] = _merge(factors[-1], f)
		else:
			factors.append(f)
	return Spine(tuple(factors), a.source, b.target)


def to_spine(t: TermExpr) -> Spine:
	if isinstance(t, Id):
		return Spine((), t.ty, t.ty)
	if isinstance(t, Comp):
		return join(to_spine(t.first), to_spine(t.second))
	if isinstance(t, (TensorM, ParM)):
		left, right = to_spine(t.left), to_spine(t.right)
		ctor = Tensor if isinstance(t, TensorM) else Par
		src, tgt = ctor(left.source, right.source), ctor(left.target, right.target)
		if not left.factors and not right.factors:
			return Spine((), src, src)
		fac = TensorF(left, right) if isinstance(t, TensorM) else ParF(left, right)
		return Spine((fac,), src, tgt)
	if isinstance(t, BangM):
		body = to_spine(t.body)
		if not body.factors:
			return Spine((), Bang(body.source), Bang(body.source))
		return Spine((BangF(body),), Bang(body.source), Bang(body.target))
	src, tgt = boundary(t)
	return Spine((t,), src, tgt)


def factor_term(f: Factor) -> TermExpr:
	if isinstance(f, TensorF):
		return TensorM(from_spine(f.left), from_spine(f.right))
	if isinstance(f, ParF):
		return ParM(from_spine(f.left), from_spine(f.right))
	if isinstance(f, BangF):
		return BangM(from_spine(f.body))
	return f


def from_spine(s: Spine) -> TermExpr:
	if not s.factors:
		return Id(s.source)
	return compose(*(factor_term(f) for f in s.factors))


def canonical(t: TermExpr) -> TermExpr:
	return from_spine(to_spine(t))


def _sub_spines(f: Factor) -> Iterator[tuple[str, Spine]]:
	if isinstance(f, (TensorF, ParF)):
		yield "l", f.left
		yield "r", f.right
	elif isinstance(f, BangF):
		yield "b", f.body


Path = tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class Position:
	path: Path
	start: int

	def __str__(self) -> str:
		inner = ".".join(f"{i}{side}" for i, side in self.path)
		return f"{inner}@{self.start}"

	@classmethod
	def parse(cls, text: str) -> "Position":
		inner, at, start = text.partition("@")
		if not at:
			raise PathError(f"bad position {text!r}")
		steps: list[tuple[int, str]] = []
		for part in filter(None, inner.split(".")):
			if part[-1] not in "lrb" or not part[:-1].isdigit():
				raise PathError(f"bad path step {part!r}")
			steps.append((int(part[:-1]), part[-1]))
		return cls(tuple(steps), int(start))


def get_spine(s: Spine, path: Path) -> Spine:
	for i, side in path:
		if i >= len(s.factors):
			raise PathError(f"factor {i} out of range")
		subs = dict(_sub_spines(s.factors[i]))
		if side not in subs:
			raise PathError(f"factor {i} has no {side!r} side")
		s = subs[side]
	return s


def replace_spine(s: Spine, path: Path, new: Spine) -> Spine:
	if not path:
		return new
	(i, side), rest = path[0], path[1:]
	f = s.factors[i]
	if isinstance(f, BangF):
		f2: Factor = BangF(replace_spine(f.body, rest, new))
	elif side == "l":
		f2 = type(f)(replace_spine(f.left, rest, new), f.right)  # type: ignore[union-attr]
	else:
		f2 = type(f)(f.left, replace_spine(f.right, rest, new))  # type: ignore[union-attr]
	return Spine(s.factors[:i] + (f2,) + s.factors[i + 1 :], s.source, s.target)


def positions(s: Spine, path: Path = ()) -> Iterator[Position]:
	"""Leftmost-innermost enumeration of redex positions."""
	for i, f in enumerate(s.factors):
		for side, sub in _sub_spines(f):
			yield from positions(sub, path + ((i, side),))
		yield Position(path, i)


# Matching ------------------------------------------------------------------


@dataclass(frozen=True)
class Env:
	types: Mapping[str, TypeExpr] = field(default_factory=dict)
	mors: Mapping[str, Spine] = field(default_factory=dict)


def unify_type(p: TypeExpr, t: TypeExpr, env: Env) -> Env | None:
	if isinstance(p, TypeVar):
		bound = env.types.get(p.name)
		if bound is None:
			return Env({**env.types, p.name: t}, env.mors)
		return env if bound == t else None
	if type(p) is not type(t):
		return None
	if isinstance(p, (Tensor, Par)):
		env2 = unify_type(p.left, t.left, env)  # type: ignore[union-attr]
		return None if env2 is None else unify_type(p.right, t.right, env2)  # type: ignore[union-attr]
	if isinstance(p, (Dual, Bang)):
		return unify_type(p.body, t.body, env)  # type: ignore[union-attr]
	return env if p == t else None


def _bind_meta(m: MetaMor, ts: Spine, env: Env) -> Env | None:
	env2 = unify_type(m.source, ts.source, env)
	if env2 is not None:
		env2 = unify_type(m.target, ts.target, env2)
	if env2 is None:
		return None
	bound = env2.mors.get(m.name)
	if bound is not None:
		return env2 if bound == ts else None
	return Env(env2.types, {**env2.mors, m.name: ts})


def _match_factor(pf: Factor, tf: Factor, mode: str, env: Env) -> tuple[Env, Factor | None] | None:
	if isinstance(pf, Gen):
		if not isinstance(tf, Gen) or tf.name != pf.name or len(tf.args) != len(pf.args):
			return None
		for pa, ta in zip(pf.args, tf.args):
			env2 = unify_type(pa, ta, env)
			if env2 is None:
				return None
			env = env2
		return env, None
	if isinstance(pf, Const):
		return (env, None) if tf == pf else None
	if isinstance(pf, MetaMor):
		src, tgt = boundary(factor_term(tf))
		env2 = _bind_meta(pf, Spine((tf,), src, tgt), env)
		return None if env2 is None else (env2, None)
	if isinstance(pf, BangF):
		if not isinstance(tf, BangF):
			return None
		got = match_spine(pf.body, tf.body, mode, env)
		if got is None:
			return None
		env, rem = got
		return env, (BangF(rem) if rem is not None and rem.factors else None)
	if type(pf) is not type(tf):
		return None
	got_l = match_spine(pf.left, tf.left, mode, env)  # type: ignore[union-attr]
	if got_l is None:
		return None
	got_r = match_spine(pf.right, tf.right, mode, got_l[0])  # type: ignore[union-attr]
	if got_r is None:
		return None
	rem_l, rem_r = got_l[1], got_r[1]
	if mode == "exact" or (not rem_l.factors and not rem_r.factors):  # type: ignore[union-attr]
		return got_r[0], None
	return got_r[0], type(pf)(rem_l, rem_r)  # type: ignore[arg-type]


def match_spine(ps: Spine, ts: Spine, mode: str, env: Env) -> tuple[Env, Spine | None] | None:
	"""Match pattern spine `ps` against `ts`.

	mode is "exact", "prefix" (ps matches an initial segment of ts) or "suffix".
	Returns the extended environment and the unmatched remainder of `ts`.
	"""
	if len(ps.factors) == 1 and isinstance(ps.factors[0], MetaMor):
		env2 = _bind_meta(ps.factors[0], ts, env)
		if env2 is None:
			return None
		return env2, Spine((), ts.target, ts.target)
	n, m = len(ps.factors), len(ts.factors)
	if not n:
		anchor = ts.target if mode == "suffix" else ts.source
		env2 = unify_type(ps.source, anchor, env)
		if env2 is None or (mode == "exact" and m):
			return None
		return env2, ts
	if m < n or (mode == "exact" and m != n):
		return None
	if mode == "suffix":
		offset = m - n
		for j, pf in enumerate(ps.factors):
			got = _match_factor(pf, ts.factors[offset + j], "suffix" if j == 0 else "exact", env)
			if got is None:
				return None
			env, rem = got
			if j == 0:
				head = ts.factors[:offset] + ((rem,) if rem is not None else ())
		return env, Spine(head, ts.source, subst_type(ps.source, env.types))
	tail: tuple[Factor, ...] = ()
	for j, pf in enumerate(ps.factors):
		last = j == n - 1
		got = _match_factor(pf, ts.factors[j], "prefix" if last and mode == "prefix" else "exact", env)
		if got is None:
			return None
		env, rem = got
		if last:
			tail = ((rem,) if rem is not None else ()) + ts.factors[n:]
	return env, Spine(tail, subst_type(ps.target, env.types), ts.target)


def match_window(pattern: Spine, s: Spine, start: int) -> tuple[Env, tuple[Factor, ...], tuple[Factor, ...]] | None:
	"""Match a rule side against factors start.. of `s`.

	Returns the environment plus the leftovers to emit before and after the rewritten window.
	"""
	k = len(pattern.factors)
	if k == 0 or start + k > len(s.factors):
		return None
	window = s.factors[start : start + k]
	env = Env()
	before: tuple[Factor, ...] = ()
	after: tuple[Factor, ...] = ()
	for j, pf in enumerate(pattern.factors):
		if k == 1:
			mode = "exact"
		elif j == 0:
			mode = "suffix"
		elif j == k - 1:
			mode = "prefix"
		else:
			mode = "exact"
		got = _match_factor(pf, window[j], mode, env)
		if got is None:
			return None
		env, rem = got
		if rem is not None:
			if j == 0:
				before = (rem,)
			else:
				after = (rem,)
	return env, before, after


# Rule tables ---------------------------------------------------------------


@dataclass(frozen=True)
class RewriteRule:
	id: int
	lhs: TermExpr
	rhs: TermExpr

	@property
	def label(self) -> str:
		return str(self.id)


@dataclass(frozen=True)
class CongruenceRule:
	id: str
	left: TermExpr
	right: TermExpr

	def oriented(self) -> list["Oriented"]:
		out = []
		if not isinstance(canonical(self.left), Id):
			out.append(Oriented(f"C:{self.id}", self.left, self.right))
		if not isinstance(canonical(self.right), Id):
			out.append(Oriented(f"C:{self.id}~", self.right, self.left))
		return out


@dataclass(frozen=True)
class Oriented:
	"""One direction of a rule, ready for matching."""

	label: str
	lhs: TermExpr
	rhs: TermExpr

	@property
	def pattern(self) -> Spine:
		return _pattern_spine(self.lhs)


@lru_cache(maxsize=None)
def _pattern_spine(t: TermExpr) -> Spine:
	return to_spine(t)


def _load_yaml(name: str) -> dict:
	text = resources.files("lincat").joinpath("data", name).read_text(encoding="utf-8")
	return yaml.safe_load(text)


@lru_cache(maxsize=1)
def rules_table() -> tuple[RewriteRule, ...]:
	data = _load_yaml("rules.yaml")
	rules = tuple(
		RewriteRule(int(r["id"]), parse_term(r["lhs"], patterns=True), parse_term(r["rhs"], patterns=True))
		for r in data["rules"]
	)
	return tuple(sorted(rules, key=lambda r: r.id))


@lru_cache(maxsize=1)
def congruences_table() -> tuple[CongruenceRule, ...]:
	data = _load_yaml("congruences.yaml")
	return tuple(
		CongruenceRule(str(c["id"]), parse_term(c["left"], patterns=True), parse_term(c["right"], patterns=True))
		for c in data["congruences"]
	)


def _oriented_rules() -> list[Oriented]:
	return [Oriented(r.label, r.lhs, r.rhs) for r in rules_table()]


def _oriented_congruences() -> list[Oriented]:
	return [o for c in congruences_table() for o in c.oriented()]


def lookup(label: str) -> Oriented:
	for o in _oriented_rules() + _oriented_congruences():
		if o.label == label:
			return o
	raise NoMatchError(f"no rule or congruence labelled {label!r}")


# Application ---------------------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
	rule: str
	position: str
	before: str
	after: str

	def __str__(self) -> str:
		return f"{self.rule} @ {self.position} : {self.before} => {self.after}"


@dataclass
class Trace:
	steps: list[TraceStep] = field(default_factory=list)

	def __len__(self) -> int:
		return len(self.steps)

	def rule_ids(self) -> list[str]:
		return [s.rule for s in self.steps]

	def congruence_steps(self) -> list[TraceStep]:
		return [s for s in self.steps if s.rule.startswith("C:")]

	def to_text(self) -> str:
		return "\n".join(str(s) for s in self.steps)

	def replay(self, term: TermExpr) -> TermExpr:
		for step in self.steps:
			term = apply_rule(term, lookup(step.rule), step.position)
		return term


def _rewrite_at(s: Spine, rule: Oriented, pos: Position) -> tuple[Spine, str, str] | None:
	sub = get_spine(s, pos.path)
	got = match_window(rule.pattern, sub, pos.start)
	if got is None:
		return None
	env, before, after = got
	mors = {name: from_spine(sp) for name, sp in env.mors.items()}
	rhs = to_spine(subst_term(rule.rhs, env.types, mors))
	k = len(rule.pattern.factors)
	window = Spine(sub.factors[pos.start : pos.start + k], rhs.source, rhs.target)
	factors = sub.factors[: pos.start] + before + rhs.factors + after + sub.factors[pos.start + k :]
	new_sub = Spine(factors, sub.source, sub.target)
	out = to_spine(from_spine(replace_spine(s, pos.path, new_sub)))
	return out, pretty_print(from_spine(window)), pretty_print(from_spine(rhs))


def apply_rule(term: TermExpr, rule: RewriteRule | Oriented, path: Position | str) -> TermExpr:
	"""Rewrite `term` with `rule` at `path` (a Position or its text form `1l.0b@2`)."""
	if isinstance(rule, RewriteRule):
		rule = Oriented(rule.label, rule.lhs, rule.rhs)
	pos = Position.parse(path) if isinstance(path, str) else path
	s = to_spine(term)
	got = _rewrite_at(s, rule, pos)
	if got is None:
		raise NoMatchError(f"rule {rule.label} does not match at {pos}")
	return from_spine(got[0])


def _first_redex(
	s: Spine, rules: list[Oriented], rng: random.Random | None
) -> tuple[Oriented, Position, Spine, str, str] | None:
	pos_list = list(positions(s))
	if rng is not None:
		rng.shuffle(pos_list)
	for pos in pos_list:
		order = rules if rng is None else rng.sample(rules, len(rules))
		for rule in order:
			got = _rewrite_at(s, rule, pos)
			if got is not None:
				return rule, pos, got[0], got[1], got[2]
	return None


def _neighbours(s: Spine, congruences: list[Oriented]) -> Iterator[tuple[TraceStep, Spine]]:
	for pos in positions(s):
		for rule in congruences:
			got = _rewrite_at(s, rule, pos)
			if got is not None:
				yield TraceStep(rule.label, str(pos), got[1], got[2]), got[0]


def _key(s: Spine) -> str:
	return pretty_print(from_spine(s))


def _search(
	s: Spine, rules: list[Oriented], congruences: list[Oriented], budget: int, rng: random.Random | None
) -> tuple[list[TraceStep], tuple[Oriented, Position, Spine, str, str]] | None:
	"""Breadth-first search through congruence steps for a state where a rule applies."""
	hit = _first_redex(s, rules, rng)
	if hit is not None:
		return [], hit
	queue: deque[tuple[Spine, list[TraceStep]]] = deque([(s, [])])
	seen = {_key(s)}
	explored = 0
	while queue and explored < budget:
		state, steps = queue.popleft()
		explored += 1
		for step, nxt in _neighbours(state, congruences):
			key = _key(nxt)
			if key in seen:
				continue
			seen.add(key)
			path = steps + [step]
			hit = _first_redex(nxt, rules, rng)
			if hit is not None:
				return path, hit
			queue.append((nxt, path))
	if queue:
		log.debug("congruence search stopped at budget %d with %d states pending", budget, len(queue))
	return None


def normalize(
	term: TermExpr,
	fuel: int = 10_000,
	cong_budget: int = 64,
	rng: random.Random | None = None,
) -> tuple[TermExpr, Trace]:
	"""Rewrite until no rule applies within the congruence search bound.

	With `rng` the redex positions and rule order are shuffled (randomized strategy).
	"""
	typecheck(term)
	rules = _oriented_rules()
	congruences = _oriented_congruences()
	trace = Trace()
	s = to_spine(term)
	while True:
		found = _search(s, rules, congruences, cong_budget, rng)
		if found is None:
			break
		cong_steps, (rule, pos, nxt, before, after) = found
		if len(trace) + len(cong_steps) + 1 > fuel:
			raise FuelExhausted(from_spine(s), trace)
		for step in cong_steps:
			log.debug("congruence %s at %s", step.rule, step.position)
		trace.steps.extend(cong_steps)
		trace.steps.append(TraceStep(rule.label, str(pos), before, after))
		log.debug("rule %s at %s", rule.label, pos)
		s = nxt
	result = from_spine(s)
	log.info("normalized in %d steps", len(trace))
	return result, trace


def is_normal(term: TermExpr, cong_budget: int = 64) -> bool:
	typecheck(term)
	return _search(to_spine(term), _oriented_rules(), _oriented_congruences(), cong_budget, None) is None


def redexes(term: TermExpr) -> list[tuple[str, str]]:
	"""All (rule id, position) pairs where a rule matches directly."""
	s = to_spine(term)
	out = []
	for pos in positions(s):
		for rule in _oriented_rules():
			if _rewrite_at(s, rule, pos) is not None:
				out.append((rule.label, str(pos)))
	return out
