from pathlib import Path

from pytest import raises

from lincat.errors import ParseError, TypeCheckError, UndeclaredAtomError
from lincat.syntax import (
	BOT,
	ONE,
	Atom,
	Bang,
	BangM,
	Comp,
	Dual,
	Gen,
	Id,
	Par,
	Signature,
	Tensor,
	TensorM,
	TypeVar,
	children,
	parse_document,
	parse_term,
	parse_type,
	pretty_print,
	show_type,
	subst_type,
	term_depth,
	type_atoms,
	typecheck,
)

FIXTURES = Path(__file__).resolve().parent / "fixtures"
a, b = Atom("a"), Atom("b")


def fixture(name: str) -> str:
	return (FIXTURES / name).read_text(encoding="utf-8")


def test_type_operators_and_precedence():
	assert parse_type("a (x) b (x) a") == Tensor(Tensor(a, b), a)
	assert parse_type("a (%) (b (x) a)") == Par(a, Tensor(b, a))
	assert parse_type("!a^") == Bang(Dual(a))
	assert parse_type("(!a)^") == Dual(Bang(a))
	assert parse_type("1 (x) #") == Tensor(ONE, BOT)


def test_mixed_connectives_need_parentheses():
	with raises(ParseError):
		parse_type("a (x) b (%) a")
	with raises(ParseError):
		parse_term("id{a} (x) id{b} (%) id{a}")


def test_metavariables_only_in_patterns():
	with raises(ParseError):
		parse_type("A (x) b")
	assert parse_type("A (x) b", patterns=True) == Tensor(TypeVar("A"), b)
	with raises(ParseError):
		parse_term("?f{a,b}")


def test_undeclared_atom_is_rejected():
	sig = Signature(frozenset({"a"}))
	with raises(UndeclaredAtomError):
		parse_term("dup{b}", sig)
	assert parse_term("dup{a}", sig) == Gen("dup", (a,))


def test_generator_arity_is_checked():
	with raises(ParseError):
		parse_term("phi{a}")
	with raises(ParseError):
		parse_term("frobnicate{a}")


def test_show_type_round_trips():
	for text in ["!(a (x) b) (%) c^", "((a (%) b) (x) c)^", "!!a", "a (x) (b (x) c)", "!(!a)^"]:
		t = parse_type(text)
		assert parse_type(show_type(t)) == t


def test_pretty_print_round_trips_fixtures():
	for name in ["promotion_left.lc", "promotion_right.lc", "weak_copy.lc", "outer_morphism.lc", "nested_g.lc"]:
		_, term = parse_document(fixture(name))
		assert parse_term(pretty_print(term)) == term


def test_composition_is_left_nested():
	t = parse_term("id{a} ; id{a} ; id{a}")
	assert t == Comp(Comp(Id(a), Id(a)), Id(a))
	assert pretty_print(parse_term("id{a} ; (id{a} ; id{a})")) == "id{a} ; (id{a} ; id{a})"


def test_typecheck_promotion_legs():
	_, left = parse_document(fixture("promotion_left.lc"))
	_, right = parse_document(fixture("promotion_right.lc"))
	jl, jr = typecheck(left), typecheck(right)
	assert jl.source == jr.source == parse_type("!a (x) !b")
	assert jl.target == jr.target == parse_type("!(!(a (x) b) (x) !(a (x) b))")


def test_typecheck_bang_and_tensor():
	j = typecheck(parse_term("!(dup{a}) (x) id{b}"))
	assert j.source == Tensor(Bang(Bang(a)), b)
	assert j.target == Tensor(Bang(Tensor(Bang(a), Bang(a))), b)


def test_typecheck_reports_composition_mismatch():
	_, term = parse_document(fixture("ill_typed.lc"))
	with raises(TypeCheckError) as info:
		typecheck(term)
	assert info.value.expected == Tensor(Bang(a), Bang(a))
	assert info.value.found == Bang(b)


def test_nested_boundaries():
	_, f = parse_document(fixture("nested_f.lc"))
	_, outer = parse_document(fixture("outer_morphism.lc"))
	P = parse_type("a (%) (!a)^")
	Q = parse_type("a (%) (!(a (%) (!a)^))^")
	jf = typecheck(f)
	assert jf.source == Tensor(Bang(Q), Bang(Bang(P)))
	assert jf.target == Bang(P)
	jo = typecheck(outer)
	assert jo.source == Tensor(Bang(Q), Bang(P))
	assert jo.target == a


def test_document_declarations():
	sig, term = parse_document("-- a comment\natoms p q\ngen f : p -> q (x) q\nf ; (id{q} (x) id{q})")
	assert sig.atoms == frozenset({"p", "q"})
	assert typecheck(term).source == Atom("p")
	with raises(ParseError):
		parse_document("atoms a\n-- nothing else\n")
	with raises(ParseError):
		parse_document("gen f p q\nf")


def test_traversal_helpers():
	t = parse_term("!(dup{a}) ; eps{!a (x) !a}")
	assert children(t) == (BangM(Gen("dup", (a,))), Gen("eps", (Tensor(Bang(a), Bang(a)),)))
	assert term_depth(t) >= 2
	assert type_atoms(parse_type("!(a (x) b^)")) == {"a", "b"}
	assert subst_type(parse_type("!A (x) B", patterns=True), {"A": a, "B": b}) == Tensor(Bang(a), b)


def test_tensor_of_morphisms():
	assert parse_term("id{a} (x) id{b}") == TensorM(Id(a), Id(b))
