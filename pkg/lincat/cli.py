from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import yaml
from tqdm import tqdm

from .config import Settings, settings
from .corpus import corpus
from .decide import (
	SemanticCheck,
	decide_equal,
	decide_semantic,
	echo_interp,
	exit_code,
	normal_forms_agree,
	normalize_to_graph,
	required_prime,
)
from .enumerate import pi_exact, pi_mod_p
from .errors import FuelExhausted, LincatError, TruncationInstability
from .generic import (
	check_stars,
	default_echo_params,
	echo_instance,
	forms_equivalent,
	generic_form,
	reconstruct_generic,
	reconstruct_graph,
	show_pair,
)
from .graph import Graph, GraphBuilder, PartKind, term_to_graph, to_dot, to_json
from .logs import setup_logging
from .netcheck import check_wellformed, graph_difference, stats
from .rewrite import normalize
from .semantics import Interp, coeff_stable, format_element, matrix_of_constant, parse_element
from .syntax import Dual, Signature, TermExpr, parse_document, pretty_print, show_type, type_atoms, typecheck

log = logging.getLogger(__name__)

EXIT_OK, EXIT_DISTINCT, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


# Inputs ----------------------------------------------------------------------


def read_source(name: str, cfg: Settings) -> str:
	"""A path, or the name of a file in the fixtures directory (with or without `.lc`)."""
	for candidate in (Path(name), cfg.fixtures_dir / name, cfg.fixtures_dir / f"{name}.lc"):
		if candidate.is_file():
			return candidate.read_text(encoding="utf-8")
	raise FileNotFoundError(f"no such file or fixture: {name}")


def load_term(name: str, cfg: Settings) -> tuple[Signature, TermExpr]:
	sig = Signature(frozenset(cfg.atoms)) if cfg.atoms else None
	return parse_document(read_source(name, cfg), sig)


def build_interp(cfg: Settings, sig: Signature, *types, constants: str | None = None) -> Interp:
	atoms = set(cfg.atoms) | (set(sig.atoms) if sig.atoms is not None else set())
	for t in types:
		atoms |= type_atoms(t)
	interp = Interp.uniform(sorted(atoms), cfg.interp_size, cfg.degree_cap)
	if constants:
		interp = Interp(interp.atom_sets, interp.degree_cap, load_constants(Path(constants)))
	return interp


def load_constants(path: Path) -> dict:
	"""`name: [[alpha, beta, value], ...]` in YAML, elements in element syntax."""
	raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
	out = {}
	for name, rows in raw.items():
		out[name] = matrix_of_constant({(parse_element(str(a)), parse_element(str(b))): int(v) for a, b, v in rows})
	return out


def _emit(cfg: Settings, text: str, payload: dict[str, Any]) -> None:
	print(json.dumps(payload, indent=2, default=str) if cfg.output_format == "json" else text)


# Commands --------------------------------------------------------------------


def cmd_parse(args: argparse.Namespace, cfg: Settings) -> int:
	_, term = load_term(args.file, cfg)
	_emit(cfg, pretty_print(term), {"term": pretty_print(term)})
	return EXIT_OK


def cmd_typecheck(args: argparse.Namespace, cfg: Settings) -> int:
	_, term = load_term(args.file, cfg)
	j = typecheck(term)
	src, tgt = show_type(j.source), show_type(j.target)
	_emit(cfg, f"{pretty_print(term)} : {src} -> {tgt}", {"term": pretty_print(term), "source": src, "target": tgt})
	return EXIT_OK


def cmd_normalize(args: argparse.Namespace, cfg: Settings) -> int:
	_, term = load_term(args.file, cfg)
	normal, trace = normalize(term, cfg.fuel, cfg.cong_budget)
	lines = [pretty_print(normal)]
	if args.trace:
		lines += ["", trace.to_text()] if len(trace) else ["", "(no steps)"]
	_emit(
		cfg,
		"\n".join(lines),
		{"normal": pretty_print(normal), "steps": len(trace), "trace": [str(s) for s in trace.steps] if args.trace else None},
	)
	return EXIT_OK


def _normal_graph(name: str, cfg: Settings) -> tuple[Signature, Graph]:
	sig, term = load_term(name, cfg)
	return sig, normalize_to_graph(term, cfg.fuel, cfg.cong_budget).graph


def cmd_graph(args: argparse.Namespace, cfg: Settings) -> int:
	if args.raw:
		_, term = load_term(args.file, cfg)
		g = term_to_graph(typecheck(term))
	else:
		_, g = _normal_graph(args.file, cfg)
	if cfg.output_format == "json":
		print(to_json(g))
	elif cfg.output_format == "dot":
		print(to_dot(g))
	else:
		s = stats(g)
		kinds = sorted({p.kind.value for p in g.parts.values()})
		print(f"wires: {s.size}  parts: {len(g.parts)}  boards: {s.board_count}  duplication scale: {s.dup_scale}")
		for k in kinds:
			print(f"  {k}: {sum(1 for p in g.parts.values() if p.kind.value == k)}")
		report = check_wellformed(g, normal=not args.raw)
		for v in report.violations:
			print(f"  violation: {v}")
	return EXIT_OK


def cmd_coeff(args: argparse.Namespace, cfg: Settings) -> int:
	sig, term = load_term(args.file, cfg)
	j = typecheck(term)
	interp = build_interp(cfg, sig, j.source, j.target, constants=args.constants)
	alpha, beta = parse_element(args.alpha), parse_element(args.beta)
	if args.via == "semantics":
		value = coeff_stable(j, alpha, beta, interp)
	else:
		g = normalize_to_graph(term, cfg.fuel, cfg.cong_budget).graph
		if args.via == "pi":
			value = pi_exact(g, [alpha], [beta], interp, cfg.enum_cap)
		else:
			p = cfg.prime or required_prime(stats(g))
			value = pi_mod_p(g, [alpha], [beta], p, interp)
	_emit(cfg, str(value), {"via": args.via, "value": value})
	return EXIT_OK


def cmd_pecho(args: argparse.Namespace, cfg: Settings) -> int:
	_, g = _normal_graph(args.file, cfg)
	p = cfg.prime or required_prime(stats(g))
	fp = generic_form(g)
	params = default_echo_params(g, p, fp)
	alpha, beta = echo_instance(g, params, fp)
	report = check_stars(g, alpha, beta, p, echo_interp(params, fp.var_types))
	rebuilt = reconstruct_generic(alpha, beta, p, g.top_types, g.bottom_types)
	shown = (
		", ".join(format_element(e, p) for e in alpha),
		", ".join(format_element(e, p) for e in beta),
	)
	flags = {f"star{i}": getattr(report, f"star{i}") for i in range(1, 6)}
	lines = [
		f"p = {p}",
		f"generic form: {show_pair(fp)}",
		f"echo instance: ({shown[0]} ; {shown[1]})",
		"stars: " + " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in flags.items()),
		*[f"  {k}: {v}" for k, v in sorted(report.witnesses.items())],
		f"reconstructed: {show_pair(rebuilt)}",
	]
	_emit(
		cfg,
		"\n".join(lines),
		{
			"p": p,
			"form": show_pair(fp),
			"alpha": shown[0],
			"beta": shown[1],
			"stars": flags,
			"witnesses": report.witnesses,
			"reconstructed": show_pair(rebuilt),
		},
	)
	return EXIT_OK if report.all else EXIT_DISTINCT


def cmd_decide(args: argparse.Namespace, cfg: Settings) -> int:
	_, f = load_term(args.f, cfg)
	_, g = load_term(args.g, cfg)
	verdict = decide_equal(f, g, cfg.fuel, cfg.cong_budget)
	payload: dict[str, Any] = {"verdict": type(verdict).__name__, "detail": str(verdict)}
	lines = [str(verdict)]
	if args.semantic:
		check = SemanticCheck(cfg.prime or 2)
		sem = decide_semantic(f, g, cfg.prime, None, cfg.fuel, cfg.cong_budget, check)
		payload["semantic"] = {"verdict": type(sem).__name__, "detail": str(sem), "p": check.p, "failed": check.failed}
		lines.append(str(sem))
	_emit(cfg, "\n".join(lines), payload)
	return exit_code(verdict)


# Self-test -------------------------------------------------------------------


def _perturbed(g: Graph) -> Graph:
	b = GraphBuilder.from_graph(g)
	w = b.outer_top[0]
	b.wires[w][0] = Dual(b.wires[w][0])
	return b.build()


def _selftest_term(term: TermExpr, cfg: Settings, strategies: int, seed: int, inject: bool) -> list[str]:
	failures: list[str] = []
	g = normalize_to_graph(term, cfg.fuel, cfg.cong_budget).graph
	report = check_wellformed(g, normal=True)
	if not report:
		failures.append(f"ill-formed normal graph: {report.violations}")
	if inject:
		diff = graph_difference(g, _perturbed(g))
		if diff is not None:
			failures.append(f"injected: {diff}")
	diff = normal_forms_agree(term, strategies, seed, cfg.fuel, cfg.cong_budget)
	if diff is not None:
		failures.append(f"normal forms disagree: {diff}")
	if any(p.kind == PartKind.GENERATOR for p in g.parts.values()):
		return failures
	fp = generic_form(g)
	back = reconstruct_graph(fp, g.top_types, g.bottom_types)
	if graph_difference(g, back) is not None:
		failures.append("graph reconstruction is not almost equal")
	p = required_prime(stats(g))
	alpha, beta = echo_instance(g, default_echo_params(g, p, fp), fp)
	if not forms_equivalent(reconstruct_generic(alpha, beta, p, g.top_types, g.bottom_types), fp):
		failures.append("echo reconstruction differs from the generic form")
	return failures


def cmd_selftest(args: argparse.Namespace, cfg: Settings) -> int:
	terms = list(corpus(args.seed, args.count, args.depth, cfg.atoms))
	failed = 0
	inconclusive = 0
	for i, term in enumerate(tqdm(terms, desc="selftest", disable=args.quiet)):
		try:
			failures = _selftest_term(term, cfg, args.strategies, args.seed + i, args.inject_failure)
		except (FuelExhausted, TruncationInstability) as e:
			inconclusive += 1
			log.info("term %d inconclusive: %s", i, e)
			continue
		except LincatError as e:
			failures = [f"{type(e).__name__}: {e}"]
		if failures:
			failed += 1
			print(f"[{i}] {pretty_print(term)}")
			for f in failures:
				print(f"    {f}")
	print(f"selftest: {len(terms)} terms, {failed} failing, {inconclusive} inconclusive (seed {args.seed})")
	return EXIT_OK if failed == 0 else EXIT_DISTINCT


# Entry point -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
	common = argparse.ArgumentParser(add_help=False)
	common.add_argument("--atoms", help="Comma-separated atom declarations")
	common.add_argument("--interp-size", type=int, help="Elements per atom in finite interpretations")
	common.add_argument("--degree", type=int, help="Multiset degree cap D")
	common.add_argument("--fuel", type=int, help="Maximum rewrite steps")
	common.add_argument("--cong-budget", type=int, help="Congruence search budget per rewrite")
	common.add_argument("--p", type=int, dest="prime", help="Prime override")
	common.add_argument("--format", choices=("text", "json", "dot"), dest="output_format")
	common.add_argument("--log-level", help="Logging level (DEBUG, INFO, ...)")
	return common


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="lincat", description="Free linear category normalizer and equality checker")
	sub = parser.add_subparsers(dest="cmd", required=True)
	common = [_common()]

	sp = sub.add_parser("parse", parents=common, help="Parse a term file and print it back")
	sp.add_argument("file")
	tp = sub.add_parser("typecheck", parents=common, help="Print the source and target of a term")
	tp.add_argument("file")

	np_ = sub.add_parser("normalize", parents=common, help="Rewrite a term to normal form")
	np_.add_argument("file")
	np_.add_argument("--trace", action="store_true", help="Print every rule and congruence step")

	gp = sub.add_parser("graph", parents=common, help="Translate and normalize into a graph")
	gp.add_argument("file")
	gp.add_argument("--raw", action="store_true", help="Skip term and graph normalization")

	cp = sub.add_parser("coeff", parents=common, help="One coefficient of the interpretation")
	cp.add_argument("file")
	cp.add_argument("alpha", help="Source element")
	cp.add_argument("beta", help="Target element")
	cp.add_argument("--via", choices=("semantics", "pi", "pi-mod-p"), default="semantics")
	cp.add_argument("--constants", help="YAML file with matrices for declared constants")

	ep = sub.add_parser("pecho", parents=common, help="Echo instance of the normal graph and its star report")
	ep.add_argument("file")

	dp = sub.add_parser("decide", parents=common, help="Decide whether two terms are equal up to ~")
	dp.add_argument("f")
	dp.add_argument("g")
	dp.add_argument("--semantic", action="store_true", help="Also run the echo route")

	st = sub.add_parser("selftest", parents=common, help="Run the invariant suite on a random corpus")
	st.add_argument("--seed", type=int, default=0)
	st.add_argument("--count", type=int, default=20)
	st.add_argument("--depth", type=int, default=3)
	st.add_argument("--strategies", type=int, default=10, help="Randomized normalization runs per term")
	st.add_argument("--quiet", action="store_true", help="No progress bar")
	st.add_argument("--inject-failure", action="store_true", help="Add a check that must fail")
	return parser


COMMANDS: dict[str, Callable[[argparse.Namespace, Settings], int]] = {
	"parse": cmd_parse,
	"typecheck": cmd_typecheck,
	"normalize": cmd_normalize,
	"graph": cmd_graph,
	"coeff": cmd_coeff,
	"pecho": cmd_pecho,
	"decide": cmd_decide,
	"selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
	parser = build_parser()
	args = parser.parse_args(argv)
	try:
		cfg = settings.with_overrides(
			atoms=args.atoms.split(",") if args.atoms else None,
			interp_size=args.interp_size,
			degree_cap=args.degree,
			fuel=args.fuel,
			cong_budget=args.cong_budget,
			prime=args.prime,
			output_format=args.output_format,
			log_level=args.log_level,
		)
		setup_logging(cfg.log_level)
		return COMMANDS[args.cmd](args, cfg)
	except (FuelExhausted, TruncationInstability) as e:
		print(f"inconclusive: {e}", file=sys.stderr)
		return EXIT_INCONCLUSIVE
	except LincatError as e:
		print(f"error: {e}", file=sys.stderr)
		return EXIT_INPUT
	except OSError as e:
		print(f"error: {e}", file=sys.stderr)
		return EXIT_INPUT


if __name__ == "__main__":
	sys.exit(main())
