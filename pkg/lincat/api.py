from __future__ import annotations

import logging
from typing import Any, Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import __version__
from .config import Settings, settings
from .decide import (
	SemanticCheck,
	decide_equal,
	decide_semantic,
	echo_interp,
	normalize_to_graph,
	required_prime,
)
from .enumerate import pi_exact, pi_mod_p
from .errors import ConfigError, FuelExhausted, LincatError, TruncationInstability
from .generic import check_stars, default_echo_params, echo_instance, generic_form, reconstruct_generic, show_pair
from .graph import GraphModel, to_dot, to_model
from .netcheck import stats
from .rewrite import normalize
from .semantics import Interp, coeff_stable, format_element, parse_element
from .syntax import Signature, TermExpr, parse_document, pretty_print, show_type, type_atoms, typecheck

log = logging.getLogger(__name__)


class TermRequest(BaseModel):
	text: str = Field(..., description="Term file contents: optional atoms/gen lines, then one term")
	fuel: int | None = None
	cong_budget: int | None = None


class TypecheckResponse(BaseModel):
	term: str
	source: str
	target: str


class NormalizeResponse(BaseModel):
	normal: str
	steps: int
	trace: list[str]


class GraphRequest(TermRequest):
	format: Literal["json", "dot"] = "json"


class CoeffRequest(TermRequest):
	alpha: str
	beta: str
	via: Literal["semantics", "pi", "pi-mod-p"] = "semantics"
	interp_size: int | None = None
	degree: int | None = None
	p: int | None = None


class DecideRequest(BaseModel):
	f: str
	g: str
	semantic: bool = False
	p: int | None = None
	fuel: int | None = None
	cong_budget: int | None = None


class DecideResponse(BaseModel):
	verdict: str
	detail: str
	semantic: dict[str, Any] | None = None


class PechoRequest(TermRequest):
	p: int | None = None


app = FastAPI(title="lincat", version=__version__)

app.add_middleware(
	CORSMiddleware,
	allow_origins=["http://localhost", "http://localhost:3000", "http://127.0.0.1:8000"],
	allow_credentials=True,
	allow_methods=["*"],
	allow_headers=["*"],
)


def _cfg(**overrides: Any) -> Settings:
	try:
		return settings.with_overrides(**overrides)
	except ConfigError as e:
		raise HTTPException(status_code=400, detail=str(e))


def _load(text: str, cfg: Settings) -> tuple[Signature, TermExpr]:
	return parse_document(text, Signature(frozenset(cfg.atoms)))


def _bad_request(e: Exception) -> HTTPException:
	return HTTPException(status_code=400, detail=str(e))


@app.get("/health")
def health() -> dict[str, str]:
	return {"status": "ok", "version": __version__}


@app.post("/typecheck", response_model=TypecheckResponse)
def api_typecheck(req: TermRequest) -> TypecheckResponse:
	try:
		_, term = _load(req.text, settings)
		j = typecheck(term)
	except LincatError as e:
		raise _bad_request(e)
	return TypecheckResponse(term=pretty_print(term), source=show_type(j.source), target=show_type(j.target))


@app.post("/normalize", response_model=NormalizeResponse)
def api_normalize(req: TermRequest) -> NormalizeResponse:
	cfg = _cfg(fuel=req.fuel, cong_budget=req.cong_budget)
	try:
		_, term = _load(req.text, cfg)
		normal, trace = normalize(term, cfg.fuel, cfg.cong_budget)
	except LincatError as e:
		raise _bad_request(e)
	return NormalizeResponse(normal=pretty_print(normal), steps=len(trace), trace=[str(s) for s in trace.steps])


@app.post("/graph")
def api_graph(req: GraphRequest) -> dict[str, Any]:
	cfg = _cfg(fuel=req.fuel, cong_budget=req.cong_budget)
	try:
		_, term = _load(req.text, cfg)
		g = normalize_to_graph(term, cfg.fuel, cfg.cong_budget).graph
	except LincatError as e:
		raise _bad_request(e)
	if req.format == "dot":
		return {"dot": to_dot(g)}
	model: GraphModel = to_model(g)
	return {"graph": model.model_dump(mode="json", by_alias=True)}


@app.post("/coeff")
def api_coeff(req: CoeffRequest) -> dict[str, Any]:
	cfg = _cfg(fuel=req.fuel, cong_budget=req.cong_budget, interp_size=req.interp_size, degree_cap=req.degree, prime=req.p)
	try:
		_, term = _load(req.text, cfg)
		j = typecheck(term)
		atoms = set(cfg.atoms) | type_atoms(j.source) | type_atoms(j.target)
		interp = Interp.uniform(sorted(atoms), cfg.interp_size, cfg.degree_cap)
		alpha, beta = parse_element(req.alpha), parse_element(req.beta)
		if req.via == "semantics":
			value = coeff_stable(j, alpha, beta, interp)
		else:
			g = normalize_to_graph(term, cfg.fuel, cfg.cong_budget).graph
			if req.via == "pi":
				value = pi_exact(g, [alpha], [beta], interp, cfg.enum_cap)
			else:
				value = pi_mod_p(g, [alpha], [beta], cfg.prime or required_prime(stats(g)), interp)
	except (LincatError, ValueError) as e:
		raise _bad_request(e)
	return {"via": req.via, "value": value}


@app.post("/decide", response_model=DecideResponse)
def api_decide(req: DecideRequest) -> DecideResponse:
	cfg = _cfg(fuel=req.fuel, cong_budget=req.cong_budget, prime=req.p)
	try:
		_, f = _load(req.f, cfg)
		_, g = _load(req.g, cfg)
		verdict = decide_equal(f, g, cfg.fuel, cfg.cong_budget)
		semantic = None
		if req.semantic:
			check = SemanticCheck(cfg.prime or 2)
			sem = decide_semantic(f, g, cfg.prime, None, cfg.fuel, cfg.cong_budget, check)
			semantic = {"verdict": type(sem).__name__, "detail": str(sem), "p": check.p, "failed": check.failed}
	except LincatError as e:
		raise _bad_request(e)
	return DecideResponse(verdict=type(verdict).__name__, detail=str(verdict), semantic=semantic)


@app.post("/pecho")
def api_pecho(req: PechoRequest) -> dict[str, Any]:
	cfg = _cfg(fuel=req.fuel, cong_budget=req.cong_budget, prime=req.p)
	try:
		_, term = _load(req.text, cfg)
		g = normalize_to_graph(term, cfg.fuel, cfg.cong_budget).graph
		p = cfg.prime or required_prime(stats(g))
		fp = generic_form(g)
		params = default_echo_params(g, p, fp)
		alpha, beta = echo_instance(g, params, fp)
		report = check_stars(g, alpha, beta, p, echo_interp(params, fp.var_types))
		rebuilt = reconstruct_generic(alpha, beta, p, g.top_types, g.bottom_types)
	except (FuelExhausted, TruncationInstability) as e:
		raise HTTPException(status_code=422, detail=f"inconclusive: {e}")
	except LincatError as e:
		raise _bad_request(e)
	return {
		"p": p,
		"form": show_pair(fp),
		"alpha": [format_element(e, p) for e in alpha],
		"beta": [format_element(e, p) for e in beta],
		"stars": {f"star{i}": getattr(report, f"star{i}") for i in range(1, 6)},
		"witnesses": report.witnesses,
		"reconstructed": show_pair(rebuilt),
	}


@app.get("/fixtures")
def list_fixtures() -> dict[str, Any]:
	root = settings.fixtures_dir
	names = sorted(p.name for p in root.iterdir() if p.is_file()) if root.is_dir() else []
	return {"fixtures": names}


@app.get("/fixtures/{name}")
def get_fixture(name: str) -> dict[str, str]:
	root = settings.fixtures_dir.resolve()
	for candidate in (root / name, root / f"{name}.lc"):
		path = candidate.resolve()
		if path.parent == root and path.is_file():
			return {"name": path.name, "text": path.read_text(encoding="utf-8")}
	raise HTTPException(status_code=404, detail="fixture not found")
