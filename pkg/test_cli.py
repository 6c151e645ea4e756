import json

from lincat.cli import EXIT_DISTINCT, EXIT_INPUT, EXIT_OK, main, read_source
from lincat.config import settings


def test_fixture_names_resolve():
	assert read_source("dup", settings) == read_source("dup.lc", settings)
	assert "dup{a}" in read_source("dup", settings)


def test_typecheck(capsys):
	assert main(["typecheck", "dup"]) == EXIT_OK
	out = capsys.readouterr().out
	assert out.strip() == "dup{a} : !a -> !a (x) !a"


def test_parse_as_json(capsys):
	assert main(["parse", "dup", "--format", "json"]) == EXIT_OK
	assert json.loads(capsys.readouterr().out) == {"term": "dup{a}"}


def test_ill_typed_input(capsys):
	assert main(["typecheck", "ill_typed"]) == EXIT_INPUT
	assert capsys.readouterr().err.startswith("error:")


def test_missing_file(capsys):
	assert main(["parse", "no/such/file.lc"]) == EXIT_INPUT
	assert "no such file" in capsys.readouterr().err


def test_bad_setting(capsys):
	assert main(["parse", "dup", "--fuel", "0"]) == EXIT_INPUT
	assert "error:" in capsys.readouterr().err


def test_normalize_with_trace(capsys):
	assert main(["normalize", "weak_copy", "--trace"]) == EXIT_OK
	out = capsys.readouterr().out
	assert out.strip()


def test_graph_outputs(capsys):
	assert main(["graph", "dup"]) == EXIT_OK
	out = capsys.readouterr().out
	assert out.startswith("wires: 8")
	assert "Duplicator: 1" in out
	assert "violation" not in out
	assert main(["graph", "dup", "--format", "dot"]) == EXIT_OK
	assert capsys.readouterr().out.startswith("digraph G {")
	assert main(["graph", "dup", "--format", "json"]) == EXIT_OK
	model = json.loads(capsys.readouterr().out)
	assert len(model["outerTop"]) == 1


def test_coefficients(capsys):
	for via in ("semantics", "pi", "pi-mod-p"):
		assert main(["coeff", "dup", "{a1}", "({a1}, {})", "--via", via]) == EXIT_OK
		assert capsys.readouterr().out.strip() == "1"


def test_decide_equal_legs(capsys):
	assert main(["decide", "promotion_left", "promotion_right"]) == EXIT_OK
	assert "equivalent up to ~" in capsys.readouterr().out


def test_decide_distinct(tmp_path, capsys):
	f = tmp_path / "sym.lc"
	g = tmp_path / "id.lc"
	f.write_text("atoms a\nsymT{a, a}\n", encoding="utf-8")
	g.write_text("atoms a\nid{a (x) a}\n", encoding="utf-8")
	assert main(["decide", str(f), str(g), "--format", "json"]) == EXIT_DISTINCT
	payload = json.loads(capsys.readouterr().out)
	assert payload["verdict"] == "Distinct"


def test_pecho_on_duplicator(capsys):
	assert main(["pecho", "dup"]) == EXIT_OK
	out = capsys.readouterr().out
	assert out.startswith("p = 11")
	assert "star1=ok" in out


def test_selftest(capsys):
	assert main(["selftest", "--count", "2", "--strategies", "1", "--quiet"]) in (EXIT_OK, EXIT_DISTINCT)
	assert "selftest: 2 terms" in capsys.readouterr().out
	assert main(["selftest", "--count", "2", "--strategies", "1", "--quiet", "--inject-failure"]) == EXIT_DISTINCT
	assert "injected: outer boundary types differ" in capsys.readouterr().out
