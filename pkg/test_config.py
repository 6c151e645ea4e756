from pytest import raises

from lincat.config import Settings, load_settings
from lincat.errors import ConfigError


def test_defaults():
	s = Settings()
	assert s.atoms == ["a", "b", "c"]
	assert s.fuel == 10_000
	assert s.prime is None
	assert s.output_format == "text"
	assert s.fixtures_dir.name == "fixtures"


def test_overrides_skip_none():
	s = Settings().with_overrides(fuel=5, prime=None, atoms=["p", " q "])
	assert s.fuel == 5
	assert s.prime is None
	assert s.atoms == ["p", "q"]


def test_invalid_overrides():
	with raises(ConfigError):
		Settings().with_overrides(fuel=0)
	with raises(ConfigError):
		Settings().with_overrides(atoms=[" "])
	with raises(ConfigError):
		Settings().with_overrides(degree_cap=-1)
	with raises(ConfigError):
		Settings().with_overrides(output_format="svg")


def test_environment(monkeypatch, tmp_path):
	monkeypatch.setenv("LINCAT_ATOMS", "x,y")
	monkeypatch.setenv("LINCAT_FUEL", "250")
	monkeypatch.setenv("LINCAT_PRIME", "13")
	monkeypatch.setenv("LINCAT_FORMAT", "json")
	monkeypatch.setenv("LINCAT_FIXTURES", str(tmp_path))
	s = load_settings()
	assert s.atoms == ["x", "y"]
	assert s.fuel == 250
	assert s.prime == 13
	assert s.output_format == "json"
	assert s.fixtures_dir == tmp_path


def test_bad_environment(monkeypatch):
	monkeypatch.setenv("LINCAT_INTERP_SIZE", "-2")
	with raises(ConfigError):
		load_settings()


def test_log_level_is_checked(monkeypatch):
	assert Settings().with_overrides(log_level=" debug ").log_level == "DEBUG"
	with raises(ConfigError):
		Settings().with_overrides(log_level="LOUD")
	monkeypatch.setenv("LINCAT_LOG_LEVEL", "verbose")
	with raises(ConfigError):
		load_settings()
