from __future__ import annotations

import re
from pathlib import Path

import pytest

from exotic_bseries import paths
from exotic_bseries.config import load_settings
from exotic_bseries.errors import ConfigParseError, ConfigValidationError
from exotic_bseries.models import McSettings, Settings


def _write(tmp_path: Path, text: str) -> Path:
    p = tmp_path / "exotic-bseries.toml"
    p.write_text(text, encoding="utf-8")
    return p


def test_defaults_without_a_file(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("EXOTIC_BSERIES_CONFIG", raising=False)
    monkeypatch.chdir(tmp_path)
    assert load_settings() == Settings()


def test_minimal_file(tmp_path: Path) -> None:
    assert load_settings(_write(tmp_path, "version = 1\n")) == Settings()


def test_overrides(tmp_path: Path) -> None:
    p = _write(
        tmp_path,
        """
version = 1

[mc]
bias_constant = 2.5
block_size = 128

[verify]
seed = 3
oracle_max_legs = 6

[series]
default_method = "operator"

[multi]
max_length = 6
""",
    )
    s = load_settings(p)
    assert s.multi.max_length == 6
    assert s.mc == McSettings(bias_constant=2.5, block_size=128)
    assert s.verify.seed == 3
    assert s.verify.oracle_max_legs == 6
    assert s.series.default_method == "operator"


@pytest.mark.parametrize(
    ("text", "needle"),
    [
        ("version = 2\n", "version: expected 1"),
        ("colour = 1\n", "top-level: unknown keys: colour"),
        ("[mc]\npaths = 3\n", "mc: unknown keys: paths"),
        ("[mc]\nblock_size = 0\n", "mc.block_size: expected >= 1"),
        ("[mc]\nbias_constant = \"x\"\n", "mc.bias_constant: expected number"),
        ("mc = 3\n", "mc: expected table"),
        ("[series]\ndefault_method = \"magic\"\n", "series.default_method: expected one of"),
        ("[multi]\nmax_length = 0\n", "multi.max_length: expected >= 1"),
    ],
)
def test_validation_errors(tmp_path: Path, text: str, needle: str) -> None:
    p = _write(tmp_path, text)
    with pytest.raises(ConfigValidationError) as exc:
        load_settings(p)
    assert needle in str(exc.value)
    assert str(p) in str(exc.value)


def test_invalid_toml_reports_position(tmp_path: Path) -> None:
    p = _write(tmp_path, "version =\n")
    with pytest.raises(ConfigParseError) as exc:
        load_settings(p)
    msg = str(exc.value)
    assert "Invalid TOML in" in msg
    assert re.search(r"\(line \d+, column \d+\)$", msg)


def test_missing_explicit_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigValidationError) as exc:
        load_settings(tmp_path / "absent.toml")
    assert "file not found" in str(exc.value)


def test_lookup_walks_up_from_cwd(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("EXOTIC_BSERIES_CONFIG", raising=False)
    _write(tmp_path, "[verify]\nseed = 11\n")
    nested = tmp_path / "a" / "b"
    nested.mkdir(parents=True)
    monkeypatch.chdir(nested)
    assert load_settings().verify.seed == 11


def test_env_override(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    other = tmp_path / "elsewhere.toml"
    other.write_text("[series]\ndefault_method = \"multi\"\n", encoding="utf-8")
    monkeypatch.setenv("EXOTIC_BSERIES_CONFIG", str(other))
    assert paths.find_config() == other.resolve()
    assert load_settings().series.default_method == "multi"


def test_worker_count(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("EXOTIC_BSERIES_THREADS", "3")
    assert paths.worker_count() == 3
    monkeypatch.setenv("EXOTIC_BSERIES_THREADS", "0")
    assert paths.worker_count() == 1
    monkeypatch.setenv("EXOTIC_BSERIES_THREADS", "many")
    assert paths.worker_count() == 1
    monkeypatch.delenv("EXOTIC_BSERIES_THREADS")
    assert paths.worker_count() >= 1
