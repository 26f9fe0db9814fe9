from __future__ import annotations

import json
from pathlib import Path

import pytest

from exotic_bseries import series as series_mod
from exotic_bseries.cli import main
from exotic_bseries.series import SdeProblem, TruncatedSeries, expand_by_operator


FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"
OU_MEAN = FIXTURES / "sde" / "ou_mean.json"


@pytest.fixture(autouse=True)
def _isolated(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("EXOTIC_BSERIES_CONFIG", raising=False)
    monkeypatch.chdir(tmp_path)


def _golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


@pytest.mark.parametrize(
    ("tree", "golden"),
    [
        ("o(a(b#1),a(b#1),a)", "trees_info_two_branch_pair.json"),
        ("o(a(b#1),a(b#1))", "trees_info_crossed_pair.json"),
    ],
)
def test_trees_info_matches_golden(tree: str, golden: str, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["trees", "info", tree]) == 0
    assert capsys.readouterr().out == _golden(golden)


def test_trees_info_text(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["trees", "info", "o(a,a)", "--format", "text"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["tree", "o(a,a)"]
    assert ["tree_factorial", "3"] in [line.split() for line in lines]


def test_trees_enumerate_order_zero_matches_golden(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["trees", "enumerate", "--order", "0"]) == 0
    assert capsys.readouterr().out == _golden("trees_enumerate_order0.json")


def test_trees_enumerate_with_rule(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["trees", "enumerate", "--order", "2", "--rule", "a:1,b:0,root:1", "--format", "text"]) == 0
    assert capsys.readouterr().out == "o\no(a)\no(a(a))\n"


def test_series_expand_matches_golden(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["series", "expand", "--sde", str(OU_MEAN), "--order", "3", "--method", "trees"]) == 0
    assert capsys.readouterr().out == _golden("series_ou_mean_order3.json")


def test_series_expand_yaml_with_settings_default_method(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    (tmp_path / "exotic-bseries.toml").write_text('[series]\ndefault_method = "operator"\n', encoding="utf-8")
    yaml_path = FIXTURES / "sde" / "ou_mean.yaml"
    assert main(["series", "expand", "--sde", str(yaml_path), "--order", "3"]) == 0
    assert capsys.readouterr().out == _golden("series_ou_mean_order3.json")


def test_series_compare_agrees(capsys: pytest.CaptureFixture[str]) -> None:
    sde = FIXTURES / "sde" / "gbm_second_moment.json"
    assert main(["series", "compare", "--sde", str(sde), "--order", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["agree"] is True
    assert out["methods"] == ["trees", "multi", "operator"]
    # rate 2a + sigma^2 = 109/100
    assert out["series"]["coeffs"]["1"] == "109/100"


def test_series_compare_disagreement_exits_3(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    def broken(p: SdeProblem, order: int) -> TruncatedSeries:
        s = expand_by_operator(p, order)
        return TruncatedSeries(coeffs=s.coeffs[:-1] + (s.coeffs[-1] * 2,), mode=s.mode)

    monkeypatch.setitem(series_mod.EXPANDERS, "operator", broken)
    assert main(["series", "compare", "--sde", str(OU_MEAN), "--order", "2"]) == 3
    err = capsys.readouterr().err
    assert "error: methods trees and operator disagree at t^2" in err


def test_parse_errors_exit_2(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["trees", "info", "o(b#1(b#1))"]) == 2
    assert "degenerate" in capsys.readouterr().err

    assert main(["trees", "info", "o(a"]) == 2
    assert "rule children" in capsys.readouterr().err

    assert main(["trees", "info", "o(b#²,b#²)"]) == 2
    assert "rule INT" in capsys.readouterr().err

    assert main(["multi", "info", "a0"]) == 2
    assert capsys.readouterr().err.startswith("error: ")


def test_bad_inputs_exit_2(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["trees", "enumerate", "--order", "-1"]) == 2
    assert main(["trees", "enumerate", "--order", "1", "--rule", "c:1"]) == 2
    assert main(["series", "expand", "--sde", str(tmp_path / "missing.json"), "--order", "1"]) == 2

    bad = tmp_path / "bad.toml"
    bad.write_text("version =\n", encoding="utf-8")
    assert main(["--config", str(bad), "trees", "info", "o"]) == 2
    assert "Invalid TOML" in capsys.readouterr().err


def test_verify_passes(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["verify", "--max-order", "3"]) == 0
    reports = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(reports) == 11
    assert all(r["status"] == "pass" and r["max_order"] == 3 for r in reports)


def test_verify_text(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["verify", "--max-order", "2", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert all(line.startswith("PASS") for line in out.splitlines())


def test_multi_info_with_oracle(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["multi", "info", "b.2 a1^2 B(0,0)", "--oracle"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["populated"] is True
    assert out["symmetry_factor"] == 8
    assert out["phi"] == [
        {"tree": "o(a(a(b#1)),b#1)", "weight": "8"},
        {"tree": "o(a(b#1),a(b#1))", "weight": "4"},
    ]
    assert out["realization"] == {"3": "8/3"}
    assert out["oracle"] == {"o(a(a(b#1)),b#1)": 8, "o(a(b#1),a(b#1))": 4}
    assert out["oracle_agrees"] is True


def test_multi_info_unpopulated(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["multi", "info", "b.1", "--format", "text"]) == 0
    rows = [line.split() for line in capsys.readouterr().out.splitlines()]
    assert ["populated", "no"] in rows
    assert ["realization", "0"] in rows


def test_mc_agrees_with_series(capsys: pytest.CaptureFixture[str]) -> None:
    argv = [
        "mc",
        "--sde",
        str(OU_MEAN),
        "--t",
        "0.2",
        "--paths",
        "2000",
        "--step",
        "0.01",
        "--seed",
        "7",
        "--order",
        "4",
        "--closed-form",
        "ou_mean",
        "--a",
        "1",
        "--sigma",
        "0.5",
    ]
    assert main(argv) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "pass"
    assert out["difference"] <= out["tolerance"]
    assert out["estimate"]["paths"] == 2000
    assert out["estimate"]["metadata"]["seed"] == 7
    assert out["closed_form"]["name"] == "ou_mean"
    assert out["closed_form"]["value"] == pytest.approx(0.8187307530779818)
    assert out["series_value"] == pytest.approx(0.8187333333333333)
    assert out["problem"]["u0"] == "1"
    assert out["problem"]["beta"] == {"coeffs": ["1/2"], "kind": "poly"}


def test_mc_rejects_too_few_paths(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["mc", "--sde", str(OU_MEAN), "--t", "0.2", "--paths", "50", "--step", "0.01", "--seed", "1", "--order", "2"]
    assert main(argv) == 2
    assert "paths must be >= 100" in capsys.readouterr().err


def test_mc_closed_form_needs_parameters(capsys: pytest.CaptureFixture[str]) -> None:
    argv = [
        "mc", "--sde", str(OU_MEAN), "--t", "0.2", "--paths", "200", "--step", "0.01",
        "--seed", "1", "--order", "2", "--closed-form", "ou_mean",
    ]
    assert main(argv) == 2
    assert "--closed-form needs --a and --sigma" in capsys.readouterr().err


def test_mc_second_moment_float_problem_at_full_scale(capsys: pytest.CaptureFixture[str]) -> None:
    sde = FIXTURES / "sde" / "ou_second_moment_float.json"
    argv = [
        "mc", "--sde", str(sde), "--t", "0.2", "--paths", "100000", "--step", "0.001",
        "--seed", "3", "--order", "6", "--closed-form", "ou_second_moment", "--a", "1", "--sigma", "0.5",
    ]
    assert main(argv) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "pass"
    assert out["problem"]["mode"] == "float"
    assert out["series_value"] == pytest.approx(out["closed_form"]["value"], rel=1e-5)


def test_multi_info_respects_length_guard(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    (tmp_path / "exotic-bseries.toml").write_text("[multi]\nmax_length = 3\n", encoding="utf-8")
    assert main(["multi", "info", "b.2 a1^2 B(0,0)"]) == 2
    assert "length 4 > guard 3" in capsys.readouterr().err

    assert main(["multi", "info", "b.2 a0^2"]) == 0
    assert json.loads(capsys.readouterr().out)["phi"] == [{"tree": "o(a,a)", "weight": "2"}]
