"""SDE spec files.

JSON is canonical; ``.yaml``/``.yml`` files are read with PyYAML. Example::

    {"u0": "1", "mode": "exact",
     "alpha": {"kind": "poly", "coeffs": ["0", "-1"]},
     "beta":  {"kind": "poly", "coeffs": ["1/2"]},
     "f":     {"kind": "poly", "coeffs": ["0", "1"]}}

Numbers may be given as rational strings ("-3/4") or JSON numbers; in exact
mode JSON floats are rejected so nothing is silently rounded.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ModeError, SpecFileError
from .jets import FunctionSpec, Mode, Scalar, to_scalar
from .series import SdeProblem


_TOP_KEYS = {"u0", "mode", "alpha", "beta", "f"}
_KIND_KEYS = {
    "poly": {"kind", "coeffs"},
    "expscale": {"kind", "c", "lambda"},
    "derivs": {"kind", "values"},
}


def _expect_mapping(path: Path | None, value: Any, *, ctx: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise SpecFileError(path=path, message=f"{ctx} must be an object")
    return value


def _expect_list(path: Path | None, value: Any, *, ctx: str) -> list[Any]:
    if not isinstance(value, list):
        raise SpecFileError(path=path, message=f"{ctx} must be a list")
    return value


def _expect_scalar(path: Path | None, value: Any, mode: Mode, *, ctx: str) -> Scalar:
    try:
        return to_scalar(value, mode)
    except ModeError as e:
        raise SpecFileError(path=path, message=f"{ctx}: {e}") from e


def _reject_unknown(path: Path | None, tbl: Mapping[str, Any], allowed: set[str], *, ctx: str) -> None:
    unknown = sorted(set(tbl) - allowed)
    if unknown:
        raise SpecFileError(path=path, message=f"{ctx}: unknown keys: {', '.join(unknown)}")


def function_spec_from_dict(path: Path | None, data: Any, mode: Mode, *, ctx: str) -> FunctionSpec:
    m = _expect_mapping(path, data, ctx=ctx)
    kind = m.get("kind")
    if kind not in _KIND_KEYS:
        raise SpecFileError(path=path, message=f"{ctx}.kind must be one of {sorted(_KIND_KEYS)}")
    _reject_unknown(path, m, _KIND_KEYS[kind], ctx=ctx)

    if kind == "poly":
        coeffs = _expect_list(path, m.get("coeffs"), ctx=f"{ctx}.coeffs")
        return FunctionSpec.poly(
            _expect_scalar(path, c, mode, ctx=f"{ctx}.coeffs[{i}]") for i, c in enumerate(coeffs)
        )
    if kind == "expscale":
        if mode != "float":
            raise SpecFileError(path=path, message=f"{ctx}: expscale requires mode \"float\"")
        for key in ("c", "lambda"):
            if key not in m:
                raise SpecFileError(path=path, message=f"{ctx}.{key} is required")
        return FunctionSpec.expscale(
            _expect_scalar(path, m["c"], mode, ctx=f"{ctx}.c"),
            _expect_scalar(path, m["lambda"], mode, ctx=f"{ctx}.lambda"),
        )
    values = _expect_list(path, m.get("values"), ctx=f"{ctx}.values")
    return FunctionSpec.derivs(
        _expect_scalar(path, v, mode, ctx=f"{ctx}.values[{i}]") for i, v in enumerate(values)
    )


def problem_from_dict(data: Any, *, path: Path | None = None) -> SdeProblem:
    m = _expect_mapping(path, data, ctx="top-level")
    _reject_unknown(path, m, _TOP_KEYS, ctx="top-level")
    missing = sorted({"u0", "alpha", "beta", "f"} - set(m))
    if missing:
        raise SpecFileError(path=path, message=f"missing required keys: {', '.join(missing)}")

    mode = m.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise SpecFileError(path=path, message=f"mode must be \"exact\" or \"float\", got {mode!r}")

    return SdeProblem(
        alpha=function_spec_from_dict(path, m["alpha"], mode, ctx="alpha"),
        beta=function_spec_from_dict(path, m["beta"], mode, ctx="beta"),
        f=function_spec_from_dict(path, m["f"], mode, ctx="f"),
        u0=_expect_scalar(path, m["u0"], mode, ctx="u0"),
        mode=mode,
    )


def problem_to_dict(p: SdeProblem) -> dict[str, Any]:
    return {
        "alpha": p.alpha.to_json(),
        "beta": p.beta.to_json(),
        "f": p.f.to_json(),
        "mode": p.mode,
        "u0": str(p.u0) if p.mode == "exact" else repr(p.u0),
    }


def load_problem(path: str | Path) -> SdeProblem:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecFileError(path=p, message=f"unable to read file: {e}") from e

    if p.suffix.lower() in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise SpecFileError(path=p, message=f"invalid YAML: {e}") from e
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecFileError(path=p, message=f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e
    return problem_from_dict(data, path=p)
