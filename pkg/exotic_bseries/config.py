from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Any

from . import paths
from .errors import ConfigParseError, ConfigValidationError
from .models import McSettings, MultiSettings, SeriesSettings, Settings, VerifySettings


try:  # Python 3.11+
    import tomllib as _tomllib  # type: ignore
except ModuleNotFoundError:  # pragma: no cover (dev envs < 3.11)
    import tomli as _tomllib  # type: ignore


_SERIES_METHODS = {"trees", "multi", "operator"}


def _load_toml(path: Path) -> dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ConfigValidationError(path=path, message="file not found") from e
    except OSError as e:
        raise ConfigValidationError(path=path, message=f"unable to read file: {e}") from e

    try:
        data = _tomllib.loads(text)
    except Exception as e:
        # tomllib/tomli both raise TOMLDecodeError with msg/lineno/colno.
        msg = getattr(e, "msg", str(e))
        lineno = getattr(e, "lineno", None)
        colno = getattr(e, "colno", None)
        raise ConfigParseError(path=path, message=str(msg), lineno=lineno, colno=colno) from e

    if not isinstance(data, dict):
        raise ConfigValidationError(path=path, message="top-level TOML must be a table")
    return data


def _unknown_keys_message(unknown: set[str]) -> str:
    keys = ", ".join(sorted(unknown))
    return f"unknown keys: {keys}"


def _optional_table(path: Path, value: Any, where: str) -> dict[str, Any] | None:
    if value is None:
        return None
    if not isinstance(value, dict):
        raise ConfigValidationError(path=path, message=f"{where}: expected table")
    return value


def _reject_unknown(path: Path, tbl: dict[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(tbl.keys()) - allowed
    if unknown:
        raise ConfigValidationError(path=path, message=f"{where}: {_unknown_keys_message(unknown)}")


def _require_int(path: Path, value: Any, where: str, *, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigValidationError(path=path, message=f"{where}: expected integer")
    if minimum is not None and value < minimum:
        raise ConfigValidationError(path=path, message=f"{where}: expected >= {minimum}, got {value}")
    return value


def _require_float(path: Path, value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(path=path, message=f"{where}: expected number")
    if value < 0:
        raise ConfigValidationError(path=path, message=f"{where}: expected non-negative number")
    return float(value)


def _require_str(path: Path, value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigValidationError(path=path, message=f"{where}: expected string")
    return value


def load_settings(path: Path | None = None) -> Settings:
    """Load + validate exotic-bseries.toml; defaults when no file is found."""

    p = path or paths.find_config()
    if p is None:
        return Settings()
    return _parse_settings(p, _load_toml(p))


def _parse_settings(path: Path, data: dict[str, Any]) -> Settings:
    _reject_unknown(path, data, {"version", "mc", "verify", "series", "multi"}, "top-level")

    version = _require_int(path, data.get("version", 1), "version")
    if version != 1:
        raise ConfigValidationError(path=path, message=f"version: expected 1, got {version}")

    mc = McSettings()
    mc_tbl = _optional_table(path, data.get("mc"), "mc")
    if mc_tbl is not None:
        _reject_unknown(path, mc_tbl, {"bias_constant", "block_size", "min_paths"}, "mc")
        if "bias_constant" in mc_tbl:
            mc = replace(mc, bias_constant=_require_float(path, mc_tbl["bias_constant"], "mc.bias_constant"))
        if "block_size" in mc_tbl:
            mc = replace(mc, block_size=_require_int(path, mc_tbl["block_size"], "mc.block_size", minimum=1))
        if "min_paths" in mc_tbl:
            mc = replace(mc, min_paths=_require_int(path, mc_tbl["min_paths"], "mc.min_paths", minimum=2))

    verify = VerifySettings()
    v_tbl = _optional_table(path, data.get("verify"), "verify")
    if v_tbl is not None:
        _reject_unknown(path, v_tbl, {"oracle_max_legs", "multi_max_length", "random_problems", "seed"}, "verify")
        if "oracle_max_legs" in v_tbl:
            verify = replace(
                verify,
                oracle_max_legs=_require_int(path, v_tbl["oracle_max_legs"], "verify.oracle_max_legs", minimum=0),
            )
        if "multi_max_length" in v_tbl:
            verify = replace(
                verify,
                multi_max_length=_require_int(path, v_tbl["multi_max_length"], "verify.multi_max_length", minimum=1),
            )
        if "random_problems" in v_tbl:
            verify = replace(
                verify,
                random_problems=_require_int(path, v_tbl["random_problems"], "verify.random_problems", minimum=0),
            )
        if "seed" in v_tbl:
            verify = replace(verify, seed=_require_int(path, v_tbl["seed"], "verify.seed"))

    series = SeriesSettings()
    s_tbl = _optional_table(path, data.get("series"), "series")
    if s_tbl is not None:
        _reject_unknown(path, s_tbl, {"default_method"}, "series")
        if "default_method" in s_tbl:
            method = _require_str(path, s_tbl["default_method"], "series.default_method")
            if method not in _SERIES_METHODS:
                raise ConfigValidationError(
                    path=path,
                    message=f"series.default_method: expected one of {sorted(_SERIES_METHODS)}, got {method!r}",
                )
            series = replace(series, default_method=method)

    multi = MultiSettings()
    m_tbl = _optional_table(path, data.get("multi"), "multi")
    if m_tbl is not None:
        _reject_unknown(path, m_tbl, {"max_length"}, "multi")
        if "max_length" in m_tbl:
            multi = replace(multi, max_length=_require_int(path, m_tbl["max_length"], "multi.max_length", minimum=1))

    return Settings(version=version, mc=mc, verify=verify, series=series, multi=multi)
