"""Renderers for `trees info`, `trees enumerate` and `multi info`."""

from __future__ import annotations

import json
from typing import Any

from .growth import (
    FertilityRule,
    cm_weight,
    enumerate_trees,
    realization_coefficient,
    symmetry_factor,
    tree_factorial,
)
from .multiindex import (
    DEFAULT_MAX_LEGS,
    DEFAULT_MAX_LENGTH,
    FeynmanMultiIndex,
    contraction_oracle,
    counting_map,
    multi_gradings,
    phi_expand,
    realization_multi,
    symmetry_factor_multi,
)
from .trees import ExoticTree, gradings


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _text(pairs: list[tuple[str, Any]]) -> str:
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in pairs)


def tree_info(t: ExoticTree) -> dict[str, Any]:
    gr = gradings(t)
    return {
        "alpha_count": gr.alpha_count,
        "automorphisms": symmetry_factor(t),
        "beta_count": gr.beta_count,
        "cm_weight": str(cm_weight(t)),
        "counting_map": str(counting_map(t)),
        "edge_count": gr.edge_count,
        "exotic_order": gr.exotic_order,
        "realization_coefficient": str(realization_coefficient(t)),
        "tree": t.text,
        "tree_factorial": str(tree_factorial(t)),
        "vertex_count": gr.vertex_count,
    }


def build_tree_info_output(t: ExoticTree, *, fmt: str = "json") -> str:
    info = tree_info(t)
    if fmt == "json":
        return canonical_json(info)
    order = (
        "tree",
        "vertex_count",
        "alpha_count",
        "beta_count",
        "exotic_order",
        "edge_count",
        "automorphisms",
        "tree_factorial",
        "cm_weight",
        "realization_coefficient",
        "counting_map",
    )
    return _text([(k, info[k]) for k in order])


def build_enumerate_output(max_order: int, rule: FertilityRule | None, *, fmt: str = "json") -> str:
    levels = enumerate_trees(max_order, rule)
    if fmt == "json":
        return canonical_json(
            {
                "levels": {
                    str(k): [{"counting_map": str(counting_map(t)), "tree": t.text} for t in level]
                    for k, level in enumerate(levels)
                },
                "order": max_order,
                "rule": None if rule is None else str(rule),
            }
        )
    lines: list[str] = []
    for level in levels:
        lines.extend(t.text for t in level)
    return "\n".join(lines) + "\n" if lines else ""


def multi_info(
    g: FeynmanMultiIndex,
    *,
    oracle: bool = False,
    max_legs: int = DEFAULT_MAX_LEGS,
    max_length: int = DEFAULT_MAX_LENGTH,
) -> dict[str, Any]:
    gr = multi_gradings(g)
    out: dict[str, Any] = {
        "index": str(g),
        "length": gr.length,
        "populated": gr.populated,
        "psi_legs": gr.psi_legs,
        "symmetry_factor": symmetry_factor_multi(g),
        "tilde_legs": gr.tilde_legs,
    }
    if not gr.populated:
        out["realization"] = {}
        return out

    phi = phi_expand(g, max_length=max_length)
    out["phi"] = [{"tree": t.text, "weight": str(w)} for t, w in sorted(phi.items(), key=lambda kv: kv[0].key)]
    out["realization"] = {str(k): str(c) for k, c in realization_multi(g, max_length=max_length).items()}
    if oracle:
        counts = contraction_oracle(g, max_legs=max_legs)
        out["oracle"] = {k.decode("utf-8"): n for k, n in counts.items()}
        out["oracle_agrees"] = counts == {t.key: w for t, w in phi.items()}
    return out


def build_multi_info_output(
    g: FeynmanMultiIndex,
    *,
    oracle: bool = False,
    max_legs: int = DEFAULT_MAX_LEGS,
    max_length: int = DEFAULT_MAX_LENGTH,
    fmt: str = "json",
) -> str:
    info = multi_info(g, oracle=oracle, max_legs=max_legs, max_length=max_length)
    if fmt == "json":
        return canonical_json(info)
    pairs: list[tuple[str, Any]] = [
        ("index", info["index"]),
        ("length", info["length"]),
        ("psi_legs", info["psi_legs"]),
        ("tilde_legs", info["tilde_legs"]),
        ("populated", "yes" if info["populated"] else "no"),
        ("symmetry_factor", info["symmetry_factor"]),
    ]
    for entry in info.get("phi", []):
        pairs.append(("phi", f"{entry['weight']} * {entry['tree']}"))
    poly = info["realization"]
    pairs.append(("realization", " + ".join(f"{c}*t^{k}" for k, c in poly.items()) or "0"))
    if oracle and "oracle" in info:
        pairs.append(("oracle_agrees", "yes" if info["oracle_agrees"] else "no"))
    return _text(pairs)
