"""Graphviz DOT output for trees and representations.

Sun centres are drawn as filled boxes, the convention used for pendant suns
in drawings of gpps.  The anchor of a single-vertex representation is a
double circle.
"""
from __future__ import annotations

from .gpp import GppTree, expand_with_index
from .tree import Tree


def tree_to_dot(tree: Tree, name: str = "T", boxes: frozenset[int] | set[int] = frozenset(),
                highlight: frozenset[int] | set[int] = frozenset()) -> str:
    lines = [f"graph {name} {{", "  node [shape=circle, label=\"\", width=0.2];"]
    for v in range(tree.n):
        attrs = {}
        if v in boxes:
            attrs.update(shape="box", style="filled", fillcolor="black")
        if v in highlight:
            attrs["peripheries"] = "2"
            attrs.setdefault("shape", "circle")
        body = ", ".join(f"{k}={val}" for k, val in attrs.items())
        lines.append(f"  {v} [{body}];" if body else f"  {v};")
    for u, v in tree.edges:
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def rep_to_dot(rep: GppTree, name: str = "T") -> str:
    ex = expand_with_index(rep)
    anchor = {ex.index[rep.anchor()]} if len(rep.skeleton) == 1 else set()
    return tree_to_dot(ex.tree, name, set(ex.sun_centers), anchor)
