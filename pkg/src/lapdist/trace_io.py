"""Line-delimited JSON traces of a transform run, and their replay.

A trace file holds a header record (kind "initial": edge list and starting
representation), one record per step and a footer (kind "final": the
final representation and its expanded edge list).
"""
from __future__ import annotations

import json
from typing import IO, Iterable

from .gpp import Gpp, GppTree, expand
from .transforms import TransformStep, Trace, replay
from .tree import Tree, canonical_code, from_edge_list


def rep_to_record(rep: GppTree) -> dict:
    return {
        "n": rep.n_total,
        "skeleton": {str(v): list(nb) for v, nb in sorted(rep.skeleton.items())},
        "gpps": {str(v): [[g.q, g.r] for g in gs] for v, gs in sorted(rep.pendants.items())},
    }


def rep_from_record(rec: dict) -> GppTree:
    skeleton = {int(v): tuple(nb) for v, nb in rec["skeleton"].items()}
    pend = {int(v): tuple(Gpp(q, r) for q, r in gs) for v, gs in rec["gpps"].items()}
    rep = GppTree(skeleton, pend, int(rec["n"]))
    rep.validate()
    return rep


def step_to_record(index: int, step: TransformStep) -> dict:
    return {
        "step_index": index,
        "kind": step.kind,
        "vertex": step.vertex,
        "before": step.before,
        "after": step.after,
        "sigma_before": step.sigma_before,
        "sigma_after": step.sigma_after,
        "args": step.args,
        "note": step.note,
    }


def step_from_record(rec: dict) -> TransformStep:
    return TransformStep(
        rec["kind"], rec["vertex"], rec["before"], rec["after"],
        rec.get("sigma_before"), rec.get("sigma_after"), rec.get("args") or {}, rec.get("note", ""),
    )


def trace_to_records(trace: Trace) -> list[dict]:
    head = {
        "kind": "initial",
        "n": trace.initial.n,
        "edges": [list(e) for e in trace.initial.edges],
        "rep": rep_to_record(trace.initial_rep),
    }
    final_tree = expand(trace.final)
    tail = {
        "kind": "final",
        "rep": rep_to_record(trace.final),
        "render": trace.final.render(),
        "edges": [list(e) for e in final_tree.edges],
        "canonical": canonical_code(final_tree).decode(),
    }
    return [head] + [step_to_record(i, s) for i, s in enumerate(trace.steps)] + [tail]


def write_trace(trace: Trace, fh: IO[str]) -> None:
    for rec in trace_to_records(trace):
        fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_trace(lines: Iterable[str]) -> Trace:
    recs = [json.loads(line) for line in lines if line.strip()]
    if not recs or recs[0].get("kind") != "initial" or recs[-1].get("kind") != "final":
        raise ValueError("trace must start with an 'initial' record and end with a 'final' record")
    head, tail = recs[0], recs[-1]
    initial = from_edge_list(head["n"], head["edges"])
    steps = [step_from_record(r) for r in recs[1:-1]]
    return Trace(initial, rep_from_record(head["rep"]), steps, rep_from_record(tail["rep"]))


def replay_trace(trace: Trace, verify: bool = False) -> tuple[GppTree, Tree]:
    """Re-run the primitive steps; returns the final representation and its tree.

    Raises AssertionError when the replay diverges from the record or ends
    somewhere other than the recorded final representation.
    """
    rep = replay(trace.initial_rep, trace.steps, verify=verify)
    tree = expand(rep)
    if canonical_code(tree) != canonical_code(expand(trace.final)):
        raise AssertionError("replayed final tree differs from the recorded one")
    return rep, tree
