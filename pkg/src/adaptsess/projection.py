"""Projection of global types onto participants, with merging of inputs for
participants not involved in a choice."""
from __future__ import annotations

from .syntax import (
    END, Branch, Comm, End, GlobalPar, In, MonitorPar, Out, Rec, Var, equal_regular,
    free_vars, pa, threads_of, unfold_head,
)


class ProjectionUndefined(Exception):
    def __init__(self, participant: str, path: str, reason: str):
        self.participant = participant
        self.path = path or "/"
        self.reason = reason
        super().__init__(f"projection onto {participant} undefined at {self.path}: {reason}")


def project(g, r: str, _path: str = ""):
    """Project a single-threaded global type onto participant `r`."""
    if isinstance(g, (End, Var)):
        return g
    if isinstance(g, Rec):
        if r not in pa(g.body):
            return END
        body = project(g.body, r, f"{_path}/rec {g.var}")
        if body == Var(g.var):
            return END
        if g.var not in free_vars(body):
            return body
        return Rec(g.var, body)
    if not isinstance(g, Comm):
        raise TypeError(f"not a global type: {g!r}")

    def cont(b: Branch):
        return project(b.cont, r, f"{_path}/{b.label}")

    if r == g.receiver:
        return In(g.sender, tuple(Branch(b.label, b.sort, cont(b)) for b in g.branches))
    if r == g.sender:
        return Out(g.receiver, tuple(Branch(b.label, b.sort, cont(b)) for b in g.branches))

    projs = [cont(b) for b in g.branches]
    # equal continuations: pick the first
    if all(equal_regular(projs[0], p) for p in projs[1:]):
        return projs[0]
    # otherwise all continuations must be inputs from one partner, merged
    heads = [unfold_head(p) for p in projs]
    if not all(isinstance(h, In) for h in heads):
        raise ProjectionUndefined(
            r, _path, f"continuations of {g.sender} -> {g.receiver} differ and are not all inputs")
    partners = {h.partner for h in heads}
    if len(partners) != 1:
        raise ProjectionUndefined(
            r, _path, f"merged inputs come from different partners {sorted(partners)}")
    merged = [b for h in heads for b in h.branches]
    seen: set[str] = set()
    for b in merged:
        if b.label in seen:
            raise ProjectionUndefined(r, _path, f"label {b.label} occurs in several merged inputs")
        seen.add(b.label)
    return In(partners.pop(), tuple(merged))


def project_par(g: GlobalPar, r: str) -> MonitorPar:
    """Parallel of the per-thread projections, dropping threads that
    project to end."""
    threads = []
    for i, th in enumerate(threads_of(g)):
        m = project(th, r, f"/thread {i}")
        if not isinstance(m, End):
            threads.append(m)
    return MonitorPar(tuple(threads))


def projections_defined(g: GlobalPar) -> bool:
    """Well-formedness by projection: defined for every participant."""
    try:
        for r in pa(g):
            project_par(g, r)
    except ProjectionUndefined:
        return False
    return True
