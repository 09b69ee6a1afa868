"""Sorting of expressions, process typing, the monitor-to-type embedding,
coinductive subtyping and adequacy of processes for monitors."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

from .syntax import (
    ANY_SORT, END, Binary, Branch, Channel, Cond, End, Expr, In, Lit, MonitorPar, Name, Nil,
    OpCall, Out, Prefix, ProcessPar, Rec, Recv, Send, Sort, Sum, TIn, TOut, TypePar, Unary, Var,
    children, equal_regular, labels, threads_of, unfold_head, with_children,
)


class TypingError(Exception):
    pass


@dataclass
class Env:
    """Typing environment: sorts of expression variables and types of
    process variables."""

    expr_vars: dict[str, str] = field(default_factory=dict)
    proc_vars: dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------


class _Sorts:
    """Union-find over sort variables ('0, '1, ...) used to infer the sorts
    of receive binders from how they are used."""

    def __init__(self) -> None:
        self.parent: dict[str, str] = {}
        self.counter = itertools.count()

    def fresh(self) -> str:
        v = f"'{next(self.counter)}"
        self.parent[v] = v
        return v

    def find(self, s: str) -> str:
        while s in self.parent and self.parent[s] != s:
            s = self.parent[s]
        return s

    def unify(self, a: str, b: str, what: Expr) -> None:
        a, b = self.find(a), self.find(b)
        if a == b:
            return
        if a.startswith("'"):
            self.parent[a] = b
        elif b.startswith("'"):
            self.parent[b] = a
        elif ANY_SORT not in (a, b):
            raise TypingError(f"sort mismatch in {_show(what)}: {a} vs {b}")

    def resolve(self, s: str) -> str:
        s = self.find(s)
        return ANY_SORT if s.startswith("'") else s


def _show(e: Expr) -> str:
    from .surface import pretty_expr
    return pretty_expr(e)


_SIGNATURES = {
    "+": ("Int", "Int", "Int"),
    "-": ("Int", "Int", "Int"),
    "*": ("Int", "Int", "Int"),
    "<": ("Int", "Int", "Bool"),
    "&&": ("Bool", "Bool", "Bool"),
    "||": ("Bool", "Bool", "Bool"),
}


def _sort_expr(env: dict[str, str], e: Expr, sorts: _Sorts) -> str:
    if isinstance(e, Lit):
        return e.sort
    if isinstance(e, Name):
        if e.id not in env:
            raise TypingError(f"unbound variable {e.id}")
        return env[e.id]
    if isinstance(e, Unary):
        want = "Bool" if e.op == "not" else "Int"
        sorts.unify(_sort_expr(env, e.operand, sorts), want, e)
        return want
    if isinstance(e, Binary):
        left = _sort_expr(env, e.left, sorts)
        right = _sort_expr(env, e.right, sorts)
        if e.op == "==":
            sorts.unify(left, right, e)
            return "Bool"
        a, b, res = _SIGNATURES[e.op]
        sorts.unify(left, a, e)
        sorts.unify(right, b, e)
        return res
    raise TypingError(f"not an expression: {e!r}")


def type_expr(env: Env, e: Expr) -> str:
    """Sort of `e` under `env` (Int, Bool, Str, or `_` if unconstrained)."""
    sorts = _Sorts()
    return sorts.resolve(_sort_expr(dict(env.expr_vars), e, sorts))


# ---------------------------------------------------------------------------
# processes
# ---------------------------------------------------------------------------


def _meet(t1: Any, t2: Any) -> Any:
    """Intersection of two input types (typing of external choice)."""
    h1, h2 = unfold_head(t1), unfold_head(t2)
    if not (isinstance(h1, TIn) and isinstance(h2, TIn)):
        raise TypingError("both arms of an external choice must start with an input")
    if h1.partner != h2.partner:
        raise TypingError("external choice between different partners")
    shared = set(h1.labels) & set(h2.labels)
    if shared:
        raise TypingError(f"label(s) {', '.join(sorted(shared))} offered twice in an external choice")
    return TIn(h1.partner, h1.branches + h2.branches)


def _join(t1: Any, t2: Any) -> Any:
    """Union of two output types (typing of a conditional).  Identical arms
    give their common type."""
    if equal_regular(t1, t2):
        return t1
    h1, h2 = unfold_head(t1), unfold_head(t2)
    if not (isinstance(h1, TOut) and isinstance(h2, TOut)):
        raise TypingError("the arms of a conditional must both start with an output")
    if h1.partner != h2.partner:
        raise TypingError("conditional between different partners")
    branches = list(h1.branches)
    for b in h2.branches:
        other = h1.branch(b.label)
        if other is None:
            branches.append(b)
        elif other.sort != b.sort or not equal_regular(other.cont, b.cont):
            raise TypingError(f"label {b.label} used with different behaviours in a conditional")
    return TOut(h1.partner, tuple(branches))


def _resolve_sorts(t: Any, sorts: _Sorts) -> Any:
    if isinstance(t, Prefix):
        bs = tuple(
            Branch(b.label, Sort(tuple(sorts.resolve(p) for p in b.sort.parts)),
                   _resolve_sorts(b.cont, sorts))
            for b in t.branches)
        return type(t)(t.partner, bs)
    kids = children(t)
    if not kids:
        return t
    return with_children(t, tuple(_resolve_sorts(k, sorts) for k in kids))


def type_process(p: Any, chan: Channel | None = None, env: Env | None = None) -> Any:
    """The unique type of a single-threaded process at channel `chan`.

    Receive binders get their sorts from how they are used; a binder whose
    sort is never constrained gets the wildcard sort `_`.
    """
    env = env or Env()
    sorts = _Sorts()
    used: list[Channel] = [chan] if chan is not None else []

    def check_chan(c: Channel) -> None:
        if not used:
            used.append(c)
        elif used[0] != c:
            raise TypingError(f"channel {c} used where {used[0]} was expected")

    def go(p: Any, gamma: dict[str, str], pvars: dict[str, Any]) -> Any:
        if isinstance(p, Nil):
            return END
        if isinstance(p, OpCall):
            return go(p.cont, gamma, pvars)
        if isinstance(p, Var):
            if p.name not in pvars:
                raise TypingError(f"unbound process variable {p.name}")
            return pvars[p.name]
        if isinstance(p, Rec):
            return Rec(p.var, go(p.body, gamma, {**pvars, p.var: Var(p.var)}))
        if isinstance(p, Recv):
            check_chan(p.chan)
            fresh = {x: sorts.fresh() for x in p.binders}
            cont = go(p.cont, {**gamma, **fresh}, pvars)
            return TIn(None, (Branch(p.label, Sort(tuple(fresh[x] for x in p.binders)), cont),))
        if isinstance(p, Send):
            check_chan(p.chan)
            parts = tuple(_sort_expr(gamma, a, sorts) for a in p.args)
            return TOut(None, (Branch(p.label, Sort(parts), go(p.cont, gamma, pvars)),))
        if isinstance(p, Sum):
            return _meet(go(p.left, gamma, pvars), go(p.right, gamma, pvars))
        if isinstance(p, Cond):
            sorts.unify(_sort_expr(gamma, p.guard, sorts), "Bool", p.guard)
            return _join(go(p.then, gamma, pvars), go(p.orelse, gamma, pvars))
        raise TypingError(f"not a single-threaded process: {p!r}")

    pvars0 = dict(env.proc_vars)
    t = go(p, dict(env.expr_vars), pvars0)
    return _resolve_sorts(t, sorts)


def type_par(pp: ProcessPar | Any, chan: Channel | None = None) -> TypePar:
    threads = threads_of(pp)
    if chan is None:
        from .syntax import channels
        cs = channels(pp)
        if len(cs) > 1:
            raise TypingError("parallel threads use different channels")
        chan = next(iter(cs), None)
    types = tuple(type_process(t, chan) for t in threads)
    try:
        return TypePar(types)
    except ValueError as exc:
        raise TypingError(str(exc)) from exc


# ---------------------------------------------------------------------------
# monitors as types, subtyping
# ---------------------------------------------------------------------------


def mt(m: Any) -> Any:
    """Read a single-threaded monitor as a process type."""
    if isinstance(m, In):
        return TIn(m.partner, tuple(Branch(b.label, b.sort, mt(b.cont)) for b in m.branches))
    if isinstance(m, Out):
        return TOut(m.partner, tuple(Branch(b.label, b.sort, mt(b.cont)) for b in m.branches))
    if isinstance(m, Rec):
        return Rec(m.var, mt(m.body))
    if isinstance(m, MonitorPar):
        return TypePar(tuple(mt(t) for t in m.threads))
    return m


def _partners_match(a: str | None, b: str | None) -> bool:
    return a is None or b is None or a == b


def subtype(a: Any, b: Any) -> bool:
    """Coinductive subtyping of process types.

    Pairs are explored depth-first with an assumption set; a pair seen
    before is assumed to hold.  Inputs: the subtype may offer more labels.
    Outputs: the subtype may use fewer.  Sorts must agree on every shared
    label.
    """
    assumed: set[tuple[Any, Any]] = set()
    todo = [(a, b)]
    while todo:
        x, y = todo.pop()
        x, y = unfold_head(x), unfold_head(y)
        if (x, y) in assumed:
            continue
        assumed.add((x, y))
        if isinstance(x, End) or isinstance(y, End):
            if not (isinstance(x, End) and isinstance(y, End)):
                return False
            continue
        if isinstance(x, Var) or isinstance(y, Var):
            if x != y:
                return False
            continue
        if type(x) is not type(y) or not isinstance(x, (TIn, TOut)):
            return False
        if not _partners_match(x.partner, y.partner):
            return False
        small, big = (y, x) if isinstance(x, TIn) else (x, y)
        for sb in small.branches:
            bb = big.branch(sb.label)
            if bb is None or not sb.sort.compatible(bb.sort):
                return False
            pair = (bb.cont, sb.cont) if isinstance(x, TIn) else (sb.cont, bb.cont)
            todo.append(pair)
    return True


# ---------------------------------------------------------------------------
# adequacy
# ---------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def adequate_single(p: Any, m: Any) -> bool:
    """P is adequate for M: P has a type that is a subtype of mt(M)."""
    try:
        t = type_process(p)
    except TypingError:
        return False
    return subtype(t, mt(m))


class Inadequate(Exception):
    def __init__(self, message: str, unmatched: tuple = ()):
        self.unmatched = unmatched
        super().__init__(message)


class AmbiguousMatching(Inadequate):
    pass


@dataclass(frozen=True)
class Matching:
    """Pairs (process thread index, monitor thread index).  Threads that are
    equivalent to 0 / end are left out; they are neutral in a parallel."""

    pairs: tuple[tuple[int, int], ...]


@lru_cache(maxsize=65536)
def _is_end_type(p: Any) -> bool:
    try:
        return isinstance(unfold_head(type_process(p)), End)
    except TypingError:
        return False


def match_threads(pp: Any, mm: Any) -> Matching:
    """Decompose P ∝ M into matched single-threaded pairs.

    Each non-trivial process thread must be adequate for exactly one
    monitor thread and vice versa.
    """
    ps = [(i, t) for i, t in enumerate(threads_of(pp)) if not _is_end_type(t)]
    ms = [(j, m) for j, m in enumerate(threads_of(mm)) if not isinstance(unfold_head(m), End)]
    if len(ps) != len(ms):
        raise Inadequate(f"{len(ps)} process thread(s) for {len(ms)} monitor thread(s)")
    cand = {i: [j for j, m in ms if adequate_single(p, m)] for i, p in ps}
    back: dict[int, list[int]] = {j: [] for j, _ in ms}
    for i, js in cand.items():
        for j in js:
            back[j].append(i)
    for i, js in cand.items():
        if not js:
            raise Inadequate(f"process thread {i} fits no monitor thread", (i,))
        if len(js) > 1:
            raise AmbiguousMatching(f"process thread {i} fits monitor threads {js}", (i,))
    for j, is_ in back.items():
        if not is_:
            raise Inadequate(f"monitor thread {j} is not implemented", (j,))
        if len(is_) > 1:
            raise AmbiguousMatching(f"monitor thread {j} fits process threads {is_}", (j,))
    return Matching(tuple(sorted((i, js[0]) for i, js in cand.items())))


def adequate(pp: Any, mm: Any) -> Matching:
    """Alias of `match_threads`: P ∝ M, returning the thread matching."""
    return match_threads(pp, mm)


@lru_cache(maxsize=65536)
def is_adequate(pp: Any, mm: Any) -> bool:
    try:
        match_threads(pp, mm)
    except Inadequate:
        return False
    return True
