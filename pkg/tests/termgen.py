"""Seeded random generators of well-formed terms of every syntactic
category, shared by the round-trip and property tests."""
from __future__ import annotations

import itertools
import random
import string

from adaptsess.syntax import (
    END, NIL, Binary, Branch, Comm, Cond, GlobalPar, In, Lit, MonitorPar, Name, OpCall, Out,
    ProcessPar, Rec, Recv, Send, SessionChan, Sort, Sum, TIn, TOut, TypePar, Unary, UserChan, Var,
)

PARTICIPANTS = ("p", "q", "r", "s")
SORT_NAMES = ("Int", "Bool", "Str", "Item", "Date")
BINDER_NAMES = ("u", "w", "loop", "again")
VAR_NAMES = ("x", "y1", "amount", "item")


class Labels:
    """Fresh label supply; labels are unique within one generated term."""

    def __init__(self, rng: random.Random) -> None:
        self.counter = itertools.count()
        self.rng = rng

    def __call__(self) -> str:
        n = next(self.counter)
        base = self.rng.choice(("l", "msg", "Req", "ok"))
        if self.rng.random() < 0.1:
            return f"{base}{n}#{self.rng.randint(1, 3)}"
        return f"{base}{n}"


def gen_sort(rng: random.Random, wildcard: bool = False) -> Sort:
    pool = SORT_NAMES + (("_",) if wildcard else ())
    return Sort.of(*(rng.choice(pool) for _ in range(rng.randint(0, 2))))


def gen_string(rng: random.Random) -> str:
    alphabet = string.ascii_letters + " \"\\é"
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 5)))


def gen_expr(rng: random.Random, depth: int = 3, names: tuple[str, ...] = VAR_NAMES):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        kind = rng.randrange(4 if names else 3)
        if kind == 0:
            return Lit.of(rng.randint(-20, 20))
        if kind == 1:
            return Lit.of(rng.random() < 0.5)
        if kind == 2:
            return Lit.of(gen_string(rng))
        return Name(rng.choice(names))
    if roll < 0.5:
        return Unary(rng.choice(("not", "-")), gen_expr(rng, depth - 1, names))
    op = rng.choice(("+", "-", "*", "<", "==", "&&", "||"))
    return Binary(op, gen_expr(rng, depth - 1, names), gen_expr(rng, depth - 1, names))


def _n_branches(rng: random.Random) -> int:
    return rng.choice((1, 1, 1, 2, 2, 3))


def gen_global_thread(rng: random.Random, labels: Labels, depth: int = 4,
                      bound: tuple[str, ...] = (), guarded: bool = True):
    if guarded and (depth <= 0 or rng.random() < 0.2):
        if bound and rng.random() < 0.7:
            return Var(rng.choice(bound))
        return END
    if guarded and rng.random() < 0.25:
        v = rng.choice(BINDER_NAMES) + str(len(bound))
        return Rec(v, gen_global_thread(rng, labels, depth, bound + (v,), guarded=False))
    p, q = rng.sample(PARTICIPANTS, 2)
    branches = tuple(
        Branch(labels(), gen_sort(rng), gen_global_thread(rng, labels, depth - 1, bound))
        for _ in range(_n_branches(rng)))
    return Comm(p, q, branches)


def gen_global(rng: random.Random, threads: int | None = None) -> GlobalPar:
    labels = Labels(rng)
    n = threads or rng.randint(1, 3)
    return GlobalPar(tuple(gen_global_thread(rng, labels) for _ in range(n)))


def gen_local_thread(rng: random.Random, labels: Labels, depth: int = 4,
                     bound: tuple[str, ...] = (), guarded: bool = True, types: bool = False,
                     partners: tuple = PARTICIPANTS, max_branches: int = 3):
    if guarded and (depth <= 0 or rng.random() < 0.2):
        if bound and rng.random() < 0.7:
            return Var(rng.choice(bound))
        return END
    if guarded and rng.random() < 0.25:
        v = rng.choice(BINDER_NAMES) + str(len(bound))
        return Rec(v, gen_local_thread(rng, labels, depth, bound + (v,), False, types,
                                       partners, max_branches))
    cls = (TIn, TOut) if types else (In, Out)
    ctor = rng.choice(cls)
    partner = rng.choice(partners)
    n = min(_n_branches(rng), max_branches)
    branches = tuple(
        Branch(labels(), gen_sort(rng, wildcard=types),
               gen_local_thread(rng, labels, depth - 1, bound, True, types, partners,
                                max_branches))
        for _ in range(n))
    return ctor(partner, branches)


def gen_monitor(rng: random.Random, threads: int | None = None, **kw) -> MonitorPar:
    labels = Labels(rng)
    n = threads if threads is not None else rng.randint(1, 3)
    return MonitorPar(tuple(gen_local_thread(rng, labels, **kw) for _ in range(n)))


def gen_type(rng: random.Random) -> TypePar:
    labels = Labels(rng)
    n = rng.randint(1, 3)
    return TypePar(tuple(gen_local_thread(rng, labels, types=True,
                                          partners=PARTICIPANTS + (None,))
                         for _ in range(n)))


def gen_process_thread(rng: random.Random, labels: Labels, chan, depth: int = 4,
                       bound: tuple[str, ...] = (), names: tuple[str, ...] = (),
                       guarded: bool = True, ops: tuple[str, ...] = ("w", "log")):
    """A closed, guarded process on one channel.  Expressions only use
    names bound by enclosing receives."""

    def again(d: int, g: bool = True):
        return gen_process_thread(rng, labels, chan, d, bound, names, g, ops)

    roll = rng.random()
    if guarded and (depth <= 0 or roll < 0.15):
        if bound and rng.random() < 0.7:
            return Var(rng.choice(bound))
        return NIL
    if guarded and roll < 0.3:
        v = "X" + rng.choice(BINDER_NAMES) + str(len(bound))
        return Rec(v, gen_process_thread(rng, labels, chan, depth, bound + (v,), names,
                                         False, ops))
    if roll < 0.4 and ops:
        return OpCall(rng.choice(ops), again(depth - 1, guarded))
    if roll < 0.5:
        guard = gen_expr(rng, 2, names) if names else Lit.of(rng.random() < 0.5)
        return Cond(guard, again(depth - 1, guarded), again(depth - 1, guarded))
    if roll < 0.6:
        return Sum(_prefixed(rng, labels, chan, depth, bound, names, ops),
                   _prefixed(rng, labels, chan, depth, bound, names, ops))
    return _prefixed(rng, labels, chan, depth, bound, names, ops)


def _prefixed(rng, labels, chan, depth, bound, names, ops):
    if rng.random() < 0.5:
        xs = tuple(f"{rng.choice(VAR_NAMES)}{i}" for i in range(rng.randint(0, 2)))
        cont = gen_process_thread(rng, labels, chan, depth - 1, bound, names + xs, True, ops)
        return Recv(chan, labels(), xs, cont)
    args = tuple(gen_expr(rng, 2, names) if names else Lit.of(rng.randint(0, 9))
                 for _ in range(rng.randint(0, 2)))
    cont = gen_process_thread(rng, labels, chan, depth - 1, bound, names, True, ops)
    return Send(chan, labels(), args, cont)


def gen_process(rng: random.Random, threads: int | None = None) -> ProcessPar:
    labels = Labels(rng)
    chan = UserChan("y") if rng.random() < 0.5 else SessionChan("s", rng.choice(PARTICIPANTS))
    n = threads if threads is not None else rng.randint(1, 3)
    return ProcessPar(tuple(gen_process_thread(rng, labels, chan) for _ in range(n)))


def subtyping_corpus() -> list:
    """All input/output types towards one partner with at most two branches
    (labels a, b) and at most two levels of nesting, in two sort variants,
    plus the recursive types over the same shapes."""
    def level(conts: list) -> list:
        out = []
        for ctor in (TIn, TOut):
            for lab in ("a", "b"):
                for srt in ("Int", "Bool"):
                    for c in conts:
                        out.append(ctor("p", (Branch(lab, Sort((srt,)), c),)))
            for c1 in conts:
                for c2 in conts:
                    out.append(ctor("p", (Branch("a", Sort(("Int",)), c1),
                                          Branch("b", Sort(("Int",)), c2))))
        return out

    depth1 = [END] + level([END])
    small = [END] + [t for t in depth1 if t is not END and t.branches[0].sort.parts == ("Int",)]
    depth2 = level(small)
    t = Var("t")
    recursive = []
    for ctor in (TIn, TOut):
        one = Branch("a", Sort(("Int",)), t)
        recursive.append(Rec("t", ctor("p", (one,))))
        recursive.append(Rec("t", ctor("p", (one, Branch("b", Sort(("Int",)), END)))))
        recursive.append(Rec("t", ctor("p", (one, Branch("b", Sort(("Int",)), t)))))
        other = TOut if ctor is TIn else TIn
        recursive.append(Rec("t", ctor("p", (Branch("a", Sort(("Int",)),
                                                     other("p", (one,))),))))
    seen: list = []
    for x in depth1 + depth2 + recursive:
        if x not in seen:
            seen.append(x)
    return seen
