"""Data-driven reconfiguration: the adaptation function given by scenario
rules, monitor erasure, the new-monitor and new-process mappings, fresh
relabelling, the adaptation step itself, and collection completeness."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Any, Iterable

from .projection import project, project_par
from .runtime import (
    MonProc, RuntimeFailure, System, TraceEvent, find_process, instantiate, replace_monprocs,
    session_members,
)
from .surface import AdaptRule, pretty
from .syntax import (
    END, Branch, Comm, End, GlobalPar, LabelClash, MonitorPar, Nil, Prefix, ProcessPar, Rec,
    SessionChan, Var, children, equal_regular, evaluate, free_vars, labels, pa, partners,
    threads_of, unfold_head, with_children,
)
from .typecheck import adequate_single, is_adequate, match_threads


class AdaptationError(RuntimeFailure):
    pass


class EraseUndefined(AdaptationError):
    def __init__(self, monitor: Any, erased: frozenset[str]):
        self.monitor = monitor
        self.erased = erased
        super().__init__(f"erasing {sorted(erased)} from {pretty(monitor)} leaves a choice "
                         f"whose branches continue differently")


class MonUndefined(AdaptationError):
    def __init__(self, participant: str, clash: Iterable[str] = (), reason: str = ""):
        self.participant = participant
        self.labels = sorted(clash)
        super().__init__(reason or f"new monitor of {participant} would reuse label(s) "
                                   f"{', '.join(self.labels)}")


class NoProcess(AdaptationError):
    def __init__(self, participant: str, monitor: Any):
        self.participant = participant
        self.monitor = monitor
        super().__init__(f"no process in the collection is adequate for {participant}'s "
                         f"monitor {pretty(monitor)}")


class LivelockError(AdaptationError):
    pass


class NoSession(AdaptationError):
    pass


# ---------------------------------------------------------------------------
# the adaptation function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Decision:
    rule: AdaptRule
    session: str
    data: dict = field(compare=False)
    updates: dict = field(compare=False)


def target_session(sys: System, rule: AdaptRule) -> str:
    if rule.session is not None:
        s = sys.session_of(rule.session)
        if s is None:
            raise NoSession(f"rule {rule.name}: global {rule.session} has not been started")
        return s
    started = [s for _, s in sys.sessions]
    if len(started) != 1:
        raise NoSession(f"rule {rule.name} names no session and {len(started)} are running")
    return started[0]


def eval_F(sys: System) -> Decision | None:
    """First rule (file order) whose condition holds on the control data.

    A rule whose own updates leave its condition true would fire forever;
    that is reported as a LivelockError.
    """
    if sys.scenario is None:
        return None
    env = sys.env
    for rule in sys.scenario.rules:
        if not evaluate(rule.when, env):
            continue
        updates = {k: evaluate(e, env) for k, e in rule.set}
        new_env = {**env, **updates}
        if evaluate(rule.when, new_env):
            raise LivelockError(f"rule {rule.name} still applies after its own updates")
        return Decision(rule, target_session(sys, rule), new_env, updates)
    return None


# ---------------------------------------------------------------------------
# erasure, new monitors, relabelling
# ---------------------------------------------------------------------------


def erase(m: Any, a: Iterable[str]) -> Any:
    """Remove from a single-threaded monitor every communication whose
    partner is in `a`.

    A removed choice is replaced by the erasure of its continuation, which
    must be the same for all branches.
    """
    a = frozenset(a)
    if not a:
        return m

    def go(t: Any) -> Any:
        if isinstance(t, (Var, End)):
            return t
        if isinstance(t, Rec):
            body = go(t.body)
            if body == Var(t.var):
                return END
            if t.var not in free_vars(body):
                return body
            return Rec(t.var, body)
        if isinstance(t, Prefix):
            conts = [go(b.cont) for b in t.branches]
            if t.partner not in a:
                return type(t)(t.partner, tuple(Branch(b.label, b.sort, c)
                                                for b, c in zip(t.branches, conts)))
            if any(not equal_regular(conts[0], c) for c in conts[1:]):
                raise EraseUndefined(m, a)
            return conts[0]
        raise TypeError(f"not a monitor: {t!r}")

    return go(m)


def erase_par(mm: MonitorPar, a: Iterable[str]) -> MonitorPar:
    a = frozenset(a)
    out = []
    for t in threads_of(mm):
        e = erase(t, a)
        if not isinstance(unfold_head(e), End):
            out.append(e)
    return MonitorPar(tuple(out))


def mon(p: str, mm: MonitorPar, g: GlobalPar, k: Iterable[str]) -> MonitorPar:
    """New monitor of participant `p` after adding `g` and killing `k`."""
    k = frozenset(k)
    if p not in pa(g):
        return erase_par(mm, k)
    try:
        rest = erase_par(mm, pa(g) | k)
    except EraseUndefined as exc:
        raise MonUndefined(p, reason=str(exc)) from exc
    new = project_par(g, p)
    try:
        return MonitorPar(new.threads + rest.threads)
    except LabelClash as exc:
        raise MonUndefined(p, exc.labels) from exc


def rename_labels(x: Any, mapping: dict[str, str]) -> Any:
    if isinstance(x, GlobalPar):
        return GlobalPar(tuple(rename_labels(t, mapping) for t in x.threads))
    if isinstance(x, (Comm, Prefix)):
        bs = tuple(Branch(mapping.get(b.label, b.label), b.sort, rename_labels(b.cont, mapping))
                   for b in x.branches)
        return Comm(x.sender, x.receiver, bs) if isinstance(x, Comm) else type(x)(x.partner, bs)
    kids = children(x)
    if not kids:
        return x
    return with_children(x, tuple(rename_labels(c, mapping) for c in kids))


def _base(label: str) -> str:
    return label.split("#", 1)[0]


def fresh_relabelling(g: GlobalPar, used: set[str]) -> GlobalPar:
    """Suffix every label of `g` with `#n` for the least n >= 1 that makes
    all of them fresh with respect to `used`.  An existing suffix is
    replaced, unless that would merge two labels of `g`."""
    own = sorted(labels(g))
    # labels sharing a base (a, a#1) keep their own suffix so they stay apart
    unique_bases = len({_base(lab) for lab in own}) == len(own)
    stem = _base if unique_bases else (lambda lab: lab)
    n = 1
    while True:
        mapping = {lab: f"{stem(lab)}#{n}" for lab in own}
        new = set(mapping.values())
        if len(new) == len(own) and not new & used:
            return rename_labels(g, mapping)
        n += 1


def relabel_if_needed(g: GlobalPar, monitors: dict[str, MonitorPar],
                      k: Iterable[str]) -> tuple[GlobalPar, bool]:
    """`g` itself when the new monitor is defined for all its participants,
    a fresh relabelling of `g` otherwise."""
    k = frozenset(k)
    clash = False
    for p in sorted(pa(g)):
        try:
            mon(p, monitors.get(p, MonitorPar(())), g, k)
        except MonUndefined as exc:
            if not exc.labels:
                raise
            clash = True
    if not clash:
        return g, False
    used = set().union(*(labels(m) for m in monitors.values())) if monitors else set()
    return fresh_relabelling(g, used), True


# ---------------------------------------------------------------------------
# new processes
# ---------------------------------------------------------------------------


def procS(chan: SessionChan, p: Any, m: Any, a: Iterable[str],
          collection: dict[str, Any]) -> Any:
    """Keep a single-threaded process if it fits its erased monitor, else
    take the first fitting process from the collection."""
    em = erase(m, a)
    if adequate_single(p, em):
        return p
    found = find_process(collection, em)
    if found is None:
        raise NoProcess(chan.participant, em)
    return instantiate(found[1], chan)


def assemble(chan: SessionChan, mm: MonitorPar, collection: dict[str, Any]) -> tuple:
    """One collection process per monitor thread, on channel `chan`."""
    out = []
    for m in threads_of(mm):
        found = find_process(collection, m)
        if found is None:
            raise NoProcess(chan.participant, m)
        out.append(instantiate(found[1], chan))
    return tuple(out)


def proc(chan: SessionChan, pp: ProcessPar, mm: MonitorPar, g: GlobalPar, k: Iterable[str],
         collection: dict[str, Any]) -> ProcessPar:
    """New process of the participant owning `chan`, given its current
    process `pp` (adequate for `mm`)."""
    k = frozenset(k)
    p = chan.participant
    if is_adequate(pp, mon(p, mm, g, k)):
        return pp
    involved = p in pa(g)
    erased = pa(g) | k if involved else k
    matching = match_threads(pp, mm)
    threads = list(threads_of(pp))
    matched = {i for i, _ in matching.pairs}
    kept = [t for i, t in enumerate(threads) if i not in matched]
    for i, j in matching.pairs:
        kept.append(procS(chan, threads[i], threads_of(mm)[j], erased, collection))
    kept = [t for t in kept if not isinstance(t, Nil)]
    if involved:
        kept = list(assemble(chan, project_par(g, p), collection)) + kept
    return ProcessPar(tuple(kept))


# ---------------------------------------------------------------------------
# the adaptation step
# ---------------------------------------------------------------------------


def adapt(sys: System, decision: Decision) -> tuple[System, TraceEvent]:
    rule = decision.rule
    session = decision.session
    collection = sys.scenario.collection
    members = session_members(sys.network, session)
    before = set(members)
    k = rule.kill
    monitors = {p: mp.monitor for p, mp in members.items()}
    g, relabelled = relabel_if_needed(rule.new_global, monitors, k)

    updated: list[MonProc] = []
    for p in sorted(before - k):
        mp = members[p]
        updated.append(replace(mp, monitor=mon(p, mp.monitor, g, k),
                               process=proc(mp.chan, mp.process, mp.monitor, g, k, collection)))
    added = sorted(pa(g) - before)
    for p in added:
        chan = SessionChan(session, p)
        mm = project_par(g, p)
        updated.append(MonProc(p, session, mm, ProcessPar(assemble(chan, mm, collection))))

    net = replace_monprocs(sys.network, session, updated, removed=k & before)
    new = replace(sys.with_data(decision.data), network=net, steps=sys.steps + 1)
    return new, TraceEvent(new.steps, "adapt", {
        "rule": rule.name, "session": session, "killed": sorted(k & before),
        "added": added, "relabelled": relabelled, "updates": decision.updates})


# ---------------------------------------------------------------------------
# closure and completeness
# ---------------------------------------------------------------------------


def _dedupe(ms: Iterable[Any]) -> list[Any]:
    out: list[Any] = []
    for m in ms:
        if not any(equal_regular(m, n) for n in out):
            out.append(m)
    return out


def erasures(m: Any) -> list[Any]:
    """All defined erasures of a single-threaded monitor, over every subset
    of the partners it mentions (the empty subset included)."""
    ps = sorted(partners(m))
    out = []
    for r in range(len(ps) + 1):
        for sub in combinations(ps, r):
            try:
                out.append(erase(m, sub))
            except EraseUndefined:
                continue
    return _dedupe(out)


def closure_singles(ms: Iterable[Any]) -> list[Any]:
    """Single-threaded members of the closure (end included)."""
    singles: list[Any] = []
    for m in ms:
        for t in threads_of(m) or (END,):
            singles.extend(erasures(t))
    singles = [END if isinstance(unfold_head(s), End) else s for s in singles]
    return _dedupe(singles)


def closure(ms: Iterable[Any]) -> list[MonitorPar]:
    """The closure under erasure and label-disjoint parallel composition,
    as parallels of single-threaded members (end is the empty parallel)."""
    ms = list(ms)
    if not ms:
        return []
    singles = [s for s in closure_singles(ms) if not isinstance(s, End)]
    out: list[MonitorPar] = []

    def grow(start: int, chosen: list[Any], used: set[str]) -> None:
        out.append(MonitorPar(tuple(chosen)))
        for i in range(start, len(singles)):
            labs = labels(singles[i])
            if labs & used:
                continue
            grow(i + 1, chosen + [singles[i]], used | labs)

    grow(0, [], set())
    return out


def in_closure(m: Any, ms: Iterable[Any]) -> bool:
    ms = list(ms)
    if not ms:
        return False
    singles = closure_singles(ms)
    return all(any(equal_regular(t, s) for s in singles) for t in threads_of(m))


@dataclass
class CompletenessReport:
    missing: list[tuple[str, Any]]

    @property
    def complete(self) -> bool:
        return not self.missing


def complete(collection: dict[str, Any], globals_: Iterable[GlobalPar]) -> CompletenessReport:
    """Check that every single-threaded monitor in the closure of the
    projections of the given globals has an adequate collection process.
    Parallel members are covered thread by thread."""
    missing: list[tuple[str, Any]] = []
    for g in globals_:
        for th in threads_of(g):
            for p in sorted(pa(th)):
                m = project(th, p)
                for e in erasures(m):
                    if isinstance(unfold_head(e), End):
                        continue
                    if find_process(collection, e) is None and \
                            not any(equal_regular(e, x) for _, x in missing):
                        missing.append((p, e))
    return CompletenessReport(missing)
