"""Reduction semantics of networks of monitored processes over shared
control data, with deterministic seeded scheduling."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Callable, Iterable

from .projection import project
from .surface import Scenario, pretty
from .syntax import (
    End, GlobalPar, In, MonitorPar, Nil, OpCall, Out, ProcessPar, Rec, Recv, Send, SessionChan,
    Sum, Cond, evaluate, pa, subst_channel, subst_values, threads_of, unfold, unfold_head,
)
from .typecheck import adequate_single, is_adequate

# ---------------------------------------------------------------------------
# networks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Init:
    """A session initiator new(G); `name` is the global's scenario name."""

    name: str
    g: GlobalPar


@dataclass(frozen=True)
class MonProc:
    participant: str
    session: str
    monitor: MonitorPar
    process: ProcessPar

    @property
    def chan(self) -> SessionChan:
        return SessionChan(self.session, self.participant)

    def is_inert(self) -> bool:
        return not self.monitor.threads and not self.process.threads


@dataclass(frozen=True)
class NPar:
    items: tuple


@dataclass(frozen=True)
class Restrict:
    session: str
    body: Any


def _clean_monitor(m: MonitorPar) -> MonitorPar:
    return MonitorPar(tuple(t for t in m.threads if not isinstance(unfold_head(t), End)))


def _clean_process(p: ProcessPar) -> ProcessPar:
    return ProcessPar(tuple(t for t in p.threads if not isinstance(t, Nil)))


def normalize_net(n: Any) -> NPar:
    """Flatten parallels, drop end[0], lift and merge restrictions, collapse
    empty ones.  Initiators keep their order; restrictions are sorted by
    session name and their bodies by participant."""
    inits: list[Init] = []
    free: list[MonProc] = []
    bodies: dict[str, list[MonProc]] = {}

    def walk(x: Any, session: str | None) -> None:
        if isinstance(x, NPar):
            for y in x.items:
                walk(y, session)
        elif isinstance(x, Restrict):
            bodies.setdefault(x.session, [])
            walk(x.body, x.session)
        elif isinstance(x, Init):
            inits.append(x)
        elif isinstance(x, MonProc):
            mp = replace(x, monitor=_clean_monitor(x.monitor), process=_clean_process(x.process))
            if mp.is_inert():
                return
            if session is None:
                free.append(mp)
            else:
                bodies[session].append(mp)
        else:
            raise TypeError(f"not a network: {x!r}")

    walk(n, None)
    items: list[Any] = list(inits)
    items.extend(sorted(free, key=lambda m: (m.session, m.participant)))
    for s in sorted(bodies):
        if bodies[s]:
            items.append(Restrict(s, NPar(tuple(sorted(bodies[s], key=lambda m: m.participant)))))
    return NPar(tuple(items))


def monprocs(n: NPar) -> list[MonProc]:
    out = []
    for x in n.items:
        if isinstance(x, MonProc):
            out.append(x)
        elif isinstance(x, Restrict):
            out.extend(x.body.items)
    return out


def session_members(n: NPar, session: str) -> dict[str, MonProc]:
    return {m.participant: m for m in monprocs(n) if m.session == session}


def replace_monprocs(n: NPar, session: str, members: Iterable[MonProc],
                     removed: Iterable[str] = ()) -> NPar:
    """Replace (by participant) the members of `session`, dropping `removed`."""
    new = {m.participant: m for m in members}
    gone = set(removed)
    items: list[Any] = []
    placed = False
    for x in n.items:
        if isinstance(x, Restrict) and x.session == session:
            body = [new.pop(m.participant, m) for m in x.body.items if m.participant not in gone]
            body.extend(new.values())
            items.append(Restrict(session, NPar(tuple(body))))
            placed = True
        else:
            items.append(x)
    if not placed:
        items.append(Restrict(session, NPar(tuple(new.values()))))
    return normalize_net(NPar(tuple(items)))


# ---------------------------------------------------------------------------
# systems and events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class System:
    network: NPar
    data: tuple[tuple[str, Any], ...]
    steps: int = 0
    fresh: int = 0
    # scenario global name -> session started from it
    sessions: tuple[tuple[str, str], ...] = ()
    scenario: Scenario | None = field(default=None, compare=False, repr=False)

    @property
    def env(self) -> dict[str, Any]:
        return dict(self.data)

    def with_data(self, env: dict[str, Any]) -> "System":
        return replace(self, data=tuple(sorted(env.items())))

    def session_of(self, global_name: str) -> str | None:
        return dict(self.sessions).get(global_name)


def initial_system(sc: Scenario) -> System:
    """The parallel of one new(G) per scenario global, over the declared data."""
    net = normalize_net(NPar(tuple(Init(name, g) for name, g in sc.globals.items())))
    return System(net, tuple(sorted(sc.data.items())), scenario=sc)


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: str  # init | com | op | tau | adapt
    payload: dict = field(compare=False)

    def to_json(self) -> str:
        return json.dumps({"step": self.step, "kind": self.kind, "payload": self.payload},
                          sort_keys=True)

    def to_human(self) -> str:
        p = self.payload
        if self.kind == "com":
            vals = ", ".join(json.dumps(v) for v in p["values"])
            what = f"{p['from']} -> {p['to']} : {p['label']}({vals})"
        elif self.kind == "op":
            what = f"{p['participant']} op[{p['op']}] {json.dumps(p['updates'], sort_keys=True)}"
        elif self.kind == "tau":
            what = f"{p['participant']} thread {p['thread']}"
        elif self.kind == "init":
            what = f"new({p['global']}) as {p['session']} with {', '.join(p['participants'])}"
        else:
            what = (f"rule {p['rule']} on {p['session']}: kill {p['killed']}, "
                    f"add {p['added']}, relabelled={p['relabelled']}")
        return f"[{self.step:4}] {self.kind:5} {what}"


class RuntimeFailure(Exception):
    pass


class InitError(RuntimeFailure):
    def __init__(self, participant: str, monitor: Any):
        self.participant = participant
        self.monitor = monitor
        super().__init__(f"no process in the collection is adequate for {participant}'s "
                         f"monitor {pretty(monitor)}")


class AdequacyViolation(RuntimeFailure):
    def __init__(self, mp: MonProc, step: int):
        self.monproc = mp
        super().__init__(f"after step {step}: process of {mp.participant} "
                         f"({pretty(mp.process)}) is not adequate for {pretty(mp.monitor)}")


# ---------------------------------------------------------------------------
# transitions of processes and monitors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProcAction:
    kind: str  # in | out | op | tau
    chan: Any = None
    label: str | None = None
    values: tuple = ()
    binders: tuple[str, ...] = ()
    op: str | None = None
    thread: int = 0

    @property
    def is_gamma(self) -> bool:
        return self.kind in ("op", "tau")


def _thread_steps(t: Any) -> list[tuple[ProcAction, Any]]:
    if isinstance(t, OpCall):
        return [(ProcAction("op", op=t.op), t.cont)]
    if isinstance(t, Rec):
        return [(ProcAction("tau"), unfold(t))]
    if isinstance(t, Cond):
        return [(ProcAction("tau"), t.then if evaluate(t.guard) else t.orelse)]
    if isinstance(t, Send):
        vals = tuple(evaluate(a) for a in t.args)
        return [(ProcAction("out", t.chan, t.label, vals), t.cont)]
    if isinstance(t, Recv):
        # the received values are filled in at synchronisation
        return [(ProcAction("in", t.chan, t.label, binders=t.binders), t.cont)]
    if isinstance(t, Sum):
        out = []
        for mine, other, left in ((t.left, t.right, True), (t.right, t.left, False)):
            for a, nxt in _thread_steps(mine):
                if a.is_gamma:
                    nxt = Sum(nxt, other) if left else Sum(other, nxt)
                out.append((a, nxt))
        return out
    return []


def proc_steps(pp: ProcessPar) -> list[tuple[ProcAction, ProcessPar]]:
    """All one-step transitions of a parallel process.  Input transitions
    leave the binders free in the result; `receive` fills them in."""
    out = []
    threads = pp.threads
    for i, t in enumerate(threads):
        for a, nxt in _thread_steps(t):
            out.append((replace(a, thread=i), ProcessPar(threads[:i] + (nxt,) + threads[i + 1:])))
    return out


def receive(action: ProcAction, after: ProcessPar, values: tuple) -> ProcessPar:
    threads = list(after.threads)
    i = action.thread
    threads[i] = subst_values(threads[i], dict(zip(action.binders, values)))
    return ProcessPar(tuple(threads))


@lru_cache(maxsize=65536)
def mon_steps(mm: MonitorPar) -> tuple[tuple[str, str, str, MonitorPar], ...]:
    """(direction, partner, label, next monitor) for every enabled action."""
    out = []
    threads = mm.threads
    for i, t in enumerate(threads):
        h = unfold_head(t)
        if not isinstance(h, (In, Out)):
            continue
        for b in h.branches:
            rest = threads[:i] + threads[i + 1:]
            kept = () if isinstance(unfold_head(b.cont), End) else (b.cont,)
            nxt = MonitorPar(threads[:i] + kept + threads[i + 1:]) if kept else MonitorPar(rest)
            out.append((h.direction, h.partner, b.label, nxt))
    return tuple(out)


# ---------------------------------------------------------------------------
# session initiation
# ---------------------------------------------------------------------------


def find_process(collection: dict[str, Any], m: Any) -> tuple[str, Any] | None:
    """First collection entry (file order) adequate for the single-threaded
    monitor `m`.  The inactive process is implicitly available for end."""
    if isinstance(unfold_head(m), End):
        return ("0", Nil())
    for name, q in collection.items():
        if adequate_single(q, m):
            return name, q
    return None


def instantiate(q: Any, chan: SessionChan) -> Any:
    from .syntax import channels
    for c in channels(q):
        q = subst_channel(q, c, chan)
    return q


def init(g: GlobalPar, collection: dict[str, Any], session: str) -> Restrict:
    """new(G): per thread and participant pick an adequate process from the
    collection; all threads share one session name."""
    mons: dict[str, list[Any]] = {}
    procs: dict[str, list[Any]] = {}
    for th in threads_of(g):
        for p in sorted(pa(th)):
            m = project(th, p)
            if isinstance(m, End):
                continue
            found = find_process(collection, m)
            if found is None:
                raise InitError(p, m)
            mons.setdefault(p, []).append(m)
            procs.setdefault(p, []).append(instantiate(found[1], SessionChan(session, p)))
    body = tuple(
        MonProc(p, session, MonitorPar(tuple(mons[p])), ProcessPar(tuple(procs[p])))
        for p in sorted(mons))
    return Restrict(session, NPar(body))


# ---------------------------------------------------------------------------
# redexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Redex:
    kind: str  # op | tau | com
    key: tuple
    session: str
    after: tuple[MonProc, ...]
    payload: dict = field(compare=False)
    op: str | None = None


def _key_values(vals: tuple) -> str:
    return json.dumps(list(vals))


def gamma_redexes(mp: MonProc) -> list[Redex]:
    out = []
    for a, nxt in proc_steps(mp.process):
        if not a.is_gamma:
            continue
        after = (replace(mp, process=nxt),)
        if a.kind == "op":
            out.append(Redex("op", ("op", mp.session, mp.participant, a.thread, a.op),
                             mp.session, after,
                             {"session": mp.session, "participant": mp.participant, "op": a.op},
                             op=a.op))
        else:
            out.append(Redex("tau", ("tau", mp.session, mp.participant, a.thread, ""),
                             mp.session, after,
                             {"session": mp.session, "participant": mp.participant,
                              "thread": a.thread}))
    return out


def com_redexes(n: NPar, exclude: set[tuple[str, str]] = frozenset()) -> list[Redex]:
    """Synchronisations allowed by both monitors and offered by both
    processes, within one session."""
    out = []
    members = [m for m in monprocs(n) if (m.session, m.participant) not in exclude]
    for snd in members:
        outs = {(pt, lab): nxt for d, pt, lab, nxt in mon_steps(snd.monitor) if d == "!"}
        if not outs:
            continue
        psteps = [(a, nxt) for a, nxt in proc_steps(snd.process) if a.kind == "out"]
        for rcv in members:
            if rcv is snd or rcv.session != snd.session:
                continue
            ins = {(pt, lab): nxt for d, pt, lab, nxt in mon_steps(rcv.monitor) if d == "?"}
            rsteps = [(a, nxt) for a, nxt in proc_steps(rcv.process) if a.kind == "in"]
            for a, pnext in psteps:
                mnext = outs.get((rcv.participant, a.label))
                rmnext = ins.get((snd.participant, a.label))
                if mnext is None or rmnext is None:
                    continue
                for b, rpnext in rsteps:
                    if b.label != a.label or len(b.binders) != len(a.values):
                        continue
                    after = (replace(snd, monitor=mnext, process=pnext),
                             replace(rcv, monitor=rmnext, process=receive(b, rpnext, a.values)))
                    key = ("com", snd.session, snd.participant, rcv.participant, a.label,
                           _key_values(a.values), a.thread, b.thread)
                    out.append(Redex("com", key, snd.session, after, {
                        "session": snd.session, "from": snd.participant,
                        "to": rcv.participant, "label": a.label, "values": list(a.values)}))
    return out


def enabled_redexes(sys: System, op_precedence: str = "per-process") -> list[Redex]:
    """Redexes among which the scheduler chooses, after applying the
    precedence of data operations and silent steps over communication.

    per-process: a monitored process with an enabled op/tau step does not
    take part in communications.  global: communications are considered only
    when no op/tau step is enabled anywhere.
    """
    gammas: list[Redex] = []
    busy: set[tuple[str, str]] = set()
    for mp in monprocs(sys.network):
        g = gamma_redexes(mp)
        if g:
            busy.add((mp.session, mp.participant))
            gammas.extend(g)
    if op_precedence == "global":
        chosen = gammas or com_redexes(sys.network)
    elif op_precedence == "per-process":
        chosen = gammas + com_redexes(sys.network, busy)
    else:
        raise ValueError(f"unknown precedence policy {op_precedence!r}")
    return sorted(chosen, key=lambda r: r.key)


def apply_op(sys: System, op: str) -> tuple[System, dict]:
    """Update the control data by the op's assignments, all evaluated on the
    data before the update."""
    op_spec = sys.scenario.ops[op]
    env = sys.env
    updates = {k: evaluate(e, env) for k, e in op_spec.updates}
    return sys.with_data({**env, **updates}), updates


def apply_redex(sys: System, r: Redex) -> tuple[System, TraceEvent]:
    payload = dict(r.payload)
    if r.op is not None:
        sys, updates = apply_op(sys, r.op)
        payload["updates"] = updates
    net = replace_monprocs(sys.network, r.session, r.after)
    sys = replace(sys, network=net, steps=sys.steps + 1)
    return sys, TraceEvent(sys.steps, r.kind, payload)


def apply_com(sys: System, r: Redex) -> System:
    return apply_redex(sys, r)[0]


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------


def step_init(sys: System, node: Init) -> tuple[System, TraceEvent]:
    session = f"s{sys.fresh + 1}"
    restricted = init(node.g, sys.scenario.collection, session)
    items = [x for x in sys.network.items if x is not node] + [restricted]
    sys = replace(sys, network=normalize_net(NPar(tuple(items))), fresh=sys.fresh + 1,
                  sessions=sys.sessions + ((node.name, session),), steps=sys.steps + 1)
    members = sorted(m.participant for m in restricted.body.items)
    return sys, TraceEvent(sys.steps, "init", {"global": node.name, "session": session,
                                               "participants": members})


def check_adequacy(sys: System) -> None:
    for mp in monprocs(sys.network):
        if not is_adequate(mp.process, mp.monitor):
            raise AdequacyViolation(mp, sys.steps)


DONE = "done"
STUCK = "stuck"
BUDGET = "budget"


def step(sys: System, rng: random.Random, op_precedence: str = "per-process",
         check: bool = True) -> tuple[System, TraceEvent] | str:
    """One reduction: initiators first, then adaptation whenever the
    adaptation function is defined, then op/tau/com by the precedence
    policy.  Returns DONE or STUCK when no step applies."""
    from .adaptation import adapt, eval_F

    inits = [x for x in sys.network.items if isinstance(x, Init)]
    if inits:
        result = step_init(sys, inits[0])
    else:
        decision = eval_F(sys)
        if decision is not None:
            result = adapt(sys, decision)
        else:
            redexes = enabled_redexes(sys, op_precedence)
            if not redexes:
                return DONE if not sys.network.items else STUCK
            result = apply_redex(sys, redexes[rng.randrange(len(redexes))])
    if check:
        check_adequacy(result[0])
    return result


@dataclass
class RunResult:
    verdict: str
    system: System
    events: list[TraceEvent]


def run(sys: System, seed: int, max_steps: int, op_precedence: str = "per-process",
        on_event: Callable[[TraceEvent], None] | None = None) -> RunResult:
    rng = random.Random(seed)
    events: list[TraceEvent] = []
    for _ in range(max_steps):
        res = step(sys, rng, op_precedence)
        if isinstance(res, str):
            return RunResult(res, sys, events)
        sys, ev = res
        events.append(ev)
        if on_event:
            on_event(ev)
    verdict = DONE if not sys.network.items else BUDGET
    return RunResult(verdict, sys, events)
