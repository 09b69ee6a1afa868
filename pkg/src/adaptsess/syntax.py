"""Abstract syntax for global types, monitors, processes and process types.

All terms are immutable and hashable.  Recursion uses explicit binders
(`Rec`/`Var`, shared by every syntactic category); equi-recursion is
realised by `unfold` and the bisimulation in `equal_regular`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Any, Iterable, Iterator

BASE_SORTS = ("Int", "Bool", "Str")
ANY_SORT = "_"


class LabelClash(ValueError):
    """Parallel threads that are required to use distinct labels do not."""

    def __init__(self, labels: Iterable[str]):
        self.labels = sorted(set(labels))
        super().__init__(f"labels shared between parallel threads: {', '.join(self.labels)}")


class UnguardedRecursion(ValueError):
    pass


# ---------------------------------------------------------------------------
# sorts and expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sort:
    """Payload sort of a label; a tuple of base sorts (possibly empty).

    Sort names other than Int/Bool are mapped to Str, but the name the user
    wrote is kept in `names` for printing.  `names` does not take part in
    equality.
    """

    parts: tuple[str, ...]
    names: tuple[str | None, ...] | None = field(default=None, compare=False)

    @classmethod
    def of(cls, *written: str) -> "Sort":
        parts = []
        names: list[str | None] = []
        for w in written:
            if w in BASE_SORTS or w == ANY_SORT:
                parts.append(w)
                names.append(None)
            else:
                parts.append("Str")
                names.append(w)
        return cls(tuple(parts), tuple(names) if any(names) else None)

    def compatible(self, other: "Sort") -> bool:
        if len(self.parts) != len(other.parts):
            return False
        return all(a == b or ANY_SORT in (a, b) for a, b in zip(self.parts, other.parts))

    def __str__(self) -> str:
        shown = [
            (self.names[i] if self.names and self.names[i] else p)
            for i, p in enumerate(self.parts)
        ]
        return "(" + ",".join(shown) + ")"


def sort_of_value(v: Any) -> str:
    if isinstance(v, bool):
        return "Bool"
    if isinstance(v, int):
        return "Int"
    if isinstance(v, str):
        return "Str"
    raise TypeError(f"not a value: {v!r}")


@dataclass(frozen=True)
class Lit:
    # the sort is stored explicitly so that Lit(True) != Lit(1)
    sort: str
    value: Any

    @classmethod
    def of(cls, v: Any) -> "Lit":
        return cls(sort_of_value(v), v)


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "-"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * < == && ||
    left: "Expr"
    right: "Expr"


Expr = Lit | Name | Unary | Binary

BINARY_OPS = ("+", "-", "*", "<", "==", "&&", "||")
UNARY_OPS = ("not", "-")


class EvalError(RuntimeError):
    pass


def evaluate(e: Expr, env: dict[str, Any] | None = None) -> Any:
    """Evaluate `e`; free names are looked up in `env`."""
    env = env or {}
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Name):
        if e.id not in env:
            raise EvalError(f"unbound name {e.id!r}")
        return env[e.id]
    if isinstance(e, Unary):
        v = evaluate(e.operand, env)
        if e.op == "not":
            return not v
        return -v
    a = evaluate(e.left, env)
    if e.op == "&&":
        return a and evaluate(e.right, env)
    if e.op == "||":
        return a or evaluate(e.right, env)
    b = evaluate(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "<":
        return a < b
    if e.op == "==":
        return a == b
    raise EvalError(f"unknown operator {e.op!r}")


def expr_names(e: Expr) -> set[str]:
    if isinstance(e, Name):
        return {e.id}
    if isinstance(e, Unary):
        return expr_names(e.operand)
    if isinstance(e, Binary):
        return expr_names(e.left) | expr_names(e.right)
    return set()


def subst_expr(e: Expr, values: dict[str, Any]) -> Expr:
    if isinstance(e, Name):
        return Lit.of(values[e.id]) if e.id in values else e
    if isinstance(e, Unary):
        return Unary(e.op, subst_expr(e.operand, values))
    if isinstance(e, Binary):
        return Binary(e.op, subst_expr(e.left, values), subst_expr(e.right, values))
    return e


# ---------------------------------------------------------------------------
# terms shared by all categories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rec:
    var: str
    body: Any


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class End:
    def __repr__(self) -> str:
        return "End()"


END = End()


@dataclass(frozen=True)
class Branch:
    label: str
    sort: Sort
    cont: Any


# ---------------------------------------------------------------------------
# global types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Comm:
    """sender -> receiver : { label_i(sort_i). cont_i }"""

    sender: str
    receiver: str
    branches: tuple[Branch, ...]


GlobalType = Comm | Rec | Var | End


@dataclass(frozen=True)
class GlobalPar:
    threads: tuple[GlobalType, ...]


# ---------------------------------------------------------------------------
# monitors and process types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prefix:
    partner: str | None
    branches: tuple[Branch, ...]

    direction = ""

    def branch(self, label: str) -> Branch | None:
        for b in self.branches:
            if b.label == label:
                return b
        return None

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(b.label for b in self.branches)


@dataclass(frozen=True)
class In(Prefix):
    """Input monitor: partner?{label_i(sort_i). M_i}"""

    direction = "?"


@dataclass(frozen=True)
class Out(Prefix):
    """Output monitor: partner!{label_i(sort_i). M_i}"""

    direction = "!"


@dataclass(frozen=True)
class TIn(Prefix):
    """Intersection of inputs.  `partner` is None for process types, since
    processes never name the participants they talk to."""

    direction = "?"


@dataclass(frozen=True)
class TOut(Prefix):
    """Union of outputs."""

    direction = "!"


Monitor = In | Out | Rec | Var | End
ProcType = TIn | TOut | Rec | Var | End


def _check_disjoint(threads: tuple) -> None:
    seen: dict[str, int] = {}
    clash = set()
    for i, t in enumerate(threads):
        for lab in labels(t):
            if lab in seen and seen[lab] != i:
                clash.add(lab)
            seen.setdefault(lab, i)
    if clash:
        raise LabelClash(clash)


@dataclass(frozen=True)
class MonitorPar:
    """Parallel monitor.  An empty tuple is the monitor `end`."""

    threads: tuple[Monitor, ...]

    def __post_init__(self) -> None:
        _check_disjoint(self.threads)


@dataclass(frozen=True)
class TypePar:
    threads: tuple[ProcType, ...]

    def __post_init__(self) -> None:
        _check_disjoint(self.threads)


# ---------------------------------------------------------------------------
# processes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UserChan:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SessionChan:
    session: str
    participant: str

    def __str__(self) -> str:
        return f"{self.session}[{self.participant}]"


Channel = UserChan | SessionChan


@dataclass(frozen=True)
class Recv:
    chan: Channel
    label: str
    binders: tuple[str, ...]
    cont: Any


@dataclass(frozen=True)
class Send:
    chan: Channel
    label: str
    args: tuple[Expr, ...]
    cont: Any


@dataclass(frozen=True)
class Sum:
    """External choice."""

    left: Any
    right: Any


@dataclass(frozen=True)
class Cond:
    guard: Expr
    then: Any
    orelse: Any


@dataclass(frozen=True)
class OpCall:
    """An action on the control data, followed by `cont`."""

    op: str
    cont: Any


@dataclass(frozen=True)
class Nil:
    def __repr__(self) -> str:
        return "Nil()"


NIL = Nil()

Process = Recv | Send | Sum | Cond | OpCall | Rec | Var | Nil


@dataclass(frozen=True)
class ProcessPar:
    """Parallel process.  An empty tuple is the inactive process 0."""

    threads: tuple[Process, ...]


PAR_TYPES = (GlobalPar, MonitorPar, TypePar, ProcessPar)
_PREFIX_LIKE = (Comm, Prefix, Send, Recv)


# ---------------------------------------------------------------------------
# generic traversal
# ---------------------------------------------------------------------------


def children(t: Any) -> tuple:
    """Immediate subterms (continuations, recursion bodies, choice arms)."""
    if isinstance(t, (Comm, Prefix)):
        return tuple(b.cont for b in t.branches)
    if isinstance(t, Rec):
        return (t.body,)
    if isinstance(t, (Send, Recv, OpCall)):
        return (t.cont,)
    if isinstance(t, Sum):
        return (t.left, t.right)
    if isinstance(t, Cond):
        return (t.then, t.orelse)
    return ()


def with_children(t: Any, kids: tuple) -> Any:
    if isinstance(t, (Comm, Prefix)):
        branches = tuple(Branch(b.label, b.sort, k) for b, k in zip(t.branches, kids))
        if isinstance(t, Comm):
            return Comm(t.sender, t.receiver, branches)
        return type(t)(t.partner, branches)
    if isinstance(t, Rec):
        return Rec(t.var, kids[0])
    if isinstance(t, Send):
        return Send(t.chan, t.label, t.args, kids[0])
    if isinstance(t, Recv):
        return Recv(t.chan, t.label, t.binders, kids[0])
    if isinstance(t, OpCall):
        return OpCall(t.op, kids[0])
    if isinstance(t, Sum):
        return Sum(kids[0], kids[1])
    if isinstance(t, Cond):
        return Cond(t.guard, kids[0], kids[1])
    return t


def subterms(t: Any) -> Iterator[Any]:
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(children(x))


def threads_of(x: Any) -> tuple:
    """Threads of a parallel; a bare tuple is taken as a list of threads."""
    if isinstance(x, tuple):
        return x
    return x.threads if isinstance(x, PAR_TYPES) else (x,)


def subst_var(t: Any, name: str, repl: Any) -> Any:
    """Replace free occurrences of recursion variable `name` by `repl`."""
    if isinstance(t, Var):
        return repl if t.name == name else t
    if isinstance(t, Rec) and t.var == name:
        return t
    kids = children(t)
    if not kids:
        return t
    return with_children(t, tuple(subst_var(k, name, repl) for k in kids))


def unfold(t: Any) -> Any:
    """One-step unfolding: rec t.B  ->  B{rec t.B / t}; identity otherwise."""
    if isinstance(t, Rec):
        return subst_var(t.body, t.var, t)
    return t


def unfold_head(t: Any, limit: int = 1000) -> Any:
    """Unfold until the head is not a binder."""
    n = 0
    while isinstance(t, Rec):
        t = unfold(t)
        n += 1
        if n > limit:
            raise UnguardedRecursion("recursion is not guarded")
    return t


def free_vars(t: Any) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Rec):
        return free_vars(t.body) - {t.var}
    out: set[str] = set()
    for k in children(t):
        out |= free_vars(k)
    return out


@lru_cache(maxsize=65536)
def _thread_labels(th: Any) -> frozenset[str]:
    out: set[str] = set()
    for s in subterms(th):
        if isinstance(s, (Comm, Prefix)):
            out.update(b.label for b in s.branches)
        elif isinstance(s, (Send, Recv)):
            out.add(s.label)
    return frozenset(out)


def labels(x: Any) -> set[str]:
    """All labels occurring anywhere in a term (any category, parallels too)."""
    out: set[str] = set()
    for th in threads_of(x):
        out |= _thread_labels(th)
    return out


def pa(g: Any) -> set[str]:
    """Participants occurring as sender or receiver of a global type."""
    out: set[str] = set()
    for th in threads_of(g):
        for s in subterms(th):
            if isinstance(s, Comm):
                out.update((s.sender, s.receiver))
    return out


def partners(m: Any) -> set[str]:
    """Participants a monitor (or process type) communicates with."""
    out: set[str] = set()
    for th in threads_of(m):
        for s in subterms(th):
            if isinstance(s, Prefix) and s.partner is not None:
                out.add(s.partner)
    return out


def labels_with(g: GlobalType, p: str) -> set[str]:
    """Labels of the communications of `g` in which `p` takes part."""
    return {
        b.label
        for s in subterms(g)
        if isinstance(s, Comm) and p in (s.sender, s.receiver)
        for b in s.branches
    }


# ---------------------------------------------------------------------------
# equality of regular trees
# ---------------------------------------------------------------------------


def _head(t: Any) -> tuple[Any, list[tuple[Any, Any]]]:
    """Observable head of an unfolded term and its continuations, keyed so
    that branch order does not matter."""
    if isinstance(t, Comm):
        key = ("comm", t.sender, t.receiver, frozenset((b.label, b.sort) for b in t.branches))
        return key, [(b.label, b.cont) for b in t.branches]
    if isinstance(t, Prefix):
        key = (type(t).__name__, t.partner, frozenset((b.label, b.sort) for b in t.branches))
        return key, [(b.label, b.cont) for b in t.branches]
    if isinstance(t, Var):
        return ("var", t.name), []
    if isinstance(t, Send):
        return ("send", t.chan, t.label, t.args), [(0, t.cont)]
    if isinstance(t, Recv):
        return ("recv", t.chan, t.label, t.binders), [(0, t.cont)]
    if isinstance(t, OpCall):
        return ("op", t.op), [(0, t.cont)]
    if isinstance(t, Sum):
        return ("sum",), [(0, t.left), (1, t.right)]
    if isinstance(t, Cond):
        return ("cond", t.guard), [(0, t.then), (1, t.orelse)]
    return (type(t).__name__,), []


def equal_regular(a: Any, b: Any) -> bool:
    """Do `a` and `b` denote the same (possibly infinite) regular tree?

    Bisimulation over the finitely many reachable pairs of unfolded
    subterms.  Free variables compare by name.
    """
    seen: set[tuple[Any, Any]] = set()
    todo = [(a, b)]
    while todo:
        x, y = todo.pop()
        if x is y:
            continue
        x, y = unfold_head(x), unfold_head(y)
        if (x, y) in seen:
            continue
        seen.add((x, y))
        hx, kx = _head(x)
        hy, ky = _head(y)
        if hx != hy:
            return False
        dy = dict(ky)
        for slot, cx in kx:
            todo.append((cx, dy[slot]))
    return True


def par_equal(a: Any, b: Any) -> bool:
    """Equality of parallel compositions as multisets of threads, each
    thread compared with `equal_regular`."""
    xs, ys = list(threads_of(a)), list(threads_of(b))
    if len(xs) != len(ys):
        return False
    for x in xs:
        for i, y in enumerate(ys):
            if equal_regular(x, y):
                del ys[i]
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# canonical forms and substitution
# ---------------------------------------------------------------------------


def is_process(t: Any) -> bool:
    for s in subterms(t):
        if isinstance(s, (Send, Recv, Sum, Cond, OpCall, Nil)):
            return True
        if isinstance(s, (Comm, Prefix, End)):
            return False
    return False


def binder_name(base: str, depth: int) -> str:
    return base if depth == 0 else f"{base}{depth}"


def canonicalize(x: Any) -> Any:
    """Alpha-rename recursion binders by nesting depth: t, t1, t2, ... for
    types and monitors, X, X1, ... for processes."""
    if isinstance(x, PAR_TYPES):
        return type(x)(tuple(canonicalize(t) for t in x.threads))
    base = "X" if is_process(x) else "t"

    def go(t: Any, depth: int, env: dict[str, str]) -> Any:
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Rec):
            new = binder_name(base, depth)
            return Rec(new, go(t.body, depth + 1, {**env, t.var: new}))
        kids = children(t)
        if not kids:
            return t
        return with_children(t, tuple(go(k, depth, env) for k in kids))

    return go(x, 0, {})


def subst_channel(p: Any, src: Channel, dst: Channel) -> Any:
    """Replace channel `src` by `dst` throughout a process."""
    if isinstance(p, ProcessPar):
        return ProcessPar(tuple(subst_channel(t, src, dst) for t in p.threads))
    if isinstance(p, Send):
        return Send(dst if p.chan == src else p.chan, p.label, p.args, subst_channel(p.cont, src, dst))
    if isinstance(p, Recv):
        return Recv(dst if p.chan == src else p.chan, p.label, p.binders, subst_channel(p.cont, src, dst))
    kids = children(p)
    if not kids:
        return p
    return with_children(p, tuple(subst_channel(k, src, dst) for k in kids))


def subst_values(p: Any, values: dict[str, Any]) -> Any:
    """Substitute values for free expression variables of a process."""
    if not values:
        return p
    if isinstance(p, Send):
        return Send(p.chan, p.label, tuple(subst_expr(a, values) for a in p.args),
                    subst_values(p.cont, values))
    if isinstance(p, Recv):
        inner = {k: v for k, v in values.items() if k not in p.binders}
        return Recv(p.chan, p.label, p.binders, subst_values(p.cont, inner))
    if isinstance(p, Cond):
        return Cond(subst_expr(p.guard, values), subst_values(p.then, values),
                    subst_values(p.orelse, values))
    kids = children(p)
    if not kids:
        return p
    return with_children(p, tuple(subst_values(k, values) for k in kids))


def channels(p: Any) -> set[Channel]:
    return {s.chan for th in threads_of(p) for s in subterms(th) if isinstance(s, (Send, Recv))}


# ---------------------------------------------------------------------------
# well-formedness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    path: str
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.path or '/'}: {self.code}: {self.message}"


_GUARDS = _PREFIX_LIKE


def _structure_violations(t: Any, path: str = "") -> list[Violation]:
    """Distinct branch labels, no self-communication, closed and guarded
    recursion, non-degenerate sums.  Shared by every category."""
    out: list[Violation] = []

    def walk(t: Any, path: str, bound: frozenset[str], unguarded: frozenset[str]) -> None:
        if isinstance(t, Var):
            if t.name not in bound:
                out.append(Violation(path, "unbound-variable", f"variable {t.name} is not bound"))
            elif t.name in unguarded:
                out.append(Violation(path, "unguarded-recursion", f"variable {t.name} is not guarded"))
            return
        if isinstance(t, Rec):
            walk(t.body, f"{path}/rec {t.var}", bound | {t.var}, unguarded | {t.var})
            return
        if isinstance(t, (Comm, Prefix)):
            if not t.branches:
                out.append(Violation(path, "empty-choice", "no branches"))
            seen = set()
            for b in t.branches:
                if b.label in seen:
                    out.append(Violation(path, "duplicate-label", f"label {b.label} occurs twice"))
                seen.add(b.label)
            if isinstance(t, Comm) and t.sender == t.receiver:
                out.append(Violation(path, "self-communication",
                                     f"{t.sender} communicates with itself"))
            for b in t.branches:
                walk(b.cont, f"{path}/{b.label}", bound, frozenset())
            return
        if isinstance(t, (Send, Recv)):
            walk(t.cont, f"{path}/{t.label}", bound, frozenset())
            return
        if isinstance(t, Sum):
            for i, arm in enumerate((t.left, t.right)):
                if not _reaches_comm(arm):
                    out.append(Violation(f"{path}/+{i}", "degenerate-sum",
                                         "choice arm performs no communication"))
        for i, k in enumerate(children(t)):
            walk(k, f"{path}/{i}", bound, unguarded)

    walk(t, path, frozenset(), frozenset())
    return out


def _reaches_comm(p: Any) -> bool:
    if isinstance(p, (Send, Recv)):
        return True
    if isinstance(p, (OpCall, Rec)):
        return _reaches_comm(p.cont if isinstance(p, OpCall) else p.body)
    if isinstance(p, (Sum, Cond)):
        return all(_reaches_comm(k) for k in children(p))
    return False


def wf_global(g: GlobalPar | GlobalType) -> list[Violation]:
    """Structural well-formedness of a global type (projection-definedness is
    checked separately).  Violations are returned, never raised."""
    threads = threads_of(g)
    out: list[Violation] = []
    for i, th in enumerate(threads):
        out.extend(_structure_violations(th, f"/thread {i}"))
    for (i, a), (j, b) in combinations(enumerate(threads), 2):
        for p in sorted(pa(a) & pa(b)):
            shared = labels_with(a, p) & labels_with(b, p)
            if shared:
                out.append(Violation(
                    f"/thread {i}|thread {j}", "shared-label",
                    f"threads share label(s) {', '.join(sorted(shared))} "
                    f"on common participant {p}"))
    return out


def wf_monitor(m: Any) -> list[Violation]:
    out: list[Violation] = []
    for i, th in enumerate(threads_of(m)):
        out.extend(_structure_violations(th, f"/thread {i}"))
    return out


def wf_process(p: Any) -> list[Violation]:
    out: list[Violation] = []
    threads = threads_of(p)
    for i, th in enumerate(threads):
        out.extend(_structure_violations(th, f"/thread {i}"))
        if len(channels(th)) > 1:
            out.append(Violation(f"/thread {i}", "many-channels",
                                 "a single-threaded process uses more than one channel"))
    if len(channels(p)) > 1 and len(threads) > 1:
        out.append(Violation("", "many-channels", "parallel threads use different channels"))
    return out
