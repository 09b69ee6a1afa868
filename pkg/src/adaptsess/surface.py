"""Concrete syntax: lexer, recursive-descent parsers, pretty-printers and the
`.sess` scenario format.  The grammar is documented in docs/GRAMMAR.md."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .syntax import (
    ANY_SORT, END, NIL, Binary, Branch, Comm, Cond, End, Expr, GlobalPar, In, Lit,
    MonitorPar, Name, Nil, OpCall, Out, Prefix, ProcessPar, Rec, Recv, Send, SessionChan,
    Sort, Sum, TIn, TOut, TypePar, Unary, UserChan, Var, Violation, canonicalize, channels,
    expr_names, evaluate, pa, sort_of_value, subterms, wf_global, wf_monitor, wf_process,
)
from .projection import projections_defined
from .typecheck import Env, TypingError, type_expr


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, span: SourceSpan, expected: str, found: str = ""):
        self.span = span
        self.expected = expected
        self.found = found
        msg = f"{span}: expected {expected}"
        if found:
            msg += f", found {found}"
        super().__init__(msg)


class ScenarioError(ParseError):
    """A syntactically valid scenario that fails a semantic check."""


class WellFormednessError(ScenarioError):
    def __init__(self, span: SourceSpan, violations: list[Violation]):
        self.violations = violations
        super().__init__(span, "a well-formed term",
                         "; ".join(str(v) for v in violations))


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\#\d+)*)
  | (?P<sym>->|:=|==|&&|\|\||[<+\-*!?.,:(){}\[\]|=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | str | sym | eof
    text: str
    line: int
    col: int

    def __str__(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(SourceSpan(file, line, pos - line_start + 1, 1),
                             "a token", repr(text[pos]))
        kind = m.lastgroup
        tok_text = m.group()
        if kind != "ws":
            toks.append(Token(kind, tok_text, line, pos - line_start + 1))
        nl = tok_text.count("\n")
        if nl:
            line += nl
            line_start = pos + tok_text.rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


KEYWORDS = {"rec", "end", "if", "then", "else", "op", "true", "false", "not"}


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0

    # -- token helpers -----------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def span(self, tok: Token | None = None) -> SourceSpan:
        tok = tok or self.peek()
        return SourceSpan(self.file, tok.line, tok.col, max(len(tok.text), 1))

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("sym", "ident") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(self.span(), repr(text), str(self.peek()))
        tok = self.peek()
        self.i += 1
        return tok

    def ident(self, what: str = "an identifier") -> str:
        t = self.peek()
        if t.kind != "ident" or t.text in KEYWORDS:
            raise ParseError(self.span(), what, str(t))
        self.i += 1
        return t.text

    def is_ident(self, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind == "ident" and t.text not in KEYWORDS

    def done(self) -> None:
        if self.peek().kind != "eof":
            raise ParseError(self.span(), "end of input", str(self.peek()))

    def unbound(self, tok: Token, name: str) -> ParseError:
        return ParseError(self.span(tok), f"a bound recursion variable", f"unbound variable {name}")

    # -- payloads ------------------------------------------------------------

    def sort_payload(self) -> Sort:
        self.expect("(")
        names: list[str] = []
        if not self.at(")"):
            names.append(self.ident("a sort"))
            while self.accept(","):
                names.append(self.ident("a sort"))
        self.expect(")")
        return Sort.of(*names)

    def branches(self, cont: Callable[[], Any]) -> tuple[Branch, ...]:
        def one() -> Branch:
            label = self.ident("a label")
            sort = self.sort_payload()
            body = cont() if self.accept(".") else END
            return Branch(label, sort, body)

        if self.accept("{"):
            bs = [one()]
            while self.accept(","):
                bs.append(one())
            self.expect("}")
            return tuple(bs)
        return (one(),)

    # -- global types -------------------------------------------------------

    def g_thread(self, bound: frozenset[str] = frozenset()) -> Any:
        tok = self.peek()
        if self.accept("rec"):
            v = self.ident("a recursion variable")
            self.expect(".")
            return Rec(v, self.g_thread(bound | {v}))
        if self.accept("end"):
            return END
        if self.accept("("):
            t = self.g_thread(bound)
            self.expect(")")
            return t
        if self.is_ident() and self.at("->", 1):
            p = self.ident()
            self.expect("->")
            q = self.ident("a participant")
            self.expect(":")
            return Comm(p, q, self.branches(lambda: self.g_thread(bound)))
        if self.is_ident():
            name = self.ident()
            if name not in bound:
                raise self.unbound(tok, name)
            return Var(name)
        raise ParseError(self.span(), "a global type", str(tok))

    def g_par(self) -> list[Any]:
        threads: list[Any] = []
        while True:
            if self.at("("):
                # a parenthesised item may itself be a parallel
                save = self.i
                self.i += 1
                inner = self.g_par()
                if self.accept(")"):
                    threads.extend(inner)
                else:
                    self.i = save
                    threads.append(self.g_thread())
            else:
                threads.append(self.g_thread())
            if not self.accept("|"):
                return threads

    # -- monitors and types --------------------------------------------------

    def m_thread(self, bound: frozenset[str] = frozenset(), types: bool = False) -> Any:
        tok = self.peek()
        if self.accept("rec"):
            v = self.ident("a recursion variable")
            self.expect(".")
            return Rec(v, self.m_thread(bound | {v}, types))
        if self.accept("end"):
            return END
        if self.accept("("):
            t = self.m_thread(bound, types)
            self.expect(")")
            return t
        if self.is_ident() and (self.at("!", 1) or self.at("?", 1)):
            partner: str | None = self.ident()
            if partner == ANY_SORT:
                if not types:
                    raise ParseError(self.span(tok), "a participant", "'_'")
                partner = None
            d = self.peek().text
            self.i += 1
            bs = self.branches(lambda: self.m_thread(bound, types))
            if types:
                return (TIn if d == "?" else TOut)(partner, bs)
            return (In if d == "?" else Out)(partner, bs)
        if self.is_ident():
            name = self.ident()
            if name not in bound:
                raise self.unbound(tok, name)
            return Var(name)
        raise ParseError(self.span(), "a monitor" if not types else "a type", str(tok))

    def m_par(self, types: bool = False) -> list[Any]:
        threads = [self.m_thread(types=types)]
        while self.accept("|"):
            threads.append(self.m_thread(types=types))
        return threads

    # -- expressions ---------------------------------------------------------

    def expr(self) -> Expr:
        return self._or()

    def _or(self) -> Expr:
        e = self._and()
        while self.accept("||"):
            e = Binary("||", e, self._and())
        return e

    def _and(self) -> Expr:
        e = self._cmp()
        while self.accept("&&"):
            e = Binary("&&", e, self._cmp())
        return e

    def _cmp(self) -> Expr:
        e = self._add()
        if self.at("==") or self.at("<"):
            op = self.peek().text
            self.i += 1
            e = Binary(op, e, self._add())
        return e

    def _add(self) -> Expr:
        e = self._mul()
        while self.at("+") or self.at("-"):
            op = self.peek().text
            self.i += 1
            e = Binary(op, e, self._mul())
        return e

    def _mul(self) -> Expr:
        e = self._unary()
        while self.accept("*"):
            e = Binary("*", e, self._unary())
        return e

    def _unary(self) -> Expr:
        if self.accept("not"):
            return Unary("not", self._unary())
        if self.at("-"):
            self.i += 1
            if self.peek().kind == "int":
                return Lit("Int", -int(self._take().text))
            return Unary("-", self._unary())
        return self._atom()

    def _take(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def _atom(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.i += 1
            return Lit("Int", int(t.text))
        if t.kind == "str":
            self.i += 1
            return Lit("Str", json.loads(t.text))
        if self.accept("true"):
            return Lit("Bool", True)
        if self.accept("false"):
            return Lit("Bool", False)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.is_ident():
            return Name(self.ident())
        raise ParseError(self.span(), "an expression", str(t))

    # -- processes -----------------------------------------------------------

    def p_channel(self) -> Any:
        name = self.ident("a channel")
        if self.accept("["):
            part = self.ident("a participant")
            self.expect("]")
            return SessionChan(name, part)
        return UserChan(name)

    def p_pre(self, bound: frozenset[str] = frozenset()) -> Any:
        tok = self.peek()
        if self.accept("rec"):
            v = self.ident("a process variable")
            self.expect(".")
            return Rec(v, self.p_pre(bound | {v}))
        if self.accept("if"):
            guard = self.expr()
            self.expect("then")
            then = self.p_pre(bound)
            self.expect("else")
            return Cond(guard, then, self.p_pre(bound))
        if self.accept("op"):
            self.expect("[")
            name = self.ident("an operation name")
            self.expect("]")
            return OpCall(name, self.p_pre(bound) if self.accept(".") else NIL)
        if tok.kind == "int" and tok.text == "0":
            self.i += 1
            return NIL
        if self.accept("("):
            p = self.p_sum(bound)
            self.expect(")")
            return p
        session_chan = self.at("[", 1) and self.at("]", 3) and (self.at("!", 4) or self.at("?", 4))
        if self.is_ident() and (self.at("!", 1) or self.at("?", 1) or session_chan):
            chan = self.p_channel()
            if self.accept("!"):
                label = self.ident("a label")
                self.expect("(")
                args: list[Expr] = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                cont = self.p_pre(bound) if self.accept(".") else NIL
                return Send(chan, label, tuple(args), cont)
            self.expect("?")
            label = self.ident("a label")
            self.expect("(")
            binders: list[str] = []
            if not self.at(")"):
                binders.append(self.ident("a variable"))
                while self.accept(","):
                    binders.append(self.ident("a variable"))
            self.expect(")")
            cont = self.p_pre(bound) if self.accept(".") else NIL
            return Recv(chan, label, tuple(binders), cont)
        if self.is_ident():
            name = self.ident()
            if name not in bound:
                raise self.unbound(tok, name)
            return Var(name)
        raise ParseError(self.span(), "a process", str(tok))

    def p_sum(self, bound: frozenset[str] = frozenset()) -> Any:
        p = self.p_pre(bound)
        while self.accept("+"):
            p = Sum(p, self.p_pre(bound))
        return p

    def p_par(self) -> list[Any]:
        threads = [self.p_sum()]
        while self.accept("|"):
            threads.append(self.p_sum())
        return threads


# ---------------------------------------------------------------------------
# entry points for terms
# ---------------------------------------------------------------------------


def _checked(span: SourceSpan, violations: list[Violation]) -> None:
    if violations:
        raise WellFormednessError(span, violations)


def parse_global(text: str, file: str = "<input>") -> GlobalPar:
    ps = Parser(text, file)
    start = ps.span()
    g = GlobalPar(tuple(ps.g_par()))
    ps.done()
    _checked(start, wf_global(g))
    return g


def parse_monitor(text: str, file: str = "<input>") -> MonitorPar:
    ps = Parser(text, file)
    start = ps.span()
    threads = tuple(ps.m_par())
    ps.done()
    _checked(start, wf_monitor(threads))
    return _build(MonitorPar, threads, start)


def parse_type(text: str, file: str = "<input>") -> TypePar:
    ps = Parser(text, file)
    start = ps.span()
    threads = tuple(ps.m_par(types=True))
    ps.done()
    _checked(start, wf_monitor(threads))
    return _build(TypePar, threads, start)


def _build(cls: type, threads: tuple, span: SourceSpan) -> Any:
    try:
        return cls(threads)
    except ValueError as exc:
        raise WellFormednessError(span, [Violation("", "shared-label", str(exc))]) from exc


def parse_process(text: str, file: str = "<input>") -> Any:
    """Parse a single-threaded process."""
    ps = Parser(text, file)
    start = ps.span()
    p = ps.p_sum()
    ps.done()
    _checked(start, wf_process(p))
    return p


def parse_process_par(text: str, file: str = "<input>") -> ProcessPar:
    ps = Parser(text, file)
    start = ps.span()
    pp = ProcessPar(tuple(ps.p_par()))
    ps.done()
    _checked(start, wf_process(pp))
    return pp


def parse_expr(text: str, file: str = "<input>") -> Expr:
    ps = Parser(text, file)
    e = ps.expr()
    ps.done()
    return e


# ---------------------------------------------------------------------------
# pretty printing
# ---------------------------------------------------------------------------


def _lit(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


def pretty_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        return _lit(e.value)
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Unary):
        inner = pretty_expr(e.operand)
        if isinstance(e.operand, (Binary, Unary)) or (
                isinstance(e.operand, Lit) and e.op == "-"):
            inner = f"({inner})"
        return f"not {inner}" if e.op == "not" else f"-{inner}"

    def side(x: Expr) -> str:
        s = pretty_expr(x)
        return f"({s})" if isinstance(x, Binary) else s

    return f"{side(e.left)} {e.op} {side(e.right)}"


def _branches(bs: tuple[Branch, ...], show: Callable[[Any], str]) -> str:
    parts = [f"{b.label}{b.sort}. {show(b.cont)}" for b in bs]
    return parts[0] if len(parts) == 1 else "{" + ", ".join(parts) + "}"


def _show_single(t: Any) -> str:
    if isinstance(t, End):
        return "end"
    if isinstance(t, Nil):
        return "0"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Rec):
        return f"rec {t.var}. {_show_pre(t.body)}"
    if isinstance(t, Comm):
        return f"{t.sender} -> {t.receiver} : {_branches(t.branches, _show_single)}"
    if isinstance(t, Prefix):
        who = "_" if t.partner is None else t.partner
        return f"{who}{t.direction}{_branches(t.branches, _show_single)}"
    if isinstance(t, Send):
        args = ", ".join(pretty_expr(a) for a in t.args)
        return f"{t.chan}!{t.label}({args}). {_show_pre(t.cont)}"
    if isinstance(t, Recv):
        return f"{t.chan}?{t.label}({', '.join(t.binders)}). {_show_pre(t.cont)}"
    if isinstance(t, OpCall):
        return f"op[{t.op}]. {_show_pre(t.cont)}"
    if isinstance(t, Cond):
        return f"if {pretty_expr(t.guard)} then {_show_pre(t.then)} else {_show_pre(t.orelse)}"
    if isinstance(t, Sum):
        right = _show_single(t.right)
        if isinstance(t.right, Sum):
            right = f"({right})"
        return f"{_show_single(t.left)} + {right}"
    raise TypeError(f"cannot print {t!r}")


def _show_pre(t: Any) -> str:
    """Print in a position where only prefix-level terms may appear."""
    s = _show_single(t)
    return f"({s})" if isinstance(t, Sum) else s


def pretty(x: Any) -> str:
    """Print the canonical form of any term; `parse(pretty(x))` gives back
    `canonicalize(x)`."""
    if isinstance(x, (Lit, Name, Unary, Binary)):
        return pretty_expr(x)
    x = canonicalize(x)
    if isinstance(x, (GlobalPar, MonitorPar, TypePar, ProcessPar)):
        if not x.threads:
            return "0" if isinstance(x, ProcessPar) else "end"
        return " | ".join(_show_single(t) for t in x.threads)
    return _show_single(x)


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OpSpec:
    name: str
    updates: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class AdaptRule:
    name: str
    when: Expr
    new_global: GlobalPar
    kill: frozenset[str]
    set: tuple[tuple[str, Expr], ...]
    session: str | None = None


@dataclass
class Scenario:
    globals: dict[str, GlobalPar] = field(default_factory=dict)
    collection: dict[str, Any] = field(default_factory=dict)
    data: dict[str, Any] = field(default_factory=dict)
    ops: dict[str, OpSpec] = field(default_factory=dict)
    rules: list[AdaptRule] = field(default_factory=list)
    seed: int | None = None
    file: str = "<input>"

    def rule(self, name: str) -> AdaptRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def all_globals(self) -> list[GlobalPar]:
        """Globals that may ever be started: the initial ones and every
        global an adaptation rule can produce."""
        return list(self.globals.values()) + [r.new_global for r in self.rules]


_SECTIONS = ("globals", "collection", "data", "ops", "rules", "settings")


class _ScenarioParser(Parser):
    def __init__(self, text: str, file: str):
        super().__init__(text, file)
        self.sc = Scenario(file=file)
        self.data_sorts: dict[str, str] = {}

    def at_section(self) -> bool:
        return self.at("[") and self.peek(1).kind == "ident" and self.at("]", 2)

    def at_entry_end(self) -> bool:
        return self.peek().kind == "eof" or self.at_section()

    def dup(self, tok: Token, what: str, name: str) -> ParseError:
        return ScenarioError(self.span(tok), f"a unique {what} name", f"duplicate {name}")

    def run(self) -> Scenario:
        while self.peek().kind != "eof":
            tok = self.peek()
            if not self.at_section():
                raise ParseError(self.span(), "a section header like [globals]", str(tok))
            self.i += 1
            name = self.ident()
            self.expect("]")
            if name not in _SECTIONS:
                raise ParseError(self.span(tok), f"one of {', '.join(_SECTIONS)}", name)
            getattr(self, f"section_{name}")()
        self.validate()
        return self.sc

    def section_globals(self) -> None:
        while not self.at_entry_end():
            tok = self.peek()
            name = self.ident("a global type name")
            self.expect("=")
            start = self.span()
            g = GlobalPar(tuple(self.g_par()))
            _checked(start, wf_global(g))
            if name in self.sc.globals:
                raise self.dup(tok, "global", name)
            self.sc.globals[name] = g

    def section_collection(self) -> None:
        while not self.at_entry_end():
            tok = self.peek()
            name = self.ident("a process name")
            self.expect("=")
            start = self.span()
            p = self.p_sum()
            _checked(start, wf_process(p))
            if any(not isinstance(c, UserChan) for c in channels(p)):
                raise ScenarioError(start, "a process over a user channel", "a session channel")
            if name in self.sc.collection:
                raise self.dup(tok, "process", name)
            self.sc.collection[name] = (p, start)

    def section_data(self) -> None:
        while not self.at_entry_end():
            tok = self.peek()
            key = self.ident("a data key")
            self.expect("=")
            etok = self.peek()
            e = self.expr()
            if expr_names(e):
                raise ParseError(self.span(etok), "a constant", "a name")
            if key in self.sc.data:
                raise self.dup(tok, "data key", key)
            v = evaluate(e)
            self.sc.data[key] = v
            self.data_sorts[key] = sort_of_value(v)

    def updates(self) -> list[tuple[str, Expr, Token]]:
        out = []
        while self.is_ident() and self.at(":=", 1):
            tok = self.peek()
            key = self.ident()
            self.expect(":=")
            out.append((key, self.expr(), tok))
            if not self.accept(","):
                break
        return out

    def section_ops(self) -> None:
        while not self.at_entry_end():
            tok = self.peek()
            name = self.ident("an operation name")
            self.expect(":")
            ups = self.updates()
            if name in self.sc.ops:
                raise self.dup(tok, "operation", name)
            self._check_updates(ups)
            self.sc.ops[name] = OpSpec(name, tuple((k, e) for k, e, _ in ups))

    def section_settings(self) -> None:
        while not self.at_entry_end():
            tok = self.peek()
            key = self.ident("a setting")
            self.expect("=")
            if key != "seed" or self.peek().kind != "int":
                raise ParseError(self.span(tok), "seed = <integer>", key)
            self.sc.seed = int(self._take().text)

    def section_rules(self) -> None:
        while not self.at_entry_end():
            tok = self.expect("rule")
            name = self.ident("a rule name")
            when: Expr | None = None
            new = GlobalPar(())
            kill: list[str] = []
            sets: list[tuple[str, Expr, Token]] = []
            session = None
            while True:
                ftok = self.peek()
                if self.accept("when"):
                    wtok = self.peek()
                    when = self.expr()
                    self._check_expr(when, wtok, "Bool")
                elif self.accept("new"):
                    start = self.span()
                    new = GlobalPar(tuple(self.g_par()))
                    _checked(start, wf_global(new))
                    if not projections_defined(new):
                        raise ScenarioError(start, "a global type with defined projections",
                                         "an undefined projection")
                elif self.accept("kill"):
                    kill.append(self.ident("a participant"))
                    while self.accept(","):
                        kill.append(self.ident("a participant"))
                elif self.accept("set"):
                    sets = self.updates()
                    self._check_updates(sets)
                elif self.accept("session"):
                    session = self.ident("a global type name")
                    if session not in self.sc.globals:
                        raise ScenarioError(self.span(ftok), "a name from [globals]", session)
                else:
                    break
            if when is None:
                raise ParseError(self.span(tok), f"a 'when' clause in rule {name}")
            if any(r.name == name for r in self.sc.rules):
                raise self.dup(tok, "rule", name)
            if set(kill) & pa(new):
                raise ScenarioError(self.span(tok), "killed participants outside the new global",
                                 ", ".join(sorted(set(kill) & pa(new))))
            self.sc.rules.append(AdaptRule(name, when, new, frozenset(kill),
                                           tuple((k, e) for k, e, _ in sets), session))

    def _check_expr(self, e: Expr, tok: Token, want: str) -> None:
        for n in sorted(expr_names(e)):
            if n not in self.data_sorts:
                raise ScenarioError(self.span(tok), "a key declared in [data]", n)
        try:
            got = type_expr(Env(dict(self.data_sorts)), e)
        except TypingError as exc:
            raise ScenarioError(self.span(tok), "a well-sorted expression", str(exc)) from exc
        if got != want:
            raise ScenarioError(self.span(tok), f"an expression of sort {want}", got)

    def _check_updates(self, ups: list[tuple[str, Expr, Token]]) -> None:
        seen = set()
        for key, e, tok in ups:
            if key not in self.data_sorts:
                raise ScenarioError(self.span(tok), "a key declared in [data]", key)
            if key in seen:
                raise ScenarioError(self.span(tok), "distinct keys", f"{key} twice")
            seen.add(key)
            self._check_expr(e, tok, self.data_sorts[key])

    def validate(self) -> None:
        sc = self.sc
        for name, (p, span) in list(sc.collection.items()):
            for s in subterms(p):
                if isinstance(s, OpCall) and s.op not in sc.ops:
                    raise ScenarioError(span, "a declared operation", f"op[{s.op}] in {name}")
            sc.collection[name] = p
        for r in sc.rules:
            if r.session is None and len(sc.globals) > 1:
                raise ScenarioError(SourceSpan(self.file, 1, 1, 1),
                                 f"a 'session' clause in rule {r.name}",
                                 "several sessions")


def parse_scenario(text: str, file: str = "<input>") -> Scenario:
    return _ScenarioParser(text, file).run()


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))
