from __future__ import annotations

import random
import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termgen import gen_expr, gen_global, gen_monitor, gen_process, gen_type

from adaptsess.surface import (
    ParseError, ScenarioError, WellFormednessError, load_scenario, parse_expr, parse_global,
    parse_monitor, parse_process, parse_process_par, parse_scenario, parse_type, pretty,
    pretty_expr, tokenize,
)
from adaptsess.syntax import (
    Binary, Cond, Lit, Name, OpCall, SessionChan, Sum, TIn, UserChan, canonicalize,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_tokens_carry_positions():
    toks = tokenize("p -> q\n  : a(Int)")
    assert [(t.text, t.line, t.col) for t in toks[:4]] == [
        ("p", 1, 1), ("->", 1, 3), ("q", 1, 6), (":", 2, 3)]
    assert toks[-1].kind == "eof"


def test_labels_may_carry_relabelling_suffixes():
    g = parse_global("p -> q : a#2(Int). end")
    assert g.threads[0].branches[0].label == "a#2"


def test_parse_error_points_at_the_offending_token():
    with pytest.raises(ParseError) as exc:
        parse_global("p -> q : a(Int) .\n  end ]", file="g.txt")
    err = exc.value
    assert (err.span.file, err.span.line, err.span.column) == ("g.txt", 2, 7)
    assert "end of input" in str(err)


def test_unbound_variable_is_a_parse_error():
    with pytest.raises(ParseError, match="unbound variable t"):
        parse_monitor("p?a(Int). t")


def test_ill_formed_terms_are_rejected():
    with pytest.raises(WellFormednessError) as exc:
        parse_monitor("p?{a(Int). end, a(Bool). end}")
    assert exc.value.violations[0].code == "duplicate-label"
    with pytest.raises(WellFormednessError):
        parse_global("p -> q : a(). end | q -> r : a(). end")
    with pytest.raises(WellFormednessError):
        parse_monitor("p?a(). end | q!a(). end")


def test_process_syntax():
    p = parse_process('rec X. y?a(x). if x < 3 then op[w]. y!b(x). X else y!c("s"). X')
    body = p.body.cont
    assert isinstance(body, Cond)
    assert body.guard == Binary("<", Name("x"), Lit.of(3))
    assert isinstance(body.then, OpCall)
    s = parse_process("y?a(). 0 + y?b(). 0")
    assert isinstance(s, Sum)
    q = parse_process_par("s1[p]!a(1). 0 | s1[p]?b(v). 0")
    assert q.threads[0].chan == SessionChan("s1", "p")
    assert parse_process("y!a(). 0").chan == UserChan("y")


def test_process_types_may_omit_partners():
    t = parse_type("_?{a(Int). end, b(_). end}")
    th = t.threads[0]
    assert isinstance(th, TIn) and th.partner is None
    assert pretty(t) == "_?{a(Int). end, b(_). end}"


def test_pretty_expr_parenthesises_by_precedence():
    e = parse_expr("(1 + 2) * 3 < 4 && not true || false")
    assert parse_expr(pretty_expr(e)) == e
    assert pretty_expr(parse_expr("1 - (2 - 3)")) != pretty_expr(parse_expr("1 - 2 - 3"))


def test_string_escapes_round_trip():
    e = parse_expr(r'"a\"b\\c"')
    assert e == Lit.of('a"b\\c')
    assert parse_expr(pretty_expr(e)) == e


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip_property(seed):
    rng = random.Random(seed)
    assert parse_global(pretty(t := gen_global(rng))) == canonicalize(t)
    assert parse_monitor(pretty(t := gen_monitor(rng))) == canonicalize(t)
    assert parse_type(pretty(t := gen_type(rng))) == canonicalize(t)
    assert parse_process_par(pretty(t := gen_process(rng))) == canonicalize(t)
    assert parse_expr(pretty_expr(e := gen_expr(rng))) == e


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


def test_shipped_scenarios_load():
    intro = load_scenario(SCENARIOS / "intro.sess")
    assert list(intro.globals) == ["G0"]
    assert intro.data == {"stores": 1, "londonOpen": False, "londonServed": False}
    assert intro.ops["newStore"].updates[0][0] == "stores"
    assert intro.rule("openLondon").kill == frozenset()
    assert intro.seed == 1
    company = load_scenario(SCENARIOS / "company.sess")
    assert company.rule("fire").kill == frozenset({"aF"})
    assert len(company.all_globals()) == 2


BASE = """
[globals]
G = p -> q : a(Int). end
[collection]
P = y!a(1). 0
Q = y?a(x). 0
[data]
n = 0
"""


@pytest.mark.parametrize("extra, message", [
    ("[ops]\nw: m := 1\n", "a key declared in [data]"),
    ("[ops]\nw: n := true\n", "an expression of sort Int"),
    ("[ops]\nw: n := 1, n := 2\n", "distinct keys"),
    ("[rules]\nrule r when n < 1 new p -> q : b(). end kill p\n", "killed participants"),
    ("[rules]\nrule r when n new p -> q : b(). end\n", "sort Bool"),
    ("[rules]\nrule r when n < 1 new p -> q : b(). end session H\n", "a name from [globals]"),
    ("[collection]\nR = s[p]!a(1). 0\n", "a process over a user channel"),
    ("[collection]\nR = y!a(1). op[w]. 0\n", "a declared operation"),
    ("[collection]\nP = y!a(2). 0\n", "a unique process name"),
    ("[rules]\nrule r when n < 1 new p -> q : a(). end. q -> r : b(). end\n", "expected 'rule'"),
])
def test_scenario_validation(extra, message):
    with pytest.raises(ParseError, match=re.escape(message)):
        parse_scenario(BASE + extra)


def test_semantic_errors_are_scenario_errors():
    with pytest.raises(ScenarioError):
        parse_scenario(BASE + "[ops]\nw: m := 1\n")
    with pytest.raises(ParseError) as exc:
        parse_scenario(BASE + "[nonsense]\n")
    assert not isinstance(exc.value, ScenarioError)


def test_rule_with_undefined_projection_is_rejected():
    bad = "[rules]\nrule r when n < 1 new p -> q : {a(). q -> r : c(). end, b(). end}\n"
    with pytest.raises(ScenarioError, match="defined projections"):
        parse_scenario(BASE + bad)


def test_several_globals_need_session_clauses():
    text = BASE.replace("[collection]", "H = q -> p : b(). end\n[collection]")
    with pytest.raises(ScenarioError, match="'session' clause"):
        parse_scenario(text + "[rules]\nrule r when n < 1 new p -> q : c(). end\n")
    sc = parse_scenario(text + "[rules]\nrule r when n < 1 new p -> q : c(). end session H\n")
    assert sc.rule("r").session == "H"
