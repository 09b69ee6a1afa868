from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termgen import gen_global, gen_monitor, gen_process

from adaptsess.surface import Parser, parse_global, parse_monitor, parse_process
from adaptsess.syntax import (
    END, NIL, Binary, Branch, EvalError, GlobalPar, In, LabelClash, Lit, MonitorPar, Name, Rec, Sort,
    Send, UnguardedRecursion, UserChan, Var, canonicalize, equal_regular, evaluate, free_vars,
    labels, pa, par_equal, partners, subst_channel, subst_values, threads_of, unfold,
    unfold_head, wf_global, wf_process,
)


def test_sort_names_collapse_to_str_but_print_as_written():
    s = Sort.of("Item", "Int")
    assert s.parts == ("Str", "Int")
    assert str(s) == "(Item,Int)"
    assert s == Sort.of("Date", "Int")


def test_sort_wildcard_is_compatible_with_anything():
    assert Sort.of("_").compatible(Sort.of("Bool"))
    assert not Sort.of("Int").compatible(Sort.of("Bool"))
    assert not Sort.of("Int").compatible(Sort.of("Int", "Int"))


def test_literals_keep_their_sort():
    assert Lit.of(True) != Lit.of(1)


@pytest.mark.parametrize("e, env, want", [
    (Binary("+", Lit.of(2), Lit.of(3)), {}, 5),
    (Binary("<", Name("x"), Lit.of(5)), {"x": 3}, True),
    (Binary("&&", Lit.of(False), Name("unbound")), {}, False),
    (Binary("==", Lit.of("a"), Lit.of("a")), {}, True),
])
def test_evaluate(e, env, want):
    assert evaluate(e, env) == want


def test_evaluate_unbound_name():
    with pytest.raises(EvalError):
        evaluate(Name("x"))


def test_unfold_substitutes_the_whole_binder():
    t = Rec("t", In("p", (Branch("a", Sort.of(), Var("t")),)))
    assert unfold(t) == In("p", (Branch("a", Sort.of(), t),))
    assert unfold(END) is END


def test_unfold_head_rejects_unguarded_recursion():
    with pytest.raises(UnguardedRecursion):
        unfold_head(Rec("t", Var("t")))


def test_equal_regular_identifies_unrollings():
    a = parse_monitor("rec t. p?a(Int). t").threads[0]
    b = parse_monitor("p?a(Int). rec u. p?a(Int). u").threads[0]
    c = parse_monitor("rec t. p?a(Bool). t").threads[0]
    assert equal_regular(a, b)
    assert not equal_regular(a, c)


def test_equal_regular_ignores_branch_order():
    a = parse_monitor("p?{a(Int). end, b(Int). end}").threads[0]
    b = parse_monitor("p?{b(Int). end, a(Int). end}").threads[0]
    assert equal_regular(a, b)


def test_par_equal_is_multiset_equality():
    a = parse_monitor("p?a(Int). end | q!b(Int). end")
    b = parse_monitor("q!b(Int). end | p?a(Int). end")
    assert par_equal(a, b)
    assert not par_equal(a, parse_monitor("p?a(Int). end"))


def test_monitor_parallel_requires_disjoint_labels():
    a = In("p", (Branch("a", Sort.of(), END),))
    with pytest.raises(LabelClash) as exc:
        MonitorPar((a, a))
    assert exc.value.labels == ["a"]


def test_participants_labels_partners():
    g = parse_global("p -> q : a(Int). q -> r : b(). end")
    assert pa(g) == {"p", "q", "r"}
    assert labels(g) == {"a", "b"}
    assert partners(parse_monitor("p?a(Int). r!b(). end")) == {"p", "r"}


def test_canonical_binders():
    m = parse_monitor("rec u. p?a(Int). rec w. p!b(). w")
    assert canonicalize(m) == parse_monitor("rec t. p?a(Int). rec t1. p!b(). t1")
    p = parse_process("rec Y. y!a(1). Y")
    assert canonicalize(p) == parse_process("rec X. y!a(1). X")


def test_substitutions():
    p = parse_process("y?a(x). y!b(x + 1). 0")
    q = subst_values(p.cont, {"x": 4})
    assert evaluate(q.args[0]) == 5
    # a receive rebinds the name
    assert subst_values(p, {"x": 4}) == p
    r = subst_channel(p, UserChan("y"), UserChan("z"))
    assert r.chan == UserChan("z") and r.cont.chan == UserChan("z")


def parse_global_unchecked(text):
    return GlobalPar(tuple(Parser(text).g_par()))


def test_wf_global_reports_problems():
    codes = {v.code for v in wf_global(parse_global_unchecked("p -> p : a(). end"))}
    assert "self-communication" in codes


def test_wf_global_shared_labels_between_threads():
    g = parse_global_unchecked("p -> q : a(). end | q -> r : a(). end")
    assert [v.code for v in wf_global(g)] == ["shared-label"]


def test_wf_process_single_channel_per_thread():
    p = Send(UserChan("y"), "a", (), Send(UserChan("z"), "b", (), NIL))
    assert any(v.code == "many-channels" for v in wf_process(p))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_canonicalize_is_idempotent_and_keeps_meaning(seed):
    rng = random.Random(seed)
    for t in (gen_global(rng), gen_monitor(rng), gen_process(rng)):
        c = canonicalize(t)
        assert canonicalize(c) == c
        assert all(equal_regular(x, y) for x, y in zip(threads_of(t), threads_of(c)))
        assert labels(c) == labels(t)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_terms_are_closed(seed):
    rng = random.Random(seed)
    for t in (gen_global(rng), gen_monitor(rng), gen_process(rng)):
        assert all(not free_vars(th) for th in threads_of(t))
