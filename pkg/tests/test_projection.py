from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from termgen import gen_global

from adaptsess.projection import (
    ProjectionUndefined, project, project_par, projections_defined,
)
from adaptsess.surface import parse_global, parse_monitor
from adaptsess.syntax import (
    END, Comm, In, Out, Rec, canonicalize, equal_regular, free_vars, labels, labels_with, pa,
    partners, subterms, threads_of, unfold,
)


def one(text):
    return parse_global(text).threads[0]


def mon(text):
    return parse_monitor(text).threads[0]


def test_sender_and_receiver():
    g = one("p -> q : {a(Int). q -> p : c(). end, b(Bool). end}")
    assert project(g, "p") == mon("q!{a(Int). q?c(). end, b(Bool). end}")
    assert project(g, "q") == mon("p?{a(Int). p!c(). end, b(Bool). end}")


def test_non_participant_projects_to_end():
    g = parse_global("rec t. p -> q : a(). t")
    assert project(g.threads[0], "r") == END
    assert project_par(g, "r").threads == ()


def test_recursion_is_kept_only_when_used():
    g = one("rec t. p -> q : a(). r -> p : b(). t")
    assert canonicalize(project(g, "r")) == mon("rec t. p!b(). t")
    # q sees only the first message of every round
    assert canonicalize(project(g, "q")) == mon("rec t. p?a(). t")
    # a binder that the projection never reaches again disappears
    h = one("rec t. p -> q : a(). q -> r : b(). end")
    assert project(h, "r") == mon("q?b(). end")


def test_equal_continuations_are_not_merged():
    g = one("p -> q : {a(). r -> p : c(). end, b(). r -> p : c(). end}")
    assert project(g, "r") == mon("p!c(). end")


def test_merge_of_inputs_from_one_partner():
    g = one("p -> q : {a(). q -> r : c(). end, b(). q -> r : d(). end}")
    assert project(g, "r") == mon("q?{c(). end, d(). end}")


@pytest.mark.parametrize("text, reason", [
    ("p -> q : {a(). q -> r : c(). end, b(). r -> q : d(). end}", "not all inputs"),
    ("p -> q : {a(). q -> r : c(). end, b(). p -> r : d(). end}", "different partners"),
    ("p -> q : {a(). q -> r : c(). end, b(). q -> r : c(Int). end}", "several merged inputs"),
])
def test_undefined_projection(text, reason):
    g = one(text)
    with pytest.raises(ProjectionUndefined, match=reason) as exc:
        project(g, "r")
    assert exc.value.participant == "r"
    assert not projections_defined(parse_global(text))


def test_projection_of_two_parallel_threads():
    g = parse_global("rec t. iS -> iF : SF(Item, Int). iF -> iS : FS(Date). t"
                     " | rec t. Ro -> iS : RS(Item, Int). iS -> Ro : SR(Date). t")
    assert canonicalize(project_par(g, "iS")) == parse_monitor(
        "rec t. iF!SF(Item,Int). iF?FS(Date). t | rec t. Ro?RS(Item,Int). Ro!SR(Date). t")
    assert canonicalize(project_par(g, "Ro")) == parse_monitor(
        "rec t. iS!RS(Item,Int). iS?SR(Date). t")


def _defined_pairs(g):
    """(thread, participant, projection) for every defined projection."""
    out = []
    for th in threads_of(g):
        for r in sorted(pa(th)):
            try:
                out.append((th, r, project(th, r)))
            except ProjectionUndefined:
                pass
    return out


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_projection_only_mentions_own_communications(seed):
    g = gen_global(random.Random(seed))
    for th, r, m in _defined_pairs(g):
        assert r not in partners(m)
        assert partners(m) <= pa(th)
        assert labels(m) <= labels_with(th, r)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_projection_commutes_with_unfolding(seed):
    # A binder is dropped when the participant does not occur in its body,
    # even if the body jumps back to an enclosing binder; unfolding then
    # exposes the jump.  The law holds when every binder is closed.
    g = gen_global(random.Random(seed))
    for th, r, m in _defined_pairs(g):
        if any(isinstance(x, Rec) and free_vars(x) for x in subterms(th)):
            continue
        assert equal_regular(m, project(unfold(th), r))


def test_nested_binder_without_the_participant_is_dropped():
    g = one("rec t. r -> q : c(). rec u. p -> q : d(). t")
    assert project(g, "r") == mon("q!c(). end")


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_every_message_has_matching_endpoints(seed):
    """Each label sent by p to q in a leading comm shows up as an output of
    p towards q and an input of q from p."""
    g = gen_global(random.Random(seed))
    for th in threads_of(g):
        if not isinstance(th, Comm):
            continue
        try:
            out_, in_ = project(th, th.sender), project(th, th.receiver)
        except ProjectionUndefined:
            continue
        assert isinstance(in_, In) and in_.partner == th.sender
        assert isinstance(out_, Out) and out_.partner == th.receiver
        assert {b.label for b in th.branches} == set(out_.labels) == set(in_.labels)


def test_parallel_projection_drops_end_threads():
    g = parse_global("p -> q : a(). end | r -> s : b(). end")
    assert project_par(g, "p") == parse_monitor("q!a(). end")
