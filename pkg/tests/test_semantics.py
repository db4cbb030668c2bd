from __future__ import annotations

import itertools
import random

import pytest

from gspmc.semantics import NotEnabled, UnknownAction, enabled, fire, successors

import _gen
import _oracle
from conftest import config


class TestEnabled:
    def test_smoke_table(self, smoke):
        p = smoke
        assert enabled(p, config(p, Ask=1), p.action("Smoke"))
        assert not enabled(p, config(p, Env=1), p.action("Smoke"))  # no sender
        # guard G2 = {Idle, Pick, Report}: any Env process disables Choose
        assert enabled(p, config(p, Pick=2), p.action("Choose"))
        assert not enabled(p, config(p, Pick=2, Env=1), p.action("Choose"))
        assert enabled(p, config(p, Env=1), p.action("i"))
        assert not enabled(p, config(p, Env=1, Pick=1), p.action("i"))  # G1

    def test_maximal_fires_below_declared_arity(self, smoke):
        # one Pick process is enough for the 2-maximal variant...
        assert enabled(smoke, config(smoke, Pick=1), smoke.action("Choose"))

    def test_sender_needs_full_arity(self, smoke_2sender):
        # ...but not for the 2-sender one
        p = smoke_2sender
        assert not enabled(p, config(p, Pick=1), p.action("Choose"))
        assert enabled(p, config(p, Pick=2), p.action("Choose"))

    def test_all_zero_config_rejected(self, smoke):
        with pytest.raises(ValueError, match="no processes"):
            enabled(smoke, config(smoke), smoke.action("i"))


class TestFire:
    def test_smoke_broadcast(self, smoke):
        q = config(smoke, Ask=3, Env=2)
        out = fire(smoke, q, smoke.action("Smoke"))
        # one Ask sends to Pick; the other two follow Ask->Pick; both Env->Idle
        assert out.successor == config(smoke, Idle=2, Pick=3)
        assert out.participation == config(smoke, Ask=1)

    def test_choose_two_sender(self, smoke_2sender):
        p = smoke_2sender
        out = fire(p, config(p, Idle=1, Pick=4), p.action("Choose"))
        assert out.successor == config(p, Idle=3, Report=2)
        assert out.participation == config(p, Pick=2)

    def test_choose_two_maximal_partial(self, smoke):
        out = fire(smoke, config(smoke, Idle=4, Pick=1), smoke.action("Choose"))
        # only one Pick available: u = min(q, v) pointwise
        assert out.successor == config(smoke, Idle=4, Report=1)
        assert out.participation == config(smoke, Pick=1)

    def test_fire_requires_enabled(self, smoke):
        with pytest.raises(NotEnabled):
            fire(smoke, config(smoke, Env=1), smoke.action("Smoke"))

    def test_accepts_action_name(self, smoke):
        by_name = fire(smoke, config(smoke, Env=1), "i")
        by_obj = fire(smoke, config(smoke, Env=1), smoke.action("i"))
        assert by_name.successor == by_obj.successor

    def test_unknown_action_name(self, smoke):
        with pytest.raises(UnknownAction):
            fire(smoke, config(smoke, Env=1), "nope")

    def test_successors_enumerates_enabled_only(self, smoke):
        q = config(smoke, Env=1, Ask=1)
        outs = successors(smoke, q)
        assert sorted(o.action for o in outs) == ["Smoke", "i"]


def all_configs(n_states, total):
    """Every count vector over n_states with at least one process and at
    most `total` in all."""
    for tot in range(1, total + 1):
        for cuts in itertools.combinations(range(tot + n_states - 1),
                                           n_states - 1):
            prev, vec = -1, []
            for c in cuts:
                vec.append(c - prev - 1)
                prev = c
            vec.append(tot + n_states - 2 - prev)
            yield tuple(vec)


class TestOracleAgreement:
    def test_smoke_exhaustive(self, smoke):
        self._check(smoke, total=5)

    def test_smoke_2sender_exhaustive(self, smoke_2sender):
        self._check(smoke_2sender, total=5)

    def test_random_protocols(self):
        rng = random.Random(20260814)
        for _ in range(40):
            p = _gen.random_protocol(rng, certified_only=False)
            self._check(p, total=4)

    def _check(self, p, total):
        for q in all_configs(p.n_states, total):
            expected = {
                (name, tuple(succ.get(s, 0) for s in range(p.n_states)))
                for name, succ in _oracle.multiset_successors(
                    p, _oracle.as_counter(q))}
            got = {(o.action, o.successor) for o in successors(p, q)}
            assert got == expected, (p.state_names, q)
            for a in p.actions:
                assert enabled(p, q, a) == (
                    a.name in {name for name, _ in expected})

    def test_conservation(self, smoke):
        rng = random.Random(7)
        for _ in range(200):
            q = tuple(rng.randrange(4) for _ in range(smoke.n_states))
            if sum(q) == 0:
                continue
            for out in successors(smoke, q):
                a = smoke.action(out.action)
                assert sum(out.successor) == sum(q)
                if a.kind == "sender":
                    assert sum(out.participation) == a.arity
                else:
                    assert 1 <= sum(out.participation) <= a.arity
