"""Parameterized reachability: backward closure over upward-closed sets.

The decision procedure represents upward-closed sets of counter vectors
by their finite antichain of minimal elements and iterates a predecessor
computation until the basis stabilizes. Two orders are supported:

- component-wise (``q <= p`` pointwise), sound for unguarded protocols;
- guard-refined: component-wise AND the two vectors satisfy exactly the
  same guards (support contained in the same members of the used guard
  set). Sound for protocols whose guard-compatibility has been certified.

With n processes all starting in the initial state, the target count is
reachable for *some* n iff the backward closure of the target set
contains a vector supported on the initial state alone; the smallest
such vector's initial-state count is the minimal witness size.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from gspmc.model import MAXIMAL, Protocol


class DimensionMismatch(Exception):
    pass


class NotCertifiedWellBehaved(Exception):
    """Refused to run the guard-refined engine without certification."""


@dataclass(frozen=True)
class Wqo:
    """Ordering on counter vectors; ``guards`` is None for component-wise."""

    guards: tuple[frozenset[int], ...] | None

    def profile(self, q):
        supp = frozenset(s for s, c in enumerate(q) if c > 0)
        return tuple(supp <= g for g in self.guards)

    def leq(self, q, p):
        if len(q) != len(p):
            raise DimensionMismatch(f"{len(q)} vs {len(p)}")
        if any(a > b for a, b in zip(q, p)):
            return False
        if self.guards is None:
            return True
        return self.profile(q) == self.profile(p)


COMPONENT_WISE = Wqo(None)


def guard_refined(protocol: Protocol) -> Wqo:
    return Wqo(tuple(g.members for g in protocol.used_guards()))


def wqo_for(protocol: Protocol) -> Wqo:
    return COMPONENT_WISE if protocol.is_unguarded else guard_refined(protocol)


@dataclass(frozen=True)
class Ucs:
    """Upward-closed set: canonical antichain basis, lexicographically sorted."""

    wqo: Wqo
    basis: tuple[tuple[int, ...], ...]

    def covers(self, q):
        return any(self.wqo.leq(b, q) for b in self.basis)


def minimize(wqo, vectors):
    """Canonical antichain of minimal elements (unique by antisymmetry)."""
    vs = set(vectors)
    basis = [v for v in vs
             if not any(u != v and wqo.leq(u, v) for u in vs)]
    return tuple(sorted(basis))


def target_basis(protocol, wqo, target, threshold):
    """Basis of {q : q(target) >= threshold} under the given order.

    Component-wise, the single minimal element puts the threshold on the
    target and zero elsewhere. Guard-refined, every support pattern of
    the other states induces its own guard profile, so candidates range
    over 0/1 occupancy of the non-target states before minimizing.
    """
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    n = protocol.n_states
    if wqo.guards is None:
        base = tuple(threshold if s == target else 0 for s in range(n))
        return Ucs(wqo, (base,))
    others = [s for s in range(n) if s != target]
    candidates = []
    for bits in itertools.product((0, 1), repeat=len(others)):
        q = [0] * n
        q[target] = threshold
        for s, bit in zip(others, bits):
            q[s] = bit
        candidates.append(tuple(q))
    return Ucs(wqo, minimize(wqo, candidates))


def _participations(action):
    """Sender subsets to consider when searching predecessors.

    Sender actions fire with every declared send. Maximal actions fire
    with any non-empty index subset, provided the source states of the
    missing indices hold no further processes; those states come back
    pinned (their count in a predecessor is forced to equal the
    participation exactly).
    """
    v = action.sync.senders_from
    n = len(v)
    if action.kind != MAXIMAL:
        yield v, action.sync.senders_to, frozenset()
        return
    k = len(action.sends)
    seen = set()
    for size in range(1, k + 1):
        for sigma in itertools.combinations(range(k), size):
            u = [0] * n
            uplus = [0] * n
            for i in sigma:
                u[action.sends[i].src] += 1
                uplus[action.sends[i].dst] += 1
            key = (tuple(u), tuple(uplus))
            if key in seen:
                continue
            seen.add(key)
            pinned = frozenset(s for s in range(n) if u[s] < v[s])
            yield key[0], key[1], pinned


def _compositions(total, parts):
    """All ways to split ``total`` into ``parts`` non-negative summands."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _successor(action, q, u, uplus):
    succ = list(uplus)
    rmap = action.receive_map
    for s in range(len(q)):
        rest = q[s] - u[s]
        if rest:
            succ[rmap[s]] += rest
    return tuple(succ)


def _receiver_options(deficit, slots):
    """Minimal receiver placements for one destination.

    ``slots`` are the predecessor states whose surplus must be >= 1 (the
    chosen support). When there are at least ``deficit`` slots, one
    process per slot is the unique minimum; otherwise every split of the
    deficit into positive parts is minimal.
    """
    if not slots:
        return [()] if deficit == 0 else []
    if deficit <= len(slots):
        return [(1,) * len(slots)]
    return [tuple(c + 1 for c in comp)
            for comp in _compositions(deficit - len(slots), len(slots))]


def _action_preds(protocol, wqo, action, b):
    """Minimal predecessors of the upward closure of ``b`` through one action.

    Candidates place the participating senders (``u``) plus surplus
    receivers distributed so that each destination's deficit against
    ``b`` is covered by its receive-map preimages. Under the
    guard-refined order the surplus support itself matters: a minimal
    predecessor may need receivers in zero-deficit states so that its
    own support (and the successor's) realizes the right guard profile,
    so candidates additionally range over surplus-support subsets.
    Every candidate is verified by firing it forward.
    """
    n = len(b)
    rmap = action.receive_map
    guard = action.guard.members
    pre = [[] for _ in range(n)]
    for s in range(n):
        pre[rmap[s]].append(s)

    found = set()
    for u, uplus, pinned in _participations(action):
        if any(u[s] > 0 and s not in guard for s in range(n)):
            continue  # senders occupy states outside the action's guard
        free = [s for s in range(n) if s not in pinned]
        deficits = [max(0, b[t] - uplus[t]) for t in range(n)]

        if wqo.guards is None:
            # distribute each destination's deficit over its free preimages
            per_dest = []
            for t in range(n):
                if deficits[t] == 0:
                    continue
                slots = [s for s in pre[t] if s not in pinned and s in guard]
                if not slots:
                    per_dest = None
                    break
                per_dest.append((slots, list(_compositions(deficits[t], len(slots)))))
            if per_dest is None:
                continue
            for choice in itertools.product(*(opts for _, opts in per_dest)):
                q = list(u)
                for (slots, _), counts in zip(per_dest, choice):
                    for s, c in zip(slots, counts):
                        q[s] += c
                q = tuple(q)
                if wqo.leq(b, _successor(action, q, u, uplus)):
                    found.add(q)
            continue

        # guard-refined: enumerate the surplus support rho explicitly
        allowed = [s for s in free if s in guard]
        for r_size in range(len(allowed) + 1):
            for rho in itertools.combinations(allowed, r_size):
                rho_set = set(rho)
                per_dest = []
                ok = True
                for t in range(n):
                    slots = [s for s in pre[t] if s in rho_set]
                    options = _receiver_options(deficits[t], slots)
                    if not options:
                        ok = False
                        break
                    if slots:
                        per_dest.append((slots, options))
                if not ok:
                    continue
                for choice in itertools.product(*(opts for _, opts in per_dest)):
                    q = list(u)
                    for (slots, _), counts in zip(per_dest, choice):
                        for s, c in zip(slots, counts):
                            q[s] += c
                    q = tuple(q)
                    supp = frozenset(s for s in range(n) if q[s] > 0)
                    if not supp <= guard:
                        continue
                    if wqo.leq(b, _successor(action, q, u, uplus)):
                        found.add(q)
    return found


def pred_basis(protocol, wqo, ucs):
    """Basis of Pred(U) united with U itself (one backward step)."""
    candidates = set(ucs.basis)
    for b in ucs.basis:
        for action in protocol.actions:
            candidates |= _action_preds(protocol, wqo, action, b)
    return Ucs(wqo, minimize(wqo, candidates))


@dataclass
class ParamVerdict:
    reachable: bool
    min_n: int | None
    witness: tuple[str, ...] | None  # action sequence, forward order
    basis: Ucs  # fixpoint basis (unreachability certificate)
    iterations: int
    sound: bool = True


def decide(protocol, target, threshold, certified=None, force_unsound=False):
    """Parameterized verdict for "at least ``threshold`` processes in ``target``".

    Guarded protocols are analyzed under the guard-refined order, which
    is only sound for certified guard-compatible protocols; pass
    ``certified=True`` to skip the built-in certification, or
    ``force_unsound=True`` to analyze anyway (the verdict is then
    stamped unsound). Iterates the backward closure to the full fixpoint
    so the returned minimal witness size is exact.
    """
    wqo = wqo_for(protocol)
    sound = True
    if wqo.guards is not None and certified is not True:
        if certified is None:
            from gspmc import wellbehaved

            certified = wellbehaved.certify(protocol).well_behaved
        if not certified:
            if not force_unsound:
                raise NotCertifiedWellBehaved(
                    "guarded protocol failed guard-compatibility certification")
            sound = False

    start = target_basis(protocol, wqo, target, threshold)
    basis = start.basis
    provenance = {b: None for b in basis}
    memo = {}
    iterations = 0
    while True:
        iterations += 1
        candidates = set(basis)
        for b in basis:
            for ai, action in enumerate(protocol.actions):
                key = (ai, b)
                if key not in memo:
                    memo[key] = _action_preds(protocol, wqo, action, b)
                for c in memo[key]:
                    if c not in provenance:
                        provenance[c] = (action.name, b)
                candidates |= memo[key]
        new_basis = minimize(wqo, candidates)
        if set(new_basis) == set(basis):
            break
        basis = new_basis

    fixpoint = Ucs(wqo, basis)
    covering = [b for b in basis
                if all(c == 0 for s, c in enumerate(b) if s != protocol.init)]
    if not covering:
        return ParamVerdict(False, None, None, fixpoint, iterations, sound)
    best = min(covering, key=lambda b: b[protocol.init])
    min_n = best[protocol.init]
    assert min_n >= 1
    witness = []
    cur = best
    while provenance[cur] is not None:
        action_name, parent = provenance[cur]
        witness.append(action_name)
        cur = parent
    return ParamVerdict(True, min_n, tuple(witness), fixpoint, iterations, sound)
