"""Cutoff detection: when checking m processes suffices for all n >= m.

A local transition is *free* when firing it never requires cooperation
from other processes beyond guard satisfaction: internal moves, the
send edges of single-sender and maximal actions, and receive edges
backed by a matching send in the same action family (negotiations).
Reaching a target state along free transitions only cannot be blocked
by adding processes, so under any of three structural conditions the
parameterized query "m processes in the target" collapses to an
explicit check with exactly n = m processes:

- L1: every action is internal or negotiation-shaped;
- L2: every path from the initial state to the target is free;
- L3: some simple free paths exist and every broadcast interacts with
  them only in recoverable ways (receives stay on the paths, or an
  internal move re-enters them, or the detour region is free, acyclic
  and always leads back).
"""

from __future__ import annotations

from dataclasses import dataclass

from gspmc import explicit
from gspmc.model import MAXIMAL, Protocol, is_internal
from gspmc.wsts import NotCertifiedWellBehaved

DEFAULT_PATH_BUDGET = 10**5

FREE_INTERNAL = "internal"
FREE_SEND = "send-of-broadcast-or-maximal"
FREE_NEGOTIATION = "negotiation-style-receive"


class PathBudgetExceeded(Exception):
    def __init__(self, budget: int):
        super().__init__(f"more than {budget} simple free paths")
        self.budget = budget


@dataclass(frozen=True)
class Edge:
    """One local transition: a send slot or a state-changing receive."""

    action: str
    role: str  # "send" | "receive"
    src: int
    dst: int
    free: bool
    reason: str | None  # set when free
    index: int  # send slot, or receive source (disambiguates parallels)


@dataclass(frozen=True)
class FreeClassification:
    edges: tuple[Edge, ...]

    def sends(self):
        return [e for e in self.edges if e.role == "send"]

    def receives_of(self, action: str):
        return [e for e in self.edges
                if e.role == "receive" and e.action == action]


@dataclass(frozen=True)
class CutoffResult:
    applicable_lemma: str | None
    cutoff: int | None
    witness: str | None


@dataclass(frozen=True)
class CutoffVerdict:
    """Outcome of the end-to-end cutoff pipeline for one query."""

    amenable: bool
    lemma: str | None
    cutoff: int | None
    holds: bool | None  # the lifted verdict, valid for every n >= cutoff
    result: explicit.FixedResult | None
    witness: str | None


def classify_free(protocol: Protocol) -> FreeClassification:
    """Classify every local transition of the protocol.

    Receive self-loops are omitted: they move no process and play no
    role in the path conditions.
    """
    by_family: dict[str, set[tuple[int, int]]] = {}
    for a in protocol.actions:
        by_family.setdefault(a.family, set()).update(
            (s.src, s.dst) for s in a.sends)
    edges = []
    for a in protocol.actions:
        if is_internal(a):
            send_free, reason = True, FREE_INTERNAL
        elif a.kind == MAXIMAL or a.arity == 1:
            send_free, reason = True, FREE_SEND
        else:
            send_free, reason = False, None
        for i, s in enumerate(a.sends):
            edges.append(Edge(a.name, "send", s.src, s.dst,
                              send_free, reason, i))
        family_sends = by_family[a.family]
        for src, dst in enumerate(a.receive_map):
            if src == dst:
                continue
            matched = (src, dst) in family_sends
            edges.append(Edge(a.name, "receive", src, dst, matched,
                              FREE_NEGOTIATION if matched else None, src))
    return FreeClassification(tuple(edges))


def _is_negotiation_family(actions) -> bool:
    """All members single-send, same guard and receive map, sends and
    non-trivial receive entries mirroring each other exactly."""
    if any(len(a.sends) != 1 for a in actions):
        return False
    rmap = actions[0].receive_map
    guard = actions[0].guard.members
    if any(a.receive_map != rmap or a.guard.members != guard for a in actions):
        return False
    sends = {(a.sends[0].src, a.sends[0].dst) for a in actions}
    moved = {(src, dst) for src, dst in enumerate(rmap) if src != dst}
    return sends == moved


def _require_certified(protocol: Protocol, certified) -> None:
    if certified is True:
        return
    from gspmc import wellbehaved

    if not wellbehaved.certify(protocol).well_behaved:
        raise NotCertifiedWellBehaved(
            "cutoff lemmas require a certified well-behaved protocol")


def check_lemma1(protocol: Protocol, *, certified=None) -> bool:
    """Every action internal or negotiation-shaped: every state's
    reachability is then synchronization-independent."""
    _require_certified(protocol, certified)
    families: dict[str, list] = {}
    for a in protocol.actions:
        families.setdefault(a.family, []).append(a)
    return all(
        all(is_internal(a) for a in members) or _is_negotiation_family(members)
        for members in families.values())


def check_lemma2(protocol: Protocol, target: int, *, certified=None) -> bool:
    """No non-free edge lies on any initial-to-target path in the local
    transition graph."""
    _require_certified(protocol, certified)
    edges = classify_free(protocol).edges
    n = protocol.n_states
    fwd = [set() for _ in range(n)]
    back = [set() for _ in range(n)]
    for e in edges:
        fwd[e.src].add(e.dst)
        back[e.dst].add(e.src)

    def closure(start, adj):
        seen = {start}
        frontier = [start]
        while frontier:
            for nxt in adj[frontier.pop()] - seen:
                seen.add(nxt)
                frontier.append(nxt)
        return seen

    from_init = closure(protocol.init, fwd)
    to_target = closure(target, back)
    return not any(e.src in from_init and e.dst in to_target
                   for e in edges if not e.free)


def _free_paths(protocol, edges, target, budget):
    """All simple paths from the initial state to the target over free
    edges. Parallel edges (distinct action/slot labels between the same
    states) yield distinct paths."""
    by_src: dict[int, list[Edge]] = {}
    for e in edges:
        if e.free:
            by_src.setdefault(e.src, []).append(e)
    paths = []

    def dfs(state, path, visited):
        if state == target:
            paths.append(tuple(path))
            if len(paths) > budget:
                raise PathBudgetExceeded(budget)
            return
        for e in by_src.get(state, ()):
            if e.dst in visited:
                continue
            path.append(e)
            visited.add(e.dst)
            dfs(e.dst, path, visited)
            visited.discard(e.dst)
            path.pop()

    dfs(protocol.init, [], {protocol.init})
    return paths


def _region_recovers(src, path_states, out_edges) -> bool:
    """Check the detour region entered at ``src``: every continuation
    must re-enter the path states along free edges, with no sinks and
    no cycles off the paths."""
    visited = set()
    stack = [src]
    while stack:
        u = stack.pop()
        if u in visited:
            continue
        visited.add(u)
        outs = out_edges[u]
        if not outs:
            return False  # stuck off the paths
        for e in outs:
            if not e.free:
                return False
            if e.dst not in path_states and e.dst not in visited:
                stack.append(e.dst)
    # any cycle within the off-path region never leads back
    state = {u: 0 for u in visited}  # 0 new, 1 on stack, 2 done

    def cyclic(u):
        state[u] = 1
        for e in out_edges[u]:
            if e.dst in path_states:
                continue
            if state.get(e.dst) == 1:
                return True
            if state.get(e.dst) == 0 and cyclic(e.dst):
                return True
        state[u] = 2
        return False

    return not any(state[u] == 0 and cyclic(u) for u in sorted(visited))


def check_lemma3(protocol: Protocol, target: int, *,
                 path_budget: int = DEFAULT_PATH_BUDGET,
                 certified=None) -> CutoffResult:
    """Free-path analysis: does every send transition interact with the
    simple free paths only in recoverable ways?

    For a send off the paths, every receive moving a process away from
    a path state must keep it on the path states. For a send on the
    paths, a receive leaving the path states needs either an internal
    move from the receive's source back onto them, or a detour region
    that is free, acyclic and always returns.
    """
    _require_certified(protocol, certified)
    names = protocol.state_names
    classification = classify_free(protocol)
    paths = _free_paths(protocol, classification.edges, target, path_budget)
    if not paths:
        return CutoffResult(None, None,
                            "no simple free path from the initial state "
                            f"to {names[target]}")
    path_edges = {(e.src, e.dst) for p in paths for e in p}
    path_states = {protocol.init} | {e.dst for p in paths for e in p}
    out_edges = [[] for _ in range(protocol.n_states)]
    for e in classification.edges:
        out_edges[e.src].append(e)
    internal_moves = {(e.src, e.dst) for e in classification.edges
                      if e.reason == FREE_INTERNAL}

    for send in classification.sends():
        receives = [e for e in classification.receives_of(send.action)
                    if e.src in path_states]
        if (send.src, send.dst) not in path_edges:
            for r in receives:
                if r.dst not in path_states:
                    return CutoffResult(None, None, (
                        f"send {names[send.src]}->{names[send.dst]} of "
                        f"{send.action} is off the free paths but its receive "
                        f"{names[r.src]}->{names[r.dst]} drags a path state "
                        f"off them"))
            continue
        for r in receives:
            if (r.src, r.dst) in path_edges or r.dst in path_states:
                continue
            if any(d in path_states for s, d in internal_moves
                   if s == r.src):
                continue  # the process can dodge the receive by moving
                # internally back onto the paths before the send fires
            if not _region_recovers(r.dst, path_states, out_edges):
                return CutoffResult(None, None, (
                    f"receive {names[r.src]}->{names[r.dst]} of {send.action} "
                    f"leaves the free paths without a free way back"))
    return CutoffResult("L3", None, None)


def certified_cutoff_check(protocol: Protocol, target: int, threshold: int, *,
                           state_budget: int = explicit.DEFAULT_STATE_BUDGET,
                           path_budget: int = DEFAULT_PATH_BUDGET) -> CutoffVerdict:
    """Decide "at least ``threshold`` processes reach ``target``" for every
    system size at once, when a cutoff lemma applies.

    Certification runs first; then the cheapest applicable lemma (L1,
    then L2, then L3) justifies checking exactly ``threshold`` processes
    and lifting that verdict to all larger systems.
    """
    from gspmc import wellbehaved

    if not wellbehaved.certify(protocol).well_behaved:
        return CutoffVerdict(False, None, None, None, None,
                             "protocol is not certified well-behaved")
    if check_lemma1(protocol, certified=True):
        lemma = "L1"
    elif check_lemma2(protocol, target, certified=True):
        lemma = "L2"
    else:
        res = check_lemma3(protocol, target,
                           path_budget=path_budget, certified=True)
        if res.applicable_lemma is None:
            return CutoffVerdict(False, None, None, None, None, res.witness)
        lemma = "L3"
    query = explicit.ReachQuery(target, threshold, threshold)
    fixed = explicit.check_fixed(protocol, query, state_budget=state_budget)
    return CutoffVerdict(True, lemma, threshold, fixed.reachable, fixed, None)
