"""Protocol data model: validation, synchronization matrices, desugaring.

A protocol is one process template. Global actions come in two core kinds:

- ``sender`` (k-sender): fires only when k senders are available, and
  consumes exactly k of them (one per send index);
- ``maximal`` (k-maximal): fires as soon as at least one potential sender
  is present, with min(available, declared) senders participating per
  source state.

Every process that is not a sender reacts through the action's receive
map, a total function on states (missing entries are completed as
self-loops during validation). Derived primitives — internal steps,
pairwise/asynchronous rendezvous, negotiations, disjunctive guards — are
rewritten into core actions by :func:`desugar`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

SENDER = "sender"
MAXIMAL = "maximal"

TRIVIAL_GUARD_NAME = "ALL"


class ValidationError(Exception):
    """A protocol description violates a structural requirement."""


class UnknownState(ValidationError):
    pass


class DuplicateActionName(ValidationError):
    pass


class ArityMismatch(ValidationError):
    pass


class EmptyGuard(ValidationError):
    pass


class NonFunctionalReceiveMap(ValidationError):
    """Two receive targets declared for one source state."""


@dataclass(frozen=True)
class Guard:
    name: str
    members: frozenset[int]


@dataclass(frozen=True)
class Send:
    """One send index: the sender moves from ``src`` to ``dst``."""

    src: int
    dst: int


@dataclass(frozen=True)
class SyncMatrix:
    """Receive matrix plus sender tallies for one action.

    ``matrix[t][s]`` is 1 iff receivers in state s move to state t; every
    column is a unit vector because receives are deterministic.
    ``senders_from[s]`` counts send indices leaving s, ``senders_to[t]``
    counts send indices arriving in t; both sum to the arity.
    """

    matrix: tuple[tuple[int, ...], ...]
    senders_from: tuple[int, ...]
    senders_to: tuple[int, ...]


@dataclass(frozen=True)
class Action:
    name: str
    kind: str  # SENDER or MAXIMAL
    sends: tuple[Send, ...]
    receive_map: tuple[int, ...]  # total: source state index -> target index
    guard: Guard
    internal: bool = False  # provenance tag: produced by internal-step sugar
    group: str | None = None  # family name shared by sugar-generated siblings
    sync: SyncMatrix | None = None

    @property
    def arity(self) -> int:
        return len(self.sends)

    @property
    def family(self) -> str:
        return self.group if self.group is not None else self.name


@dataclass(frozen=True)
class Protocol:
    state_names: tuple[str, ...]
    init: int
    guards: tuple[Guard, ...]
    actions: tuple[Action, ...]

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def trivial_guard(self) -> Guard:
        return self.guards[0]

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise UnknownState(f"unknown state {name!r}") from None

    def action(self, name: str) -> Action:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def used_guards(self) -> tuple[Guard, ...]:
        """Non-trivial guards attached to at least one action.

        This is the guard set that drives the refined order and the
        guard-compatibility conditions; a registered guard that no action
        uses does not constrain anything.
        """
        full = frozenset(range(self.n_states))
        seen: list[Guard] = []
        for a in self.actions:
            g = a.guard
            if g.members != full and g not in seen:
                seen.append(g)
        return tuple(seen)

    @property
    def is_unguarded(self) -> bool:
        return not self.used_guards()


def is_internal(action: Action) -> bool:
    """Structural test: arity 1 and identity receive map.

    Internal steps move one process and leave everyone else in place, so
    this shape is definitive regardless of how the action was authored.
    """
    identity = tuple(range(len(action.receive_map)))
    return len(action.sends) == 1 and action.receive_map == identity


def build_sync(action: Action, n_states: int) -> SyncMatrix:
    """Tally the receive matrix and sender vectors for a validated action."""
    rmap = action.receive_map
    matrix = tuple(
        tuple(1 if rmap[s] == t else 0 for s in range(n_states))
        for t in range(n_states)
    )
    senders_from = [0] * n_states
    senders_to = [0] * n_states
    for send in action.sends:
        senders_from[send.src] += 1
        senders_to[send.dst] += 1
    return SyncMatrix(matrix, tuple(senders_from), tuple(senders_to))


def _complete_receives(pairs, n_states):
    """Receive pairs -> total map, self-loops on missing sources."""
    rmap = list(range(n_states))
    seen = set()
    for src, dst in pairs:
        if src in seen:
            raise NonFunctionalReceiveMap(
                f"two receive targets declared for one source state (index {src})"
            )
        seen.add(src)
        rmap[src] = dst
    return tuple(rmap)


def desugar(decl: dict, state_names: tuple[str, ...], guards: dict,
            actions: dict) -> list[Action]:
    """Expand one sugar declaration into core actions (without sync info).

    ``guards`` maps guard names to Guard records, ``actions`` maps already
    defined action names to Action records (needed by disjunctive-guard
    declarations, which return a raised-arity replacement for the action
    they reference; callers substitute it by name).
    """
    n = len(state_names)
    index = {s: i for i, s in enumerate(state_names)}

    def state(name):
        if name not in index:
            raise UnknownState(f"unknown state {name!r}")
        return index[name]

    def guard(decl_guard):
        gname = decl_guard if decl_guard is not None else TRIVIAL_GUARD_NAME
        if gname not in guards:
            raise ValidationError(f"unknown guard {gname!r}")
        return guards[gname]

    kind = decl.get("type")
    identity = tuple(range(n))

    if kind == "internal":
        src, dst = state(decl["from"]), state(decl["to"])
        return [Action(decl["name"], SENDER, (Send(src, dst),), identity,
                       guard(decl.get("guard")), internal=True,
                       group=decl["name"])]

    if kind in ("pairwise", "async"):
        s_from, s_to = (state(x) for x in decl["send"])
        r_from, r_to = (state(x) for x in decl["recv"])
        core_kind = SENDER if kind == "pairwise" else MAXIMAL
        return [Action(decl["name"], core_kind,
                       (Send(s_from, s_to), Send(r_from, r_to)), identity,
                       guard(decl.get("guard")), group=decl["name"])]

    if kind == "negotiation":
        mapping = decl["map"]
        items = list(mapping.items()) if isinstance(mapping, dict) else list(mapping)
        if not items:
            raise ValidationError("negotiation map must be non-empty")
        pairs = [(state(s), state(t)) for s, t in items]
        rmap = _complete_receives(pairs, n)
        g = guard(decl.get("guard"))
        base = decl["name"]
        return [
            Action(f"{base}#{i}", SENDER, (Send(src, dst),), rmap, g, group=base)
            for i, (src, dst) in enumerate(pairs, start=1)
        ]

    if kind == "disjunctive":
        ref = decl["action"]
        if ref not in actions:
            raise ValidationError(f"disjunctive guard references unknown action {ref!r}")
        witnesses = decl.get("witnesses", [])
        if not witnesses:
            raise ValidationError("disjunctive guard needs at least one witness state")
        base = actions[ref]
        extra = tuple(Send(state(w), base.receive_map[state(w)]) for w in witnesses)
        return [dataclasses.replace(base, sends=base.sends + extra)]

    raise ValidationError(f"unknown sugar type {kind!r}")


_RAW_KEYS = {"states", "init", "guards", "actions", "sugar", "property"}
_ACTION_KEYS = {"name", "kind", "arity", "sends", "receives", "guard"}


def validate(raw: dict) -> Protocol:
    """Build a Protocol from a parsed description, checking every invariant.

    Checks (in order): state list well-formed, init known, guards non-empty
    and made of known states, core actions structurally sound (arity,
    send/receive states, functional receive map, unique names), then sugar
    declarations expanded in file order. Receive maps are completed with
    self-loops; each action gets its synchronization matrix attached.
    """
    extra = set(raw) - _RAW_KEYS
    if extra:
        raise ValidationError(f"unknown top-level keys: {sorted(extra)}")

    state_names = tuple(raw.get("states", ()))
    if not state_names:
        raise ValidationError("protocol needs at least one state")
    if len(set(state_names)) != len(state_names):
        dup = next(s for i, s in enumerate(state_names) if s in state_names[:i])
        raise ValidationError(f"duplicate state name {dup!r}")
    index = {s: i for i, s in enumerate(state_names)}
    n = len(state_names)

    def state(name):
        if name not in index:
            raise UnknownState(f"unknown state {name!r}")
        return index[name]

    if "init" not in raw:
        raise ValidationError("missing init state")
    init = state(raw["init"])

    trivial = Guard(TRIVIAL_GUARD_NAME, frozenset(range(n)))
    guards: dict[str, Guard] = {TRIVIAL_GUARD_NAME: trivial}
    for gname, members in dict(raw.get("guards", {})).items():
        if gname == TRIVIAL_GUARD_NAME:
            raise ValidationError(f"{TRIVIAL_GUARD_NAME!r} is reserved for the trivial guard")
        member_set = frozenset(state(s) for s in members)
        if not member_set:
            raise EmptyGuard(f"guard {gname!r} is empty")
        guards[gname] = Guard(gname, member_set)

    actions: dict[str, Action] = {}

    def add(action):
        if action.name in actions:
            raise DuplicateActionName(f"duplicate action name {action.name!r}")
        actions[action.name] = action

    for spec in raw.get("actions", ()):
        extra = set(spec) - _ACTION_KEYS
        if extra:
            raise ValidationError(
                f"unknown keys {sorted(extra)} in action {spec.get('name')!r}")
        name = spec["name"]
        kind = spec.get("kind", SENDER)
        if kind not in (SENDER, MAXIMAL):
            raise ValidationError(f"action {name!r}: unknown kind {kind!r}")
        sends = tuple(Send(state(s), state(t)) for s, t in spec.get("sends", ()))
        if not sends:
            raise ArityMismatch(f"action {name!r} declares no send")
        if "arity" in spec and spec["arity"] != len(sends):
            raise ArityMismatch(
                f"action {name!r}: declared arity {spec['arity']} but {len(sends)} sends")
        receives = spec.get("receives", {})
        pairs = receives.items() if isinstance(receives, dict) else receives
        rmap = _complete_receives([(state(s), state(t)) for s, t in pairs], n)
        gname = spec.get("guard", TRIVIAL_GUARD_NAME)
        if gname not in guards:
            raise ValidationError(f"action {name!r}: unknown guard {gname!r}")
        add(Action(name, kind, sends, rmap, guards[gname], group=name))

    for decl in raw.get("sugar", ()):
        produced = desugar(decl, state_names, guards, actions)
        if decl.get("type") == "disjunctive":
            # replacement for an existing action, same name
            actions[produced[0].name] = produced[0]
        else:
            for action in produced:
                add(action)

    final = tuple(
        dataclasses.replace(a, sync=build_sync(a, n)) for a in actions.values()
    )
    return Protocol(state_names, init, tuple(guards.values()), final)
