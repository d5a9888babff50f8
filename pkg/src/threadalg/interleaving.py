"""Merging threads into one under a pluggable scheduling strategy.

A strategy is a control state plus two functions: `schedule` gives,
for the current number of threads, a history view and a control state,
the exact probability that each thread gets the next turn; `update`
transforms the control state after a turn.  The interleaving history
records one pair per step: which thread took the turn and how many
threads remained afterwards.

One interleaving step works on the head of the chosen thread:

* a probabilistic head distributes through the step unchanged;
* an action head performs the action, both reply branches continuing
  with the rest of the threads, history and state extended;
* a terminated thread leaves the pool (termination only survives to
  the end if it is the last thread);
* an inactive thread leaves the pool too, but wraps the remainder in
  `deadlock_at_termination`, so the whole becomes inactive once the
  others are done;
* a forking head turns into an internal step that appends the forked
  thread at the end of the pool (a fork never fails).

Schedulers formally see the entire history, but a finite-state
interleaving of cyclic threads exists only when the strategy depends
on finitely much of it: the `digest` of a strategy trims the history
to the part it actually uses, and the engine keys its state space on
the trimmed view.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple, Union

from . import meadow, threads
from .errors import NonRegularProduct, WeightSumNotOne
from .threads import (
    Action,
    DEAD,
    DeadEnd,
    Fork,
    Post,
    Prob,
    STOP,
    Stop,
    TAU,
    ThreadGraph,
)

History = Tuple[Tuple[int, int], ...]

DEFAULT_STATE_BOUND = 100_000


@dataclass(frozen=True)
class BasicStep:
    """The chosen thread performed an action (possibly the internal one)."""

    action: Action


@dataclass(frozen=True)
class ForkStep:
    """The chosen thread forked off a new thread."""


@dataclass(frozen=True)
class TerminationStep:
    """The chosen thread terminated."""


@dataclass(frozen=True)
class InactionStep:
    """The chosen thread became inactive."""


StepKind = Union[BasicStep, ForkStep, TerminationStep, InactionStep]

FORK_STEP = ForkStep()
TERMINATION_STEP = TerminationStep()
INACTION_STEP = InactionStep()


def _keep_all(h: History) -> History:
    return h


def _keep_last(h: History) -> History:
    return h[-1:]


def _keep_none(h: History) -> History:
    return ()


@dataclass(frozen=True)
class SchedulerSpec:
    """A scheduling strategy.

    `schedule(n, h, s)` returns one probability per thread, summing to
    exactly one; `update(n, h, s, i, step)` is the control state after
    the 1-based thread `i` took a turn doing `step`, where `n` is the
    thread count at the moment of the turn.  Both receive the history
    as trimmed by `digest`; control states must be hashable and both
    functions pure.
    """

    initial_state: object
    schedule: Callable[[int, History, object], Sequence[Fraction]]
    update: Callable[[int, History, object, int, StepKind], object]
    digest: Callable[[History], History] = _keep_all


_DEFAULT = object()


class _Engine:
    """Shared product construction for the interleaving operators."""

    def __init__(self, spec: SchedulerSpec, threads_: Sequence[ThreadGraph], bound: int):
        if not threads_:
            raise ValueError("at least one thread is required")
        self.spec = spec
        self.bound = bound
        self.nodes: List = []
        self.slots: Dict[tuple, int] = {}
        self.aux: Dict = {}
        self.queue = deque()
        arena: List = []
        self.roots: List[int] = []
        for t in threads_:
            t = threads.normalize(t)
            offset = len(arena)
            arena.extend(threads._map_refs(node, _Offset(offset)) for node in t.nodes)
            self.roots.append(t.root + offset)
        self.arena = arena

    def aux_node(self, node) -> int:
        got = self.aux.get(node)
        if got is None:
            got = len(self.nodes)
            self.nodes.append(node)
            self.aux[node] = got
        return got

    def state_slot(self, key: tuple) -> int:
        got = self.slots.get(key)
        if got is None:
            if len(self.slots) >= self.bound:
                raise NonRegularProduct(
                    f"more than {self.bound} interleaving states"
                )
            got = len(self.nodes)
            self.nodes.append(None)
            self.slots[key] = got
            self.queue.append(key)
        return got

    def advance(self, view: History, ctrl, n: int, i: int, step: StepKind, count_after: int):
        """New (view, state) after 1-based thread `i` does `step`."""
        new_ctrl = self.spec.update(n, view, ctrl, i, step)
        new_view = self.spec.digest(view + ((i, count_after),))
        return new_view, new_ctrl

    def positional(self, sd: bool, view: History, ctrl, refs: Tuple[int, ...], i: int) -> int:
        """Output reference for thread `i` (0-based) taking the next turn."""
        node = self.arena[refs[i]]
        n = len(refs)
        if isinstance(node, Prob):
            branches = [
                (w, self.positional(sd, view, ctrl, refs[:i] + (t,) + refs[i + 1 :], i))
                for w, t in node.branches
            ]
            if len(branches) == 1:
                return branches[0][1]
            return self.aux_node(Prob(tuple(branches)))
        if isinstance(node, Stop):
            if n == 1:
                return self.aux_node(DEAD if sd else STOP)
            view2, ctrl2 = self.advance(view, ctrl, n, i + 1, TERMINATION_STEP, n - 1)
            return self.state_slot((sd, view2, ctrl2, refs[:i] + refs[i + 1 :]))
        if isinstance(node, DeadEnd):
            if n == 1:
                return self.aux_node(DEAD)
            view2, ctrl2 = self.advance(view, ctrl, n, i + 1, INACTION_STEP, n - 1)
            return self.state_slot((True, view2, ctrl2, refs[:i] + refs[i + 1 :]))
        if isinstance(node, Fork):
            view2, ctrl2 = self.advance(view, ctrl, n, i + 1, FORK_STEP, n + 1)
            target = self.state_slot(
                (sd, view2, ctrl2, refs[:i] + (node.then_,) + refs[i + 1 :] + (node.forked,))
            )
            return self.aux_node(Post(TAU, target, target))
        view2, ctrl2 = self.advance(view, ctrl, n, i + 1, BasicStep(node.action), n)
        t1 = self.state_slot((sd, view2, ctrl2, refs[:i] + (node.then_,) + refs[i + 1 :]))
        t2 = self.state_slot((sd, view2, ctrl2, refs[:i] + (node.else_,) + refs[i + 1 :]))
        return self.aux_node(Post(node.action, t1, t2))

    def fill(self, key: tuple) -> None:
        sd, view, ctrl, refs = key
        n = len(refs)
        weights = [meadow.as_probability(w) for w in self.spec.schedule(n, view, ctrl)]
        if len(weights) != n:
            raise ValueError(
                f"scheduler returned {len(weights)} weights for {n} threads"
            )
        if sum(weights) != 1:
            raise WeightSumNotOne(f"turn probabilities sum to {sum(weights)}, not 1")
        branches = [
            (w, self.positional(sd, view, ctrl, refs, i))
            for i, w in enumerate(weights)
            if w != 0
        ]
        # a single live branch still needs a node of its own: alias it
        # with a one-branch choice so the slot has content to hold
        self.nodes[self.slots[key]] = Prob(tuple(branches))

    def run(self, root: int) -> ThreadGraph:
        while self.queue:
            self.fill(self.queue.popleft())
        return threads.trim(ThreadGraph(tuple(self.nodes), root))


class _Offset:
    """Mapping view that shifts references by a fixed amount."""

    __slots__ = ("offset",)

    def __init__(self, offset: int):
        self.offset = offset

    def __getitem__(self, ref: int) -> int:
        return ref + self.offset


def interleave(
    spec: SchedulerSpec,
    threads_: Sequence[ThreadGraph],
    history: History = (),
    state=_DEFAULT,
    *,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> ThreadGraph:
    """The single thread arising from scheduling the given threads."""
    engine = _Engine(spec, threads_, state_bound)
    ctrl = spec.initial_state if state is _DEFAULT else state
    view = spec.digest(tuple(history))
    root = engine.state_slot((False, view, ctrl, tuple(engine.roots)))
    return engine.run(root)


def positional_interleave(
    spec: SchedulerSpec,
    i: int,
    threads_: Sequence[ThreadGraph],
    history: History = (),
    state=_DEFAULT,
    *,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> ThreadGraph:
    """Interleaving conditioned on thread `i` (1-based) taking the next turn."""
    if not 1 <= i <= len(threads_):
        raise ValueError(f"position {i} outside 1..{len(threads_)}")
    engine = _Engine(spec, threads_, state_bound)
    ctrl = spec.initial_state if state is _DEFAULT else state
    view = spec.digest(tuple(history))
    root = engine.positional(False, view, ctrl, tuple(engine.roots), i - 1)
    return engine.run(root)


def deadlock_at_termination(g: ThreadGraph) -> ThreadGraph:
    """Turn termination into inaction everywhere in the thread."""
    return ThreadGraph(
        tuple(DEAD if isinstance(n, Stop) else n for n in g.nodes), g.root
    )


# ---------------------------------------------------------------------------
# Built-in strategies


def cyclic_scheduler() -> SchedulerSpec:
    """Round-robin: the first turn goes to thread 1; afterwards, when
    the previous turn went to thread j, the next goes to thread
    (j + 1) mod n, reading a result of 0 as the last index n."""

    def schedule(n: int, h: History, s) -> Tuple[Fraction, ...]:
        if not h:
            k = 1
        else:
            j = h[-1][0]
            k = (j + 1) % n or n
        return tuple(meadow.ONE if i == k else meadow.ZERO for i in range(1, n + 1))

    def update(n, h, s, i, step):
        return s

    return SchedulerSpec(None, schedule, update, digest=_keep_last)


def uniform_scheduler() -> SchedulerSpec:
    """The first turn goes to thread 1; afterwards all threads are
    equally likely."""

    def schedule(n: int, h: History, s) -> Tuple[Fraction, ...]:
        if not h:
            return tuple(
                meadow.ONE if i == 1 else meadow.ZERO for i in range(1, n + 1)
            )
        return tuple(Fraction(1, n) for _ in range(n))

    def update(n, h, s, i, step):
        return s

    return SchedulerSpec(None, schedule, update, digest=_keep_last)


def lottery_scheduler(default_tickets: int = 1) -> SchedulerSpec:
    """Each thread holds tickets and wins the turn with probability
    tickets/total.  A forked thread enters with `default_tickets`;
    leaving threads take their tickets along."""
    if default_tickets < 1:
        raise ValueError("default_tickets must be at least 1")

    def tickets(s, n: int) -> Tuple[int, ...]:
        if s is None:
            return (default_tickets,) * n
        if len(s) != n:
            raise ValueError(f"ticket list has {len(s)} entries for {n} threads")
        return s

    def schedule(n: int, h: History, s) -> Tuple[Fraction, ...]:
        t = tickets(s, n)
        total = sum(t)
        return tuple(Fraction(x, total) for x in t)

    def update(n, h, s, i, step):
        t = tickets(s, n)
        if isinstance(step, ForkStep):
            return t + (default_tickets,)
        if isinstance(step, (TerminationStep, InactionStep)):
            return t[: i - 1] + t[i:]
        return t

    return SchedulerSpec(None, schedule, update, digest=_keep_none)


def builtin_scheduler(name: str) -> SchedulerSpec:
    """`cyclic`, `uniform`, or `lottery[:defaultTickets=N]`."""
    if name == "cyclic":
        return cyclic_scheduler()
    if name == "uniform":
        return uniform_scheduler()
    if name == "lottery":
        return lottery_scheduler()
    if name.startswith("lottery:"):
        option = name[len("lottery:") :]
        key, _, value = option.partition("=")
        if key != "defaultTickets" or not value.isdigit():
            raise ValueError(f"malformed lottery option {option!r}")
        return lottery_scheduler(int(value))
    raise ValueError(f"unknown scheduler {name!r}")


# ---------------------------------------------------------------------------
# Declarative scheduler tables

_DIGESTS = {"full": _keep_all, "last-pair": _keep_last, "none": _keep_none}
_STEP_CATEGORIES = {
    BasicStep: "basic",
    ForkStep: "fork",
    TerminationStep: "termination",
    InactionStep: "inaction",
}


def scheduler_from_table(table: dict) -> SchedulerSpec:
    """A finite-state strategy from a declarative table.

    The table maps named control states to per-thread-count turn
    weights and to successor states per step category::

        {"initial": "s0",
         "digest": "none",
         "states": {
           "s0": {"turn": {"1": ["1"], "2": ["1/3", "2/3"]},
                  "next": {"basic": "s0", "fork": "s0",
                           "termination": "s0", "inaction": "s0"}}}}

    Missing `next` entries keep the current state.  Turn weights for a
    thread count the table does not list are an error at use time.
    """
    states = table["states"]
    initial = table["initial"]
    if initial not in states:
        raise ValueError(f"initial state {initial!r} not defined")
    digest_name = table.get("digest", "none")
    if digest_name not in _DIGESTS:
        raise ValueError(f"unknown digest {digest_name!r}")
    parsed: Dict[str, Dict[int, Tuple[Fraction, ...]]] = {}
    for name, entry in states.items():
        parsed[name] = {
            int(count): tuple(meadow.parse_rational(w) for w in weights)
            for count, weights in entry.get("turn", {}).items()
        }

    def schedule(n: int, h: History, s) -> Tuple[Fraction, ...]:
        turns = parsed[s]
        if n not in turns:
            raise ValueError(f"state {s!r} has no turn weights for {n} threads")
        return turns[n]

    def update(n, h, s, i, step):
        category = _STEP_CATEGORIES[type(step)]
        return states[s].get("next", {}).get(category, s)

    return SchedulerSpec(initial, schedule, update, digest=_DIGESTS[digest_name])
