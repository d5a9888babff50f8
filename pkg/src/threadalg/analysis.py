"""Exact outcome statistics and seeded sampling for thread behaviours.

An environment assigns each basic action the exact probability of the
answer True; the internal action always gets True.  Within a bound on
the number of performed actions, a thread then terminates, becomes
inactive, or is still running when the bound is hit; the three masses
are computed exactly and always sum to one.  A seeded sampler replays
single runs reproducibly for cross-checking the exact figures.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from . import meadow, threads
from .errors import MissingReply, ParseError, UnresolvedFork
from .threads import Action, DeadEnd, Fork, Prob, Stop, ThreadGraph

TERMINATE = "terminate"
DEADLOCK = "deadlock"
SURVIVING = "surviving"

Trace = Tuple[str, ...]


class Environment:
    """Stateless reply probabilities for basic actions.

    Stateful behaviour belongs in services; this is the oracle for the
    actions a thread still performs against the outside world.
    """

    def __init__(self, replies: Mapping[Action, Fraction]):
        self._replies = {a: meadow.as_probability(p) for a, p in replies.items()}

    def reply(self, action: Action) -> Fraction:
        if action.is_tau:
            return meadow.ONE
        p = self._replies.get(action)
        if p is None:
            raise MissingReply(f"no reply probability for action {action}")
        return p

    @classmethod
    def from_table(cls, text: str) -> "Environment":
        """Parse lines of the form `f.m = p`; `//` starts a comment."""
        replies: Dict[Action, Fraction] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("//", 1)[0].strip()
            if not line:
                continue
            name, eq, value = line.partition("=")
            if not eq:
                raise ParseError(f"line {lineno}: expected `action = probability`")
            action = threads.action_from_name(name.strip())
            replies[action] = meadow.as_probability(
                meadow.parse_rational(value.strip())
            )
        return cls(replies)


EMPTY_ENVIRONMENT = Environment({})


@dataclass(frozen=True)
class OutcomeDistribution:
    """Exact masses of the three outcomes within a depth bound."""

    terminate: Fraction
    deadlock: Fraction
    surviving: Fraction
    traces: Optional[Tuple[Tuple[Trace, Fraction], ...]] = None

    def __post_init__(self):
        if self.terminate + self.deadlock + self.surviving != 1:
            raise ValueError("outcome masses must sum to exactly 1")

    @property
    def trace_table(self) -> Dict[Trace, Fraction]:
        return dict(self.traces or ())


def _merge(into: Dict[Trace, Fraction], table: Dict[Trace, Fraction], w: Fraction, prefix: Trace = ()) -> None:
    for trace, mass in table.items():
        key = prefix + trace
        into[key] = into.get(key, meadow.ZERO) + w * mass


def outcome_distribution(
    g: ThreadGraph,
    env: Environment,
    depth: int,
    *,
    with_traces: bool = False,
) -> OutcomeDistribution:
    """Exact outcome masses of `g` within `depth` performed actions.

    The depth counts actions only; probabilistic choices are free.  A
    node that would perform an action beyond the bound contributes its
    whole mass to `surviving` (the thread is still running there, not
    inactive).  The optional trace table maps each performed action
    sequence to its total mass.
    """
    if depth < 0:
        raise ValueError("depth must be a natural number")
    memo: Dict[Tuple[int, int], tuple] = {}

    def go(ref: int, k: int) -> tuple:
        key = (ref, k)
        got = memo.get(key)
        if got is not None:
            return got
        node = g.nodes[ref]
        if isinstance(node, Stop):
            out = (meadow.ONE, meadow.ZERO, meadow.ZERO, {(): meadow.ONE})
        elif isinstance(node, DeadEnd):
            out = (meadow.ZERO, meadow.ONE, meadow.ZERO, {(): meadow.ONE})
        elif isinstance(node, Fork):
            raise UnresolvedFork(
                "a fork node can only be executed under strategic interleaving"
            )
        elif isinstance(node, Prob):
            t = d = s = meadow.ZERO
            traces: Dict[Trace, Fraction] = {}
            for w, target in node.branches:
                bt, bd, bs, btr = go(target, k)
                t += w * bt
                d += w * bd
                s += w * bs
                if with_traces:
                    _merge(traces, btr, w)
            out = (t, d, s, traces)
        elif k == 0:
            out = (meadow.ZERO, meadow.ZERO, meadow.ONE, {(): meadow.ONE})
        else:
            p = env.reply(node.action)
            tt, td, ts, ttr = go(node.then_, k - 1)
            et, ed, es, etr = go(node.else_, k - 1)
            q = 1 - p
            traces = {}
            if with_traces:
                step = (str(node.action),)
                if p != 0:
                    _merge(traces, ttr, p, step)
                if q != 0:
                    _merge(traces, etr, q, step)
            out = (
                p * tt + q * et,
                p * td + q * ed,
                p * ts + q * es,
                traces,
            )
        memo[key] = out
        return out

    t, d, s, traces = go(g.root, depth)
    table = tuple(sorted(traces.items())) if with_traces else None
    return OutcomeDistribution(t, d, s, table)


# ---------------------------------------------------------------------------
# Sampling

# Pseudo-random source: Python's Mersenne Twister, drawn as 64-bit
# integers and compared as exact dyadic rationals, so a run is a pure
# function of its seed.


def _draw(rng: random.Random) -> Fraction:
    return Fraction(rng.getrandbits(64), 1 << 64)


def sample_run(
    g: ThreadGraph,
    env: Environment,
    depth: int,
    seed: int,
) -> Tuple[str, Trace]:
    """One pseudo-random execution; identical seeds replay identically."""
    rng = random.Random(seed)
    ref = g.root
    trace: list = []
    k = depth
    while True:
        node = g.nodes[ref]
        if isinstance(node, Stop):
            return TERMINATE, tuple(trace)
        if isinstance(node, DeadEnd):
            return DEADLOCK, tuple(trace)
        if isinstance(node, Fork):
            raise UnresolvedFork(
                "a fork node can only be executed under strategic interleaving"
            )
        if isinstance(node, Prob):
            r = _draw(rng)
            acc = meadow.ZERO
            ref = node.branches[-1][1]
            for w, target in node.branches:
                acc += w
                if r < acc:
                    ref = target
                    break
            continue
        if k == 0:
            return SURVIVING, tuple(trace)
        p = env.reply(node.action)
        trace.append(str(node.action))
        ref = node.then_ if _draw(rng) < p else node.else_
        k -= 1


def sample_outcomes(
    g: ThreadGraph,
    env: Environment,
    depth: int,
    seed: int,
    runs: int,
) -> Dict[str, Fraction]:
    """Empirical outcome frequencies over `runs` samples.

    Per-run seeds are `seed + index`, so the result does not depend on
    the order in which runs are executed.
    """
    counts = {TERMINATE: 0, DEADLOCK: 0, SURVIVING: 0}
    for index in range(runs):
        tag, _ = sample_run(g, env, depth, seed + index)
        counts[tag] += 1
    return {tag: Fraction(count, runs) for tag, count in counts.items()}
