"""Finite-state probabilistic threads and their canonical forms.

A thread performs actions one at a time; after each action the
execution environment answers True or False and the thread continues
with the branch selected by the answer.  Between actions a thread may
make internal choices according to exact discrete probability
distributions.  The threads handled here are *regular*: they are
represented by finite graphs whose unfoldings are the (possibly
infinite) behaviours, with recursion expressed by cycles.

`normalize` computes a canonical graph: at most one distribution layer
above each deterministic node, weights in (0, 1] summing to exactly 1,
duplicate branch targets merged, branches sorted by an intrinsic total
order on nodes, behaviourally equal nodes identified, and the internal
action's two branches made equal (the environment always answers True
to it).  Two regular threads have the same behaviour exactly when
their canonical graphs are equal; `bisimilar` decides this, and
`equal_up_to` compares finite-depth approximations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

from . import meadow
from .errors import MalformedProbability, UnguardedRecursion, WeightSumNotOne

# ---------------------------------------------------------------------------
# Actions


@dataclass(frozen=True, order=True)
class Action:
    """A basic action `focus.method`, or the internal action tau.

    The focus names a service; the method is what that service is asked
    to process.  Tau is the internal action: it is distinct from every
    basic action and always receives the answer True.
    """

    focus: str
    method: str

    @property
    def is_tau(self) -> bool:
        return not self.focus

    def __str__(self) -> str:
        return "tau" if self.is_tau else f"{self.focus}.{self.method}"


TAU = Action("", "tau")

#: Focus used for action names written without an explicit `focus.` part.
MAIN_FOCUS = "main"


def basic(focus: str, method: str) -> Action:
    if not focus or not method:
        raise ValueError("focus and method must be nonempty")
    return Action(focus, method)


def action_from_name(name: str) -> Action:
    """`f.m` names a service method; a bare name gets the focus `main`."""
    if name == "tau":
        return TAU
    focus, dot, method = name.partition(".")
    if dot:
        return basic(focus, method)
    return basic(MAIN_FOCUS, name)


# ---------------------------------------------------------------------------
# Graph nodes


@dataclass(frozen=True)
class Stop:
    """Successful termination."""


@dataclass(frozen=True)
class DeadEnd:
    """Inaction: no further steps are taken and the thread never terminates."""


@dataclass(frozen=True)
class Post:
    """Perform `action`, continue at `then_` on True and `else_` on False."""

    action: Action
    then_: int
    else_: int


@dataclass(frozen=True)
class Fork:
    """Fork off the thread at `forked` and continue at `then_`.

    A fork produces a reply like an action does, but no basic action is
    involved and the False branch is never taken (fork capacity is
    assumed unlimited); `else_` is kept for structural completeness.
    """

    forked: int
    then_: int
    else_: int


@dataclass(frozen=True)
class Prob:
    """Internal choice over branches; weights lie in (0, 1] and sum to 1."""

    branches: Tuple[Tuple[Fraction, int], ...]

    def __post_init__(self):
        if not self.branches:
            raise MalformedProbability("empty probabilistic choice")
        total = Fraction(0)
        for w, _ in self.branches:
            if not 0 < w <= 1:
                raise MalformedProbability(f"branch weight {w} outside (0, 1]")
            total += w
        if total != 1:
            raise WeightSumNotOne(f"branch weights sum to {total}, not 1")


Node = Union[Stop, DeadEnd, Post, Fork, Prob]

STOP = Stop()
DEAD = DeadEnd()


@dataclass(frozen=True)
class ThreadGraph:
    """A regular thread: a node table plus the root reference."""

    nodes: Tuple[Node, ...]
    root: int

    def node(self, ref: int) -> Node:
        return self.nodes[ref]

    def __len__(self) -> int:
        return len(self.nodes)


def _children(node: Node) -> Tuple[int, ...]:
    if isinstance(node, Post):
        return (node.then_, node.else_)
    if isinstance(node, Fork):
        return (node.forked, node.then_, node.else_)
    if isinstance(node, Prob):
        return tuple(t for _, t in node.branches)
    return ()


def _map_refs(node: Node, mapping) -> Node:
    if isinstance(node, Post):
        return Post(node.action, mapping[node.then_], mapping[node.else_])
    if isinstance(node, Fork):
        return Fork(mapping[node.forked], mapping[node.then_], mapping[node.else_])
    if isinstance(node, Prob):
        return Prob(tuple((w, mapping[t]) for w, t in node.branches))
    return node


def reachable(g: ThreadGraph) -> List[int]:
    """References reachable from the root, in breadth-first order."""
    seen = {g.root}
    order = [g.root]
    i = 0
    while i < len(order):
        for c in _children(g.nodes[order[i]]):
            if c not in seen:
                seen.add(c)
                order.append(c)
        i += 1
    return order


def trim(g: ThreadGraph) -> ThreadGraph:
    """Drop unreachable nodes, renumbering in breadth-first order."""
    order = reachable(g)
    if len(order) == len(g.nodes) and order == list(range(len(order))):
        return g
    mapping = {old: new for new, old in enumerate(order)}
    nodes = tuple(_map_refs(g.nodes[old], mapping) for old in order)
    return ThreadGraph(nodes, 0)


class GraphBuilder:
    """Accumulates graph nodes, sharing structurally identical ones.

    Reserved slots support cyclic graphs: reserve first, fill once the
    node content (which may reference the slot itself) is known.
    """

    def __init__(self):
        self._nodes: List[Node] = []
        self._index: Dict[Node, int] = {}

    def add(self, node: Node) -> int:
        ref = self._index.get(node)
        if ref is None:
            ref = len(self._nodes)
            self._nodes.append(node)
            self._index[node] = ref
        return ref

    def reserve(self) -> int:
        ref = len(self._nodes)
        self._nodes.append(None)  # type: ignore[arg-type]
        return ref

    def fill(self, ref: int, node: Node) -> None:
        self._nodes[ref] = node

    def copy_into(self, dst: int, src: int) -> None:
        self._nodes[dst] = self._nodes[src]

    def prob(self, branches: Sequence[Tuple[Fraction, int]]) -> int:
        """Choice node over branches; zero weights are dropped and a
        single remaining branch collapses to its target."""
        weights = [Fraction(w) for w, _ in branches]
        for w in weights:
            if not meadow.is_probability(w):
                raise MalformedProbability(f"weight {w} outside [0, 1]")
        if sum(weights) != 1:
            raise WeightSumNotOne(f"weights sum to {sum(weights)}, not 1")
        kept = [(w, t) for w, (_, t) in zip(weights, branches) if w != 0]
        if len(kept) == 1:
            return kept[0][1]
        return self.add(Prob(tuple(kept)))

    def graph(self, root: int) -> ThreadGraph:
        assert all(n is not None for n in self._nodes), "unfilled slot"
        return ThreadGraph(tuple(self._nodes), root)


# ---------------------------------------------------------------------------
# Terms: the syntax trees that `build` turns into graphs


class Term:
    """Base class for thread expressions."""

    __slots__ = ()


@dataclass(frozen=True)
class TStop(Term):
    pass


@dataclass(frozen=True)
class TDead(Term):
    pass


@dataclass(frozen=True)
class TPost(Term):
    action: Action
    then_: Term
    else_: Term


@dataclass(frozen=True)
class TFork(Term):
    forked: Term
    then_: Term
    else_: Term


@dataclass(frozen=True)
class TProb(Term):
    branches: Tuple[Tuple[Fraction, Term], ...]


@dataclass(frozen=True)
class TVar(Term):
    name: str


@dataclass(frozen=True)
class TRec(Term):
    """A system of recursion equations together with the selected variable."""

    equations: Tuple[Tuple[str, Term], ...]
    body: str


def tprefix(action: Action, term: Term) -> Term:
    """Action prefixing: perform the action, then continue either way."""
    return TPost(action, term, term)


def tchoice(left: Term, weight: Fraction, right: Term) -> Term:
    """Binary probabilistic choice: `left` with `weight`, else `right`."""
    w = Fraction(weight)
    return TProb(((w, left), (1 - w, right)))


def _unguarded_free(term: Term, bound: frozenset) -> frozenset:
    """Variables occurring in `term` outside any action test.

    Also validates that every variable is bound and that no recursion
    cycle avoids action tests.  A variable occurrence is guarded only
    under an action test: probabilistic choices and forks do not guard
    (their finite-depth approximations consume no depth, so a cycle
    through them alone has no approximants).
    """
    if isinstance(term, TVar):
        if term.name not in bound:
            raise ValueError(f"unbound variable {term.name!r}")
        return frozenset((term.name,))
    if isinstance(term, TPost):
        _unguarded_free(term.then_, bound)
        _unguarded_free(term.else_, bound)
        return frozenset()
    if isinstance(term, TFork):
        return (
            _unguarded_free(term.forked, bound)
            | _unguarded_free(term.then_, bound)
            | _unguarded_free(term.else_, bound)
        )
    if isinstance(term, TProb):
        out = frozenset()
        for _, t in term.branches:
            out |= _unguarded_free(t, bound)
        return out
    if isinstance(term, TRec):
        names = [n for n, _ in term.equations]
        if len(set(names)) != len(names):
            raise ValueError("duplicate equation variable")
        if term.body not in names:
            raise ValueError(f"selected variable {term.body!r} has no equation")
        inner = bound | frozenset(names)
        exposed = {n: _unguarded_free(rhs, inner) for n, rhs in term.equations}
        # a cycle along unguarded occurrences has no unique solution
        state: Dict[str, int] = {}

        def visit(name: str) -> None:
            if state.get(name) == 1:
                return
            if state.get(name) == 0:
                raise UnguardedRecursion(
                    f"variable {name!r} recurs without an action test guarding it"
                )
            state[name] = 0
            for dep in exposed[name]:
                if dep in exposed:
                    visit(dep)
            state[name] = 1

        for name in names:
            visit(name)
        # outer variables unguardedly reachable from the selected equation
        seen = set()
        frontier = [term.body]
        out = frozenset()
        while frontier:
            name = frontier.pop()
            if name in seen:
                continue
            seen.add(name)
            out |= exposed[name] - frozenset(names)
            frontier.extend(dep for dep in exposed[name] if dep in exposed)
        return out
    return frozenset()


def _assemble(term: Term, env: Dict[str, int], b: GraphBuilder) -> int:
    if isinstance(term, TStop):
        return b.add(STOP)
    if isinstance(term, TDead):
        return b.add(DEAD)
    if isinstance(term, TPost):
        return b.add(
            Post(term.action, _assemble(term.then_, env, b), _assemble(term.else_, env, b))
        )
    if isinstance(term, TFork):
        return b.add(
            Fork(
                _assemble(term.forked, env, b),
                _assemble(term.then_, env, b),
                _assemble(term.else_, env, b),
            )
        )
    if isinstance(term, TProb):
        weights = [Fraction(w) for w, _ in term.branches]
        for w in weights:
            if not meadow.is_probability(w):
                raise MalformedProbability(f"weight {w} outside [0, 1]")
        if sum(weights) != 1:
            raise WeightSumNotOne(f"weights sum to {sum(weights)}, not 1")
        kept = [
            (w, _assemble(t, env, b))
            for w, (_, t) in zip(weights, term.branches)
            if w != 0
        ]
        if len(kept) == 1:
            return kept[0][1]
        return b.add(Prob(tuple(kept)))
    if isinstance(term, TVar):
        return env[term.name]
    if isinstance(term, TRec):
        # alias equations (X = Y) share the target's slot outright
        aliases = {n: rhs.name for n, rhs in term.equations if isinstance(rhs, TVar)}
        inner = dict(env)
        for name, rhs in term.equations:
            if name not in aliases:
                inner[name] = b.reserve()
        for name in aliases:
            target = aliases[name]
            while target in aliases:
                target = aliases[target]
            inner[name] = inner[target]
        for name, rhs in term.equations:
            if name not in aliases:
                b.copy_into(inner[name], _assemble(rhs, inner, b))
        return inner[term.body]
    raise TypeError(f"not a term: {term!r}")


def build(term: Term) -> ThreadGraph:
    """Graph whose unfolding is the given closed term.

    Recursion must be guarded: no dependency cycle among equations may
    avoid action tests.  Zero-weight branches are dropped on input; a
    weight of one collapses the choice; weights outside [0, 1] are
    rejected.
    """
    _unguarded_free(term, frozenset())
    b = GraphBuilder()
    root = _assemble(term, {}, b)
    return trim(b.graph(root))


def nary_prob(weights: Sequence[Fraction], targets: Sequence[Term]) -> Term:
    """Right-nested binary choices realizing a distribution over targets.

    Built inductively: the first branch keeps its weight and the
    remaining weights are renormalized by meadow division, so a zero
    remainder never divides.  Weights must sum to exactly one.
    """
    if not targets or len(weights) != len(targets):
        raise ValueError("weights and targets must be nonempty and equal length")
    ws = [Fraction(w) for w in weights]
    for w in ws:
        if not meadow.is_probability(w):
            raise MalformedProbability(f"weight {w} outside [0, 1]")
    if sum(ws) != 1:
        raise WeightSumNotOne(f"weights sum to {sum(ws)}, not 1")

    def rec(ws: List[Fraction], tails: List[Term]) -> Term:
        if len(tails) == 1 or ws[0] == 1:
            return tails[0]
        w0 = ws[0]
        rest = rec([meadow.div(w, 1 - w0) for w in ws[1:]], tails[1:])
        return TProb(((w0, tails[0]), (1 - w0, rest)))

    return rec(ws, list(targets))


# ---------------------------------------------------------------------------
# Canonical forms


def _tau_closed(node: Node) -> Node:
    # The internal action always answers True, so its else branch is dead.
    if isinstance(node, Post) and node.action.is_tau and node.else_ != node.then_:
        return Post(node.action, node.then_, node.then_)
    return node


def head_distributions(g: ThreadGraph, refs) -> Dict[int, Dict[int, Fraction]]:
    """For each reference, its distribution over deterministic nodes.

    Choice layers are flattened by multiplying weights along the way;
    guardedness keeps those layers acyclic.
    """
    dist: Dict[int, Dict[int, Fraction]] = {}
    visiting = set()

    def go(r: int) -> Dict[int, Fraction]:
        if r in dist:
            return dist[r]
        node = g.nodes[r]
        if not isinstance(node, Prob):
            d = {r: meadow.ONE}
        else:
            if r in visiting:
                raise UnguardedRecursion("cycle through probabilistic choices")
            visiting.add(r)
            acc: Dict[int, Fraction] = {}
            for w, t in node.branches:
                for dr, dw in go(t).items():
                    acc[dr] = acc.get(dr, meadow.ZERO) + w * dw
            visiting.discard(r)
            d = acc
        dist[r] = d
        return d

    for r in refs:
        go(r)
    return dist


def _slot_refs(node: Node) -> Tuple[int, ...]:
    if isinstance(node, Post):
        return (node.then_, node.else_)
    if isinstance(node, Fork):
        return (node.forked, node.then_, node.else_)
    return ()


def normalize(g: ThreadGraph) -> ThreadGraph:
    """The canonical graph of a regular thread.

    Idempotent, and two graphs normalize to equal values exactly when
    they have the same behaviour.  Equality of canonical graphs is
    therefore plain structural equality.
    """
    order = reachable(g)
    dets: Dict[int, Node] = {}
    for r in order:
        node = _tau_closed(g.nodes[r])
        if not isinstance(node, Prob):
            dets[r] = node
    head = head_distributions(g, order)

    refs = sorted(dets)

    def base_key(r: int):
        node = dets[r]
        if isinstance(node, Stop):
            return (0, "", "")
        if isinstance(node, DeadEnd):
            return (1, "", "")
        if isinstance(node, Post):
            return (2, node.action.focus, node.action.method)
        return (3, "", "")

    ranking = {k: i for i, k in enumerate(sorted({base_key(r) for r in refs}))}
    block = {r: ranking[base_key(r)] for r in refs}

    def class_dist(cref: int) -> Tuple[Tuple[int, Fraction], ...]:
        agg: Dict[int, Fraction] = {}
        for dref, w in head[cref].items():
            bid = block[dref]
            agg[bid] = agg.get(bid, meadow.ZERO) + w
        return tuple(sorted(agg.items()))

    # Partition refinement: split blocks until each is closed under the
    # block-level branch distributions of every child slot.  The block
    # indices are re-derived from sorted signatures each round, so the
    # final numbering is intrinsic to the behaviour, not the input order.
    while True:
        sigs = {
            r: (block[r], tuple(class_dist(c) for c in _slot_refs(dets[r])))
            for r in refs
        }
        ranking = {s: i for i, s in enumerate(sorted(set(sigs.values())))}
        new_block = {r: ranking[sigs[r]] for r in refs}
        if new_block == block:
            break
        block = new_block

    rep: Dict[int, int] = {}
    for r in refs:
        rep.setdefault(block[r], r)

    slot_dists = {
        c: tuple(class_dist(x) for x in _slot_refs(dets[r])) for c, r in rep.items()
    }
    root_dist = class_dist(g.root)

    # the tau closure can orphan classes: keep only those reachable in
    # the quotient, compressing ids while preserving the rank order
    live = {c for c, _ in root_dist}
    frontier = list(live)
    while frontier:
        c = frontier.pop()
        for d in slot_dists[c]:
            for c2, _ in d:
                if c2 not in live:
                    live.add(c2)
                    frontier.append(c2)
    remap = {c: i for i, c in enumerate(sorted(live))}
    n_classes = len(remap)

    def compress(d):
        return tuple((remap[c], w) for c, w in d)

    multis = {
        tuple((w, c) for c, w in compress(d))
        for c0 in live
        for d in slot_dists[c0] + (root_dist,)
        if len(d) > 1
    }
    prob_id = {br: n_classes + i for i, br in enumerate(sorted(multis))}

    def resolve(d: Tuple[Tuple[int, Fraction], ...]) -> int:
        d = compress(d)
        if len(d) == 1:
            return d[0][0]
        return prob_id[tuple((w, c) for c, w in d)]

    nodes: List[Node] = [None] * (n_classes + len(prob_id))  # type: ignore[list-item]
    for c in live:
        node = dets[rep[c]]
        new = remap[c]
        if isinstance(node, Stop):
            nodes[new] = STOP
        elif isinstance(node, DeadEnd):
            nodes[new] = DEAD
        elif isinstance(node, Post):
            d1, d2 = slot_dists[c]
            nodes[new] = Post(node.action, resolve(d1), resolve(d2))
        else:
            d0, d1, d2 = slot_dists[c]
            nodes[new] = Fork(resolve(d0), resolve(d1), resolve(d2))
    for br, i in prob_id.items():
        nodes[i] = Prob(br)
    return ThreadGraph(tuple(nodes), resolve(root_dist))


# ---------------------------------------------------------------------------
# Projections and equality


def project(n: int, g: ThreadGraph) -> ThreadGraph:
    """The approximation of `g` cut off after `n` action steps.

    Depth zero is inaction.  Performing an action consumes one level;
    probabilistic choices and forks are passed through unchanged, so
    only action tests count towards the depth.
    """
    if n < 0:
        raise ValueError("projection depth must be a natural number")
    b = GraphBuilder()
    memo: Dict[Tuple[int, int], int] = {}

    def go(r: int, k: int) -> int:
        key = (r, k)
        got = memo.get(key)
        if got is not None:
            return got
        if k == 0:
            out = b.add(DEAD)
        else:
            node = g.nodes[r]
            if isinstance(node, Stop):
                out = b.add(STOP)
            elif isinstance(node, DeadEnd):
                out = b.add(DEAD)
            elif isinstance(node, Post):
                out = b.add(Post(node.action, go(node.then_, k - 1), go(node.else_, k - 1)))
            elif isinstance(node, Fork):
                out = b.add(Fork(go(node.forked, k), go(node.then_, k), go(node.else_, k)))
            else:
                out = b.add(Prob(tuple((w, go(t, k)) for w, t in node.branches)))
        memo[key] = out
        return out

    return b.graph(go(g.root, n))


def equal_up_to(n: int, g1: ThreadGraph, g2: ThreadGraph) -> bool:
    """Whether the depth-`n` approximations have equal canonical forms."""
    return normalize(project(n, g1)) == normalize(project(n, g2))


# ---------------------------------------------------------------------------
# Graph combinators: compose whole graphs the way terms compose


def _merge_into(b: GraphBuilder, g: ThreadGraph) -> int:
    # reserve slots first so cyclic references resolve
    order = reachable(g)
    memo = {r: b.reserve() for r in order}
    for r in order:
        b.fill(memo[r], _map_refs(g.nodes[r], memo))
    return memo[g.root]


def combine_post(action: Action, then_g: ThreadGraph, else_g: ThreadGraph) -> ThreadGraph:
    """The thread performing `action`, then one of the two graphs."""
    b = GraphBuilder()
    t = _merge_into(b, then_g)
    e = _merge_into(b, else_g)
    return b.graph(b.add(Post(action, t, e)))


def combine_prefix(action: Action, g: ThreadGraph) -> ThreadGraph:
    b = GraphBuilder()
    t = _merge_into(b, g)
    return b.graph(b.add(Post(action, t, t)))


def combine_fork(forked_g: ThreadGraph, then_g: ThreadGraph, else_g: ThreadGraph) -> ThreadGraph:
    b = GraphBuilder()
    f = _merge_into(b, forked_g)
    t = _merge_into(b, then_g)
    e = _merge_into(b, else_g)
    return b.graph(b.add(Fork(f, t, e)))


def combine_prob(branches: Sequence[Tuple[Fraction, ThreadGraph]]) -> ThreadGraph:
    """One thread choosing among whole graphs with the given weights."""
    b = GraphBuilder()
    merged = [(w, _merge_into(b, g)) for w, g in branches]
    return b.graph(b.prob(merged))


def bisimilar(g1: ThreadGraph, g2: ThreadGraph) -> bool:
    """Exact behavioural equality of regular threads, at every depth."""
    return normalize(g1) == normalize(g2)
