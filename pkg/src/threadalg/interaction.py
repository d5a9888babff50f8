"""Resolving thread actions against service families, and hiding tau.

`use` runs a thread against a family of named services: an action
`f.m` whose focus is named in the family becomes the internal action
tau followed by an exact probabilistic choice between the two
continuations, weighted by the service's reply probability, while the
service advances to its derived state.  Actions with unnamed foci pass
through untouched.  The construction is a product over pairs of a
thread node and a family state, so it stays finite exactly when the
reachable service states do.

`abstract_tau` conceals tau steps.  On a finite graph a region of tau
and choice nodes is an absorbing chain; the probability with which
each node escapes to each visible successor is computed exactly by
solving the region's linear system over the rationals, and mass that
can never escape becomes inaction (every finite-depth approximation of
a pure internal loop is cut to inaction, so its limit is inaction).
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Dict, List, Tuple

from . import meadow, threads
from .errors import NonRegularProduct
from .services import ServiceFamily
from .threads import (
    DEAD,
    DeadEnd,
    Fork,
    GraphBuilder,
    Post,
    Prob,
    STOP,
    Stop,
    TAU,
    ThreadGraph,
)

DEFAULT_STATE_BOUND = 100_000


def use(
    g: ThreadGraph,
    family: ServiceFamily,
    *,
    state_bound: int = DEFAULT_STATE_BOUND,
) -> ThreadGraph:
    """The thread `g` with its actions processed by the named services.

    Raises NonRegularProduct when the reachable (node, family-state)
    pairs exceed `state_bound`.
    """
    nodes: List = []
    slots: Dict[Tuple[int, ServiceFamily], int] = {}
    aux: Dict = {}
    queue = deque()

    def slot(ref: int, fam: ServiceFamily) -> int:
        key = (ref, fam)
        got = slots.get(key)
        if got is None:
            if len(slots) >= state_bound:
                raise NonRegularProduct(
                    f"more than {state_bound} (node, service-state) pairs"
                )
            got = len(nodes)
            nodes.append(None)
            slots[key] = got
            queue.append(key)
        return got

    def aux_node(node) -> int:
        got = aux.get(node)
        if got is None:
            got = len(nodes)
            nodes.append(node)
            aux[node] = got
        return got

    root = slot(g.root, family)
    while queue:
        ref, fam = queue.popleft()
        node = g.nodes[ref]
        if isinstance(node, Stop):
            content = STOP
        elif isinstance(node, DeadEnd):
            content = DEAD
        elif isinstance(node, Prob):
            content = Prob(tuple((w, slot(t, fam)) for w, t in node.branches))
        elif isinstance(node, Fork):
            content = Fork(
                slot(node.forked, fam), slot(node.then_, fam), slot(node.else_, fam)
            )
        elif node.action.is_tau:
            t = slot(node.then_, fam)
            content = Post(TAU, t, t)
        else:
            service = fam.get(node.action.focus)
            if service is None:
                content = Post(
                    node.action, slot(node.then_, fam), slot(node.else_, fam)
                )
            else:
                p = service.reply(node.action.method)
                if p is None:
                    dead = aux_node(DEAD)
                    content = Post(TAU, dead, dead)
                else:
                    p = meadow.as_probability(p)
                    derived = fam.replace(
                        node.action.focus, service.derive(node.action.method)
                    )
                    branches = [
                        (w, target)
                        for w, target in (
                            (p, node.then_),
                            (1 - p, node.else_),
                        )
                        if w != 0
                    ]
                    if len(branches) == 1:
                        inner = slot(branches[0][1], derived)
                    else:
                        inner = aux_node(
                            Prob(tuple((w, slot(t, derived)) for w, t in branches))
                        )
                    content = Post(TAU, inner, inner)
        nodes[slots[(ref, fam)]] = content

    return threads.trim(ThreadGraph(tuple(nodes), root))


# ---------------------------------------------------------------------------
# Abstraction


def _solve(a: List[List[Fraction]], b: List[List[Fraction]]) -> List[List[Fraction]]:
    """Solve a @ x = b exactly by Gauss-Jordan elimination."""
    n = len(a)
    width = len(b[0]) if b else 0
    rows = [list(a[i]) + list(b[i]) for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular linear system")
        rows[col], rows[piv] = rows[piv], rows[col]
        factor = rows[col][col]
        rows[col] = [x / factor for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return [row[n:] for row in rows]


def abstract_tau(g: ThreadGraph) -> ThreadGraph:
    """The thread `g` with every internal step concealed.

    Exact on regular threads: escape probabilities out of internal
    regions come from a rational linear solve, and non-escaping mass
    maps to inaction.
    """
    n = threads.normalize(g)
    tau_refs = [
        r
        for r, node in enumerate(n.nodes)
        if isinstance(node, Post) and node.action.is_tau
    ]
    if not tau_refs:
        return n
    tau_set = set(tau_refs)
    head = threads.head_distributions(n, range(len(n.nodes)))
    visible = {
        r
        for r, node in enumerate(n.nodes)
        if not isinstance(node, Prob) and r not in tau_set
    }

    # one-step distribution of each internal node
    step = {t: head[n.nodes[t].then_] for t in tau_refs}

    # internal nodes from which some visible node is reachable
    escaping = set()
    changed = True
    while changed:
        changed = False
        for t in tau_refs:
            if t in escaping:
                continue
            if any(d in visible or d in escaping for d in step[t]):
                escaping.add(t)
                changed = True

    solved: Dict[int, Dict[int, Fraction]] = {}
    if escaping:
        order = sorted(escaping)
        pos = {t: i for i, t in enumerate(order)}
        targets = sorted({d for t in order for d in step[t] if d in visible})
        tpos = {d: j for j, d in enumerate(targets)}
        a = [
            [
                (meadow.ONE if i == j else meadow.ZERO)
                - step[order[i]].get(order[j], meadow.ZERO)
                for j in range(len(order))
            ]
            for i in range(len(order))
        ]
        b = [
            [step[order[i]].get(d, meadow.ZERO) for d in targets]
            for i in range(len(order))
        ]
        x = _solve(a, b)
        for t in order:
            solved[t] = {
                d: x[pos[t]][tpos[d]] for d in targets if x[pos[t]][tpos[d]] != 0
            }

    def absorb(ref: int) -> Dict[int, Fraction]:
        out: Dict[int, Fraction] = {}
        for dref, w in head[ref].items():
            if dref in visible:
                out[dref] = out.get(dref, meadow.ZERO) + w
            elif dref in solved:
                for d, q in solved[dref].items():
                    out[d] = out.get(d, meadow.ZERO) + w * q
            # anything else never becomes visible again
        return out

    b = GraphBuilder()
    placed: Dict[int, int] = {}
    pending: List[int] = []

    def placed_ref(v: int) -> int:
        got = placed.get(v)
        if got is None:
            got = b.reserve()
            placed[v] = got
            pending.append(v)
        return got

    def resolve(dist: Dict[int, Fraction]) -> int:
        total = sum(dist.values(), meadow.ZERO)
        if total == 0:
            return b.add(DEAD)
        branches = [(w, placed_ref(v)) for v, w in sorted(dist.items())]
        if total != 1:
            branches.append((1 - total, b.add(DEAD)))
        return b.prob(branches)

    root = resolve(absorb(n.root))
    while pending:
        v = pending.pop()
        node = n.nodes[v]
        if isinstance(node, Stop):
            content = STOP
        elif isinstance(node, DeadEnd):
            content = DEAD
        elif isinstance(node, Post):
            content = Post(
                node.action, resolve(absorb(node.then_)), resolve(absorb(node.else_))
            )
        else:
            content = Fork(
                resolve(absorb(node.forked)),
                resolve(absorb(node.then_)),
                resolve(absorb(node.else_)),
            )
        b.fill(placed[v], content)

    return threads.normalize(threads.trim(b.graph(root)))
