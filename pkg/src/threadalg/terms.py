"""Textual syntax for thread terms.

Grammar::

    term     := 'S' | 'D'
              | 'post' '(' action ',' term ',' term ')'
              | 'prefix' '(' action ',' term ')'
              | 'fork' '(' term ',' term ',' term ')'
              | 'prob' '(' rational ':' term {',' rational ':' term} ')'
              | 'rec' VAR '{' {VAR '=' term ';'} '}' 'in' VAR
              | VAR
    action   := 'tau' | NAME ['.' NAME ['(' rational ')']]
    rational := ['-'] INT ['/' INT]

An action name without a dot gets the focus `main`.  The printer names
graph nodes only where cycles or sharing require it, so acyclic graphs
print as plain nested terms.
"""

from __future__ import annotations

import re
from typing import Dict, List, Set, Tuple

from . import meadow, threads
from .errors import ParseError
from .threads import (
    Action,
    DeadEnd,
    Fork,
    Post,
    Prob,
    Stop,
    TAU,
    TDead,
    TFork,
    TPost,
    TProb,
    TRec,
    TStop,
    TVar,
    Term,
    ThreadGraph,
)

KEYWORDS = {"S", "D", "post", "prefix", "fork", "prob", "rec", "in", "tau"}

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?::[A-Za-z0-9_]+)*)
      | (?P<int>\d+)
      | (?P<punct>[(){},;:=./\-])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), i))
        i = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return tok

    def fail(self, message: str):
        raise ParseError(message, self.peek().pos)

    # ---- rationals ---------------------------------------------------

    def rational(self):
        negative = False
        if self.peek().text == "-":
            self.next()
            negative = True
        tok = self.next()
        if tok.kind != "int":
            raise ParseError(f"expected a number, found {tok.text!r}", tok.pos)
        num = int(tok.text)
        den = 1
        if self.peek().text == "/":
            self.next()
            dtok = self.next()
            if dtok.kind != "int":
                raise ParseError(f"expected a denominator, found {dtok.text!r}", dtok.pos)
            den = int(dtok.text)
            if den == 0:
                raise ParseError("zero denominator", dtok.pos)
        value = meadow.rat(num, den)
        return -value if negative else value

    # ---- actions -----------------------------------------------------

    def action(self) -> Action:
        tok = self.next()
        if tok.kind != "name":
            raise ParseError(f"expected an action, found {tok.text!r}", tok.pos)
        if tok.text == "tau":
            return TAU
        if tok.text in KEYWORDS:
            raise ParseError(f"keyword {tok.text!r} cannot name an action", tok.pos)
        focus = tok.text
        if self.peek().text != ".":
            return threads.basic(threads.MAIN_FOCUS, focus)
        self.next()
        mtok = self.next()
        if mtok.kind != "name":
            raise ParseError(f"expected a method name, found {mtok.text!r}", mtok.pos)
        method = mtok.text
        if self.peek().text == "(":
            self.next()
            p = self.rational()
            self.expect(")")
            method = f"{method}({meadow.format_rational(p)})"
        return threads.basic(focus, method)

    # ---- terms -------------------------------------------------------

    def term(self, scope: Set[str]) -> Term:
        tok = self.peek()
        if tok.text == "S":
            self.next()
            return TStop()
        if tok.text == "D":
            self.next()
            return TDead()
        if tok.text == "post":
            self.next()
            self.expect("(")
            a = self.action()
            self.expect(",")
            t1 = self.term(scope)
            self.expect(",")
            t2 = self.term(scope)
            self.expect(")")
            return TPost(a, t1, t2)
        if tok.text == "prefix":
            self.next()
            self.expect("(")
            a = self.action()
            self.expect(",")
            t = self.term(scope)
            self.expect(")")
            return TPost(a, t, t)
        if tok.text == "fork":
            self.next()
            self.expect("(")
            tf = self.term(scope)
            self.expect(",")
            t1 = self.term(scope)
            self.expect(",")
            t2 = self.term(scope)
            self.expect(")")
            return TFork(tf, t1, t2)
        if tok.text == "prob":
            self.next()
            self.expect("(")
            branches = [self.branch(scope)]
            while self.peek().text == ",":
                self.next()
                branches.append(self.branch(scope))
            self.expect(")")
            return TProb(tuple(branches))
        if tok.text == "rec":
            return self.rec(scope)
        if tok.kind == "name" and tok.text not in KEYWORDS:
            self.next()
            if tok.text not in scope:
                raise ParseError(f"unbound variable {tok.text!r}", tok.pos)
            return TVar(tok.text)
        raise ParseError(f"expected a term, found {tok.text or 'end of input'!r}", tok.pos)

    def branch(self, scope: Set[str]):
        w = self.rational()
        self.expect(":")
        return (w, self.term(scope))

    def rec(self, scope: Set[str]) -> Term:
        self.expect("rec")
        head = self.next()
        if head.kind != "name" or head.text in KEYWORDS:
            raise ParseError(f"expected a variable, found {head.text!r}", head.pos)
        self.expect("{")
        names: List[str] = []
        # collect the variable names first so equations may refer forward
        mark = self.i
        while self.peek().text != "}":
            vtok = self.next()
            if vtok.kind != "name" or vtok.text in KEYWORDS:
                raise ParseError(f"expected a variable, found {vtok.text!r}", vtok.pos)
            names.append(vtok.text)
            self.expect("=")
            self.skip_term()
            self.expect(";")
        self.i = mark
        inner = scope | set(names)
        equations: List[Tuple[str, Term]] = []
        while self.peek().text != "}":
            vtok = self.next()
            self.expect("=")
            equations.append((vtok.text, self.term(inner)))
            self.expect(";")
        self.expect("}")
        self.expect("in")
        body = self.next()
        if body.text not in names:
            raise ParseError(f"selected variable {body.text!r} has no equation", body.pos)
        if head.text not in names:
            raise ParseError(f"variable {head.text!r} has no equation", head.pos)
        return TRec(tuple(equations), body.text)

    def skip_term(self) -> None:
        # skim tokens of one equation body: balanced parens up to ';'
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                raise ParseError("unterminated equation", tok.pos)
            if depth == 0 and tok.text in (";", "}"):
                return
            if tok.text in "({":
                depth += 1
            elif tok.text in ")}":
                depth -= 1
            self.next()


def parse_term(text: str) -> Term:
    """Parse the textual syntax into a term."""
    p = _Parser(text)
    t = p.term(set())
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.pos)
    return t


def parse_thread(text: str) -> ThreadGraph:
    """Parse and build in one step."""
    return threads.build(parse_term(text))


# ---------------------------------------------------------------------------
# Printing


def _action_text(a: Action) -> str:
    return str(a)


def _print_children(node) -> Tuple[int, ...]:
    # children in printed order; an equal-branch test prints only once
    if isinstance(node, Post):
        if node.then_ == node.else_:
            return (node.then_,)
        return (node.then_, node.else_)
    if isinstance(node, Fork):
        return (node.forked, node.then_, node.else_)
    if isinstance(node, Prob):
        return tuple(t for _, t in node.branches)
    return ()


def print_term(g: ThreadGraph) -> str:
    """Deterministic textual form of a graph; `parse_thread` inverts it."""
    color: Dict[int, int] = {}
    pre: Dict[int, int] = {}
    visits: Dict[int, int] = {}
    named: Set[int] = set()

    def dfs(r: int) -> None:
        visits[r] = visits.get(r, 0) + 1
        c = color.get(r)
        if c == 0:
            named.add(r)
            return
        if c == 1:
            return
        color[r] = 0
        pre[r] = len(pre)
        for ch in _print_children(g.nodes[r]):
            dfs(ch)
        color[r] = 1

    dfs(g.root)
    for r, count in visits.items():
        if count > 1 and not isinstance(g.nodes[r], (Stop, DeadEnd)):
            named.add(r)
    if named:
        named.add(g.root)
    names = {r: f"X{i}" for i, r in enumerate(sorted(named, key=pre.get))}

    def render(r: int, as_def: bool = False) -> str:
        if r in names and not as_def:
            return names[r]
        node = g.nodes[r]
        if isinstance(node, Stop):
            return "S"
        if isinstance(node, DeadEnd):
            return "D"
        if isinstance(node, Post):
            if node.then_ == node.else_:
                return f"prefix({_action_text(node.action)}, {render(node.then_)})"
            return (
                f"post({_action_text(node.action)}, "
                f"{render(node.then_)}, {render(node.else_)})"
            )
        if isinstance(node, Fork):
            return f"fork({render(node.forked)}, {render(node.then_)}, {render(node.else_)})"
        branches = ", ".join(
            f"{meadow.format_rational(w)}: {render(t)}" for w, t in node.branches
        )
        return f"prob({branches})"

    if not named:
        return render(g.root)
    main = names[g.root]
    eqs = " ".join(
        f"{names[r]} = {render(r, as_def=True)};" for r in sorted(named, key=pre.get)
    )
    return f"rec {main} {{ {eqs} }} in {main}"
