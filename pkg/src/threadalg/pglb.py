"""An assembly-like instruction notation with random choice instructions.

Instruction sequences are written as `;`-separated primitive
instructions::

    a       plain basic instruction (reply ignored)
    +a      positive test: True continues, False skips one instruction
    -a      negative test: the reverse
    %p      plain random choice with probability p (reply ignored)
    +%p     positive random choice
    -%p     negative random choice
    #l      jump l instructions forward (0 means inactive)
    \\l      jump l instructions backward (clamped at the start)
    !       terminate

`//` starts a line comment.  Basic instruction names may be dotted
(`f.m`) to address a named service; bare names get the focus `main`.

`extract_at` maps a position in a sequence to the thread it produces:
out-of-range positions and infinite jump chains give inaction, tests
branch on replies, and random choices become requests to the `random`
service.  `extract` is the behaviour of the whole sequence: the thread
from position 1, run against the random Boolean generator, with
internal steps concealed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from . import interaction, meadow, services, threads
from .errors import ParseError
from .threads import Action, DEAD, GraphBuilder, Post, STOP, ThreadGraph

RANDOM_FOCUS = "random"


@dataclass(frozen=True)
class BasicInstr:
    test: str  # 'plain' | 'pos' | 'neg'
    name: str


@dataclass(frozen=True)
class RandomInstr:
    test: str  # 'plain' | 'pos' | 'neg'
    prob: Fraction


@dataclass(frozen=True)
class JumpInstr:
    backward: bool
    offset: int


@dataclass(frozen=True)
class HaltInstr:
    pass


Instruction = Union[BasicInstr, RandomInstr, JumpInstr, HaltInstr]

HALT = HaltInstr()


@dataclass(frozen=True)
class Program:
    """A nonempty instruction sequence."""

    instructions: Tuple[Instruction, ...]

    def __post_init__(self):
        if not self.instructions:
            raise ValueError("an instruction sequence has at least one instruction")

    def __len__(self) -> int:
        return len(self.instructions)


_NAME = r"[A-Za-z_][A-Za-z0-9_]*(?::[A-Za-z0-9_]+)*"
_RAT = r"-?\d+(?:/\d+)?"
_INSTR_RE = re.compile(
    rf"""  !
        | \#(?P<fwd>\d+)
        | \\(?P<bwd>\d+)
        | (?P<rtest>[+-])?%(?P<rprob>{_RAT})
        | (?P<btest>[+-])?(?P<bname>{_NAME}(?:\.{_NAME}(?:\({_RAT}\))?)?)
    """,
    re.VERBOSE,
)


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("//", 1)[0] for line in text.splitlines())


def parse_program(text: str) -> Program:
    """Parse `;`-separated instructions; whitespace is insignificant."""
    stripped = _strip_comments(text)
    if not stripped.strip():
        raise ParseError("empty instruction sequence", 0)
    instructions: List[Instruction] = []
    offset = 0
    for chunk in stripped.split(";"):
        piece = chunk.strip()
        pos = offset + (len(chunk) - len(chunk.lstrip()))
        offset += len(chunk) + 1
        if not piece:
            raise ParseError("empty instruction", pos)
        m = _INSTR_RE.fullmatch(piece)
        if not m:
            raise ParseError(f"malformed instruction {piece!r}", pos)
        if piece == "!":
            instructions.append(HALT)
        elif m.group("fwd") is not None:
            instructions.append(JumpInstr(False, int(m.group("fwd"))))
        elif m.group("bwd") is not None:
            instructions.append(JumpInstr(True, int(m.group("bwd"))))
        elif m.group("rprob") is not None:
            p = meadow.parse_rational(m.group("rprob"))
            if not meadow.is_probability(p):
                raise ParseError(f"choice probability {piece!r} outside [0, 1]", pos)
            test = {"+": "pos", "-": "neg", None: "plain"}[m.group("rtest")]
            instructions.append(RandomInstr(test, p))
        else:
            test = {"+": "pos", "-": "neg", None: "plain"}[m.group("btest")]
            instructions.append(BasicInstr(test, m.group("bname")))
    return Program(tuple(instructions))


def print_program(p: Program) -> str:
    parts = []
    for u in p.instructions:
        if isinstance(u, HaltInstr):
            parts.append("!")
        elif isinstance(u, JumpInstr):
            parts.append(("\\" if u.backward else "#") + str(u.offset))
        elif isinstance(u, RandomInstr):
            sign = {"pos": "+", "neg": "-", "plain": ""}[u.test]
            parts.append(f"{sign}%{meadow.format_rational(u.prob)}")
        else:
            sign = {"pos": "+", "neg": "-", "plain": ""}[u.test]
            parts.append(sign + u.name)
    return " ; ".join(parts)


def random_action(p: Fraction) -> Action:
    """The request a random choice instruction makes: random.get(p)."""
    return threads.basic(RANDOM_FOCUS, f"get({meadow.format_rational(p)})")


def extract_at(position: int, program: Program) -> ThreadGraph:
    """The thread produced by execution starting at the given position."""
    instrs = program.instructions
    k = len(instrs)

    def resolve(j: int) -> Optional[int]:
        # follow jumps; a revisited jump position is an infinite chain
        seen = set()
        while True:
            if not 1 <= j <= k:
                return None
            u = instrs[j - 1]
            if not isinstance(u, JumpInstr):
                return j
            if j in seen:
                return None
            seen.add(j)
            j = max(j - u.offset, 0) if u.backward else j + u.offset

    b = GraphBuilder()
    slots: Dict[int, int] = {}

    def node_for(j: Optional[int]) -> int:
        if j is None:
            return b.add(DEAD)
        if j in slots:
            return slots[j]
        slots[j] = b.reserve()
        u = instrs[j - 1]
        if isinstance(u, HaltInstr):
            content = STOP
        else:
            if isinstance(u, BasicInstr):
                act = threads.action_from_name(u.name)
                test = u.test
            else:
                act = random_action(u.prob)
                test = u.test
            nxt = node_for(resolve(j + 1))
            if test == "plain":
                content = Post(act, nxt, nxt)
            else:
                skip = node_for(resolve(j + 2))
                if test == "pos":
                    content = Post(act, nxt, skip)
                else:
                    content = Post(act, skip, nxt)
        b.fill(slots[j], content)
        return slots[j]

    return threads.trim(b.graph(node_for(resolve(position))))


def extract(
    program: Program,
    *,
    entry: int = 1,
    with_random: bool = True,
    with_abstraction: bool = True,
) -> ThreadGraph:
    """The behaviour of an instruction sequence under execution.

    Random choice instructions are resolved exactly by the random
    Boolean generator and internal steps are concealed; the flags turn
    the two stages off for inspection.
    """
    g = extract_at(entry, program)
    if with_random:
        g = interaction.use(
            g, services.singleton(RANDOM_FOCUS, services.RANDOM)
        )
    if with_abstraction:
        g = interaction.abstract_tau(g)
    return g
