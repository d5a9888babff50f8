"""Threads, probabilistic choice, and canonical forms.

A thread performs actions and makes exact internal choices.  Nested
choices flatten into a single distribution, duplicate branches merge,
and behaviourally equal recursions fold together, so equality of
behaviours is equality of canonical graphs.
"""

from fractions import Fraction

import threadalg as ta
from threadalg.threads import TRec, TStop, TVar

a = ta.basic("main", "a")

# nested choice flattens: 1/2 x + 1/2 (1/2 y + 1/2 z)
nested = ta.tchoice(
    ta.tprefix(a, TStop()),
    Fraction(1, 2),
    ta.tchoice(TStop(), Fraction(1, 2), ta.TDead()),
)
print("nested :", ta.print_term(ta.normalize(ta.build(nested))))

# one-step and two-step loops denote the same behaviour
one = ta.build(TRec((("X", ta.tprefix(a, TVar("X"))),), "X"))
two = ta.build(TRec((("Y", ta.tprefix(a, ta.tprefix(a, TVar("Y")))),), "Y"))
print("one-step loop:", ta.print_term(ta.normalize(one)))
print("two-step loop:", ta.print_term(ta.normalize(two)))
print("bisimilar:", ta.bisimilar(one, two))

# finite approximations cut a thread after n actions
for n in range(4):
    print(f"approximation at depth {n}:", ta.print_term(ta.normalize(ta.project(n, one))))
