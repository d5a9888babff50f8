"""Exact arithmetic in the signed meadow of rationals.

The inverse is total (the inverse of zero is zero), which is what lets
every probability expression downstream evaluate without side
conditions, and the signum operator gives exact order predicates.
"""

from threadalg import meadow
from threadalg.meadow import div, inv, leq, lt, rat, signum

half = rat(1, 2)
third = rat(1, 3)

print("1/2 + 1/3 =", half + third)
print("inv(2/3)  =", inv(rat(2, 3)))
print("inv(0)    =", inv(rat(0)), "(totalized: no error)")
print("0/0       =", div(rat(0), rat(0)))
print("sign(-7/3)=", signum(rat(-7, 3)))
print("1/2 <= 1/2:", leq(half, half), "  2/3 < 1/2:", lt(rat(2, 3), half))

# the probability range check is itself a meadow expression
for v in (rat(0), half, rat(1), rat(3, 2)):
    print(f"is_probability({meadow.format_rational(v)}) =", meadow.is_probability(v))
