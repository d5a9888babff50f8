"""Named services, the use operator, and abstraction.

Actions addressed at a named service are resolved into exact
probabilistic choices; hiding the leftover internal steps needs an
exact linear solve when the service loop can retry forever.
"""

from fractions import Fraction

import threadalg as ta
from threadalg import services
from threadalg.threads import TPost, TRec, TStop, TVar

# ask a Boolean register: its replies are sure
check = ta.build(TPost(ta.basic("r1", "get"), TStop(), ta.TDead()))
fam = services.singleton("r1", services.make_register(True))
print("use:", ta.print_term(ta.normalize(ta.use(check, fam))))
print("abstracted:", ta.print_term(ta.abstract_tau(ta.use(check, fam))))

# a divergent retry: succeed with probability 1/2, else try again
retry = ta.build(
    TRec(
        (
            (
                "X",
                ta.tchoice(
                    ta.tprefix(ta.basic("main", "report"), TStop()),
                    Fraction(1, 2),
                    ta.tprefix(ta.TAU, TVar("X")),
                ),
            ),
        ),
        "X",
    )
)
print("retry loop abstracts to:", ta.print_term(ta.abstract_tau(retry)))
# the whole escape mass reaches the action: the geometric series sums to 1
