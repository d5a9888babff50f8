"""An assembly-like notation with random choice instructions.

The behaviour of an instruction sequence is computed exactly: random
choice instructions turn into exact distributions via the random
Boolean generator, and jumps and tests build the control flow.
"""

import threadalg as ta
from threadalg import analysis

coin = ta.parse_program("+%1/2 ; ! ; #0")
print("program  :", ta.print_program(coin))
print("raw      :", ta.print_term(ta.normalize(ta.extract_at(1, coin))))
print("behaviour:", ta.print_term(ta.extract(coin)))

d = analysis.outcome_distribution(ta.extract(coin), analysis.EMPTY_ENVIRONMENT, 3)
print("terminate:", d.terminate, " deadlock:", d.deadlock)

# an unfair retry loop: keep flipping until heads
loop = ta.parse_program("+%1/3 ; #2 ; \\2 ; !")
print("retry behaviour:", ta.print_term(ta.extract(loop)))
