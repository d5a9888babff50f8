"""Exact outcome distributions and a seeded sampling cross-check."""

from fractions import Fraction

import threadalg as ta
from threadalg import analysis

coin = ta.extract(ta.parse_program("+%1/2 ; ! ; #0"))
exact = analysis.outcome_distribution(coin, analysis.EMPTY_ENVIRONMENT, 3)
print("exact terminate:", exact.terminate)

freq = analysis.sample_outcomes(coin, analysis.EMPTY_ENVIRONMENT, 3, seed=7, runs=20_000)
print("empirical      :", freq[analysis.TERMINATE], "=", float(freq[analysis.TERMINATE]))

# a thread with environment-driven branching and its trace table
g = ta.parse_thread("post(sensor.read, prefix(act, S), D)")
env = analysis.Environment({ta.basic("sensor", "read"): Fraction(2, 3),
                            ta.basic("main", "act"): Fraction(1)})
d = analysis.outcome_distribution(g, env, 5, with_traces=True)
print("terminate:", d.terminate, " deadlock:", d.deadlock)
for trace, mass in d.traces:
    print("  trace", " ".join(trace) or "(empty)", "->", mass)
