"""Merging threads under round-robin, uniform, and lottery scheduling."""

import threadalg as ta
from threadalg import interleaving as il
from threadalg.threads import TStop


def chain(*methods):
    term = TStop()
    for m in reversed(methods):
        term = ta.tprefix(ta.basic("main", m), term)
    return ta.build(term)


writer = chain("w1", "w2", "w3")
reader = chain("r1", "r2", "r3")

rr = il.interleave(il.cyclic_scheduler(), [writer, reader])
print("round-robin:", ta.print_term(ta.normalize(rr)))

uni = il.interleave(il.uniform_scheduler(), [chain("a"), chain("b")])
print("uniform    :", ta.print_term(ta.normalize(uni)))

lot = il.interleave(il.lottery_scheduler(1), [chain("a"), chain("b")])
print("lottery    :", ta.print_term(ta.normalize(lot)))

# forking: the forked thread joins the pool and is scheduled like any other
forker = ta.build(
    ta.TFork(
        ta.tprefix(ta.basic("main", "child"), TStop()),
        ta.tprefix(ta.basic("main", "parent"), TStop()),
        ta.TDead(),
    )
)
print("fork       :", ta.print_term(ta.normalize(il.interleave(il.cyclic_scheduler(), [forker]))))
