"""Three restart calendars and their cost/coverage trade-off.

A calendar decides which learner copies exist and when each wipes its
state.  More copies cover more potential switch points but cost more
work per round.  The three built-ins span the trade-off:

  lin  one immortal copy per round      pool T        finest coverage
  log  one copy per power-of-two period pool log2(T)  doubling coverage
  sub  sub-exponential period ladder    pool T^o(1)   between the two

The script prints the early calendar, pool growth, and the ladder
arithmetic behind the sub calendar, then shows the degenerate ladder
that reproduces the power-of-two calendar exactly.
"""

import numpy as np

from mixtrack import PeriodSequence, make_scheme
from mixtrack.mixture import select_jt
from mixtrack.schemes import LogScheme, SubScheme


def print_calendar(scheme, T=18):
    print(f"\n{scheme.tag}: births and designated restarter J_t, t = 1..{T}")
    for t in range(1, T + 1):
        births = ", ".join(f"(p={b.period:g}, s={b.start})" for b in scheme.births_at(t)) or "-"
        jt = select_jt(scheme, t)
        print(f"  t={t:>3}  born: {births:<30}  J_t = (p={jt.period:g}, s={jt.start})")


def main():
    lin, log = make_scheme("lin"), make_scheme("log")
    sub = make_scheme("sub", horizon=64)

    print_calendar(log)
    print_calendar(sub)

    print("\npool sizes C_T:")
    print(f"  {'T':>7} {'lin':>7} {'log':>5} {'sub':>5} {'sub cap':>8}")
    for k in (4, 6, 8, 10, 12, 14):
        T = 2**k
        print(
            f"  {T:>7} {lin.expert_count(T):>7} {log.expert_count(T):>5} "
            f"{sub.expert_count(T):>5} {sub.count_bound(T):>8.0f}"
        )

    # the ladder behind sub: each rung decomposes over the previous one,
    # f_n = q*f_{n-1} + r, and contributes q copies with starts r + j*f_{n-1}
    seq = sub.ladder
    print("\nsub ladder rungs (period = q * previous + r):")
    for i in range(6):
        q, r = (seq.quotients[i], seq.offsets[i]) if i else ("-", "-")
        print(f"  rung {i + 1}: period {seq.periods[i]:>3}  q={q!s:>2} r={r!s:>2}  starts {seq.rung_starts(i)}")

    # degenerate ladder: periods 2^n with the q=1, r=f_{n-1} split gives one
    # start per rung and reproduces the power-of-two calendar, copy for copy
    dbl = SubScheme(PeriodSequence.doubling(1024))
    agree = all(
        sorted(dbl.births_at(t)) == sorted(LogScheme().births_at(t))
        and sorted(dbl.resetting_at(t)) == sorted(LogScheme().resetting_at(t))
        for t in range(1, 513)
    )
    print(f"\ndoubling ladder == power-of-two calendar over 512 rounds: {agree}")


if __name__ == "__main__":
    main()
