"""Online bidding: the price of advice you cannot verify.

Bidding 1, 2, 4, ... is 4-competitive with no advice.  Knowing the hidden
value u exactly, a strategy tuned for worst-case ratio w can do much better
when the advice is right while staying w-competitive when it is wrong.
Run:

    python3 demos/bidding_frontier.py
"""

from __future__ import annotations

import math

from untrusted_advice import bidding

grid = bidding.log_grid(2**24, 4)

print("Full advice (u itself), measured on a log grid plus points just above every bid")
print(f"{'w':>5} {'r measured':>11} {'r bound':>8} {'w measured':>11}")
for w in (4, 4.5, 5, 6, 8):
    pair = bidding.empirical_pair(bidding.ParetoBidding(w), grid)
    r_star = (w - math.sqrt(w * w - 4 * w)) / 2
    print(f"{w:>5} {pair.r:>11.4f} {r_star:>8.4f} {pair.w:>11.4f}")

print("\nAt w=4 the trusted ratio creeps toward 2 only as 2 - 2/(m+1):")
for e in (10, 20, 40, 80):
    res = bidding.pareto_strategy(2.0**e, 4)
    print(f"  u=2^{e:<3} m*={res.m:<3} r={res.ratio:.4f}")

print("\nk advice bits at w=4: a geometric sequence with one of 2^k offsets")
for k in range(0, 5):
    pair = bidding.empirical_pair(bidding.KBitBidding(k, 4), grid)
    bound = bidding.kbit_bounds(k, 4)
    print(f"  k={k}: measured ({pair.r:.4f}, {pair.w:.4f})  guaranteed ({bound.r:.4f}, {bound.w:.4f})")

print("\nA fair coin between X*_u and a scaled copy gives up some trusted ratio for a lower untrusted one:")
for w in (4.5, 5, 6):
    pair = bidding.randomized_mixture_pair(w, bidding.log_grid(2**16, 4))
    det = bidding.empirical_pair(bidding.ParetoBidding(w), bidding.log_grid(2**16, 4))
    print(f"  w={w}: deterministic ({det.r:.4f}, {det.w:.4f})  randomized ({pair.r:.4f}, {pair.w:.4f})")
