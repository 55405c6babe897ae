"""Ski rental with one advice bit: how much trust costs.

A_k buys on day k when told the season is short and on day B when told it
is long.  Small k trusts the advice; k = B ignores it.  Run:

    python3 demos/ski_rental_tradeoff.py
"""

from __future__ import annotations

from untrusted_advice import ski_rental

B = 10

print(f"A_k with B={B}: measured over every season length, with both advice bits")
print(f"{'k':>3} {'trusted r':>10} {'untrusted w':>12}")
for k in range(1, B + 1):
    pair = ski_rental.measure_pair(ski_rental.ak_policy(k, B), B)
    print(f"{k:>3} {float(pair.r):>10.3f} {float(pair.w):>12.3f}")

front = ski_rental.enumerate_policies_frontier(B)
pairs = {p for _, p in front}
print(f"\nAll {(2 * B + 1) ** 2} policies with buy days up to 2B: {len(front)} on the frontier")
print(f"with {len(pairs)} distinct pairs, each matched by some A_k.")

print("\nRandomizing helps: large-B pair (w ln(w/(w-1)), w) against deterministic (w/(w-1), w)")
for w in (2, 3, 5, 10):
    rnd = ski_rental.large_b_randomized_pair(w)
    print(f"  w={w:>2}: randomized r={rnd.r:.3f}  deterministic r={w / (w - 1):.3f}")
