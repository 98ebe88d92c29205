"""Per-step work stays flat while the ring grows a thousandfold.

Reads and the flop proxy are exact counts, so they match to the last digit
across sizes.  Wall time is shown for context and drifts a little with cache
effects.
"""

from blgc import UpdateParams, make_functional
from blgc.sweep import scale_sweep

p = UpdateParams(0.7, make_functional("saturated_mix", 8))
res = scale_sweep("ring", [10**3, 10**4, 10**5, 10**6], r=1, D=3, d=8, p=p,
                  T=20_000, batches=5)
print(f"{'M':>8} {'reads':>6} {'flops':>6} {'ns/step':>9}")
for row in res.rows:
    print(f"{row.M:>8} {row.mean_reads:>6} {row.mean_flops:>6} "
          f"{row.wall_ns_median:>9.0f}")
