"""Construct misranking witnesses for the non-local rules.

For each rule except ignorance there are forecast pairs where one
density assigns r times more probability to what actually happened,
for any r you like, and still receives the worse score.  The
``construct_witness`` helper builds such a pair for a requested ratio
and double-checks it by scoring both sides.
"""

import json
import math

from psl import ScoreSpec, construct_witness

for family, kwargs in [("crps", {}),
                       ("power", {"alpha": 2.0}),
                       ("pseudospherical", {"beta": 2.0})]:
    spec = ScoreSpec(family, **kwargs)
    print(f"--- {spec.label()} ---")
    for ratio in (2.0, 10.0, 100.0):
        rep = construct_witness(spec, ratio)
        assert rep.verified
        print(f"  r = {ratio:6.1f}: p1(y)/p2(y) = {rep.ratio:12.6g}, "
              f"scores {rep.s1.value:+.6f} (dense) vs "
              f"{rep.s2.value:+.6f} (sparse)")

# CRPS even admits an infinite ratio: a forecast with zero density at
# the outcome can beat one with plenty.
rep = construct_witness(ScoreSpec("crps"), math.inf)
print("\ninfinite-ratio CRPS witness:")
print(json.dumps(rep.to_json(), indent=2))

# Every report carries the two densities in JSON form, so a witness can
# be replayed through the CLI:
#   psl find-witness --family pseudospherical --beta 2 --ratio 2
