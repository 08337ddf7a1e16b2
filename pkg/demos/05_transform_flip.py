"""A change of units can flip a CRPS ranking.

Relabel the outcome axis with any smooth increasing map (cube it, take
the exponential) and the forecasts transform with it; nothing about the
information content changes.  Ignorance differences are invariant under
that relabeling.  CRPS differences are not, and near the crossover
point the preferred system actually flips.
"""

from psl import (
    ScoreSpec,
    cubic_transform,
    find_preference_flip,
    transform_flip_pair,
    transformed_relative_score,
)

a, b = transform_flip_pair()
crps = ScoreSpec("crps")
ign = ScoreSpec("ignorance")
cube = cubic_transform()

print("relative scores (A minus B, negative prefers A), original units "
      "vs cubed units")
print(f"{'y':>6s} {'crps pre':>12s} {'crps post':>12s} "
      f"{'ign pre':>10s} {'ign post':>10s}")
for y in (11.0, 11.6, 11.9, 12.2, 12.8):
    pre_c, post_c = transformed_relative_score(crps, a, b, y, cube)
    pre_i, post_i = transformed_relative_score(ign, a, b, y, cube)
    marker = "  <- flip" if (pre_c > 0) != (post_c > 0) else ""
    print(f"{y:6.1f} {pre_c:+12.6f} {post_c:+12.6f} "
          f"{pre_i:+10.4f} {post_i:+10.4f}{marker}")

rep = find_preference_flip(crps, a, b, cube, (10.0, 13.0))
print(f"\nsearch found a flip at y = {rep.y:.6f}")
print(f"CRPS switches sides between y = {rep.window[0]:.6f} "
      f"(original units) and y = {rep.window[1]:.6f} (cubed units)")
print("ignorance columns above agree to ~1e-12 and never flip")
