"""Compare a too-wide and a too-narrow forecaster as the widths drift.

System A forecasts N(0, sigma^2), system B forecasts N(0, 1/sigma^2),
and the truth stays N(0, 1).  Both systems are wrong by the same factor
on opposite sides, so a reasonable summary should either treat them
symmetrically or at least rank them consistently.  The four families
disagree: ignorance and the quadratic rule prefer the wide system,
CRPS prefers the narrow one, and the spherical rule calls the race a
tie at every sigma.
"""

from psl import inverse_width_skill_curve

curve = inverse_width_skill_curve([1.1, 1.25, 1.5, 2.0, 2.5, 3.0])

print("relative expected scores, A minus B (negative prefers A = wide)")
print(f"{'sigma':>6s} {'ignorance':>12s} {'crps':>12s} "
      f"{'power(2)':>12s} {'spherical':>12s}")
for i, sigma in enumerate(curve.sigma):
    print(f"{sigma:6.2f} {curve.columns['ign'][i]:12.6f} "
          f"{curve.columns['crps'][i]:12.6f} "
          f"{curve.columns['pls'][i]:12.6f} "
          f"{curve.columns['sps'][i]:12.2e}")

print("""
Reading the table:
  - ignorance column: negative everywhere, and the margin grows without
    bound; in bits, at sigma=2 the wide system concentrates about
    2**0.705 ~ 1.6x more probability near what happens.
  - crps column: positive everywhere, so CRPS reverses the verdict and
    rewards the overconfident system.
  - power(2) sides with ignorance, spherical(2) washes out entirely.
The same data is available from the command line as
  psl figure --id 1
""")
