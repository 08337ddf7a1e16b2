"""Score a handful of density forecasts against single outcomes.

Every rule in the library is negatively oriented: smaller is better.
The ignorance score is in bits, so differences read directly as
log2 probability ratios.
"""

from psl import (
    ScoreSpec,
    gaussian,
    gaussian_mixture,
    score,
    uniform,
)

sharp = gaussian(0.0, 1.0)
blurry = gaussian(0.0, 3.0)
bimodal = gaussian_mixture([(0.5, -2.0, 0.6), (0.5, 2.0, 0.6)])
box = uniform(-1.0, 1.0)

forecasts = [("sharp N(0,1)", sharp), ("blurry N(0,9)", blurry),
             ("bimodal", bimodal), ("uniform box", box)]

rules = [ScoreSpec("ignorance"), ScoreSpec("crps"),
         ScoreSpec("power", alpha=2.0),
         ScoreSpec("pseudospherical", beta=2.0)]

outcome = 0.25
print(f"outcome observed at y = {outcome}")
print(f"{'forecast':>14s} | " + " | ".join(f"{r.label():>24s}" for r in rules))
for name, d in forecasts:
    cells = []
    for rule in rules:
        v = score(rule, d, outcome)
        cells.append(f"{v.value:24.6f}")
    print(f"{name:>14s} | " + " | ".join(cells))

# The sharp forecast wins under every rule here; the bimodal one is
# punished hard by ignorance because it put almost no density at 0.25.

# Ignorance is infinite when the outcome falls outside the support.
v = score(ScoreSpec("ignorance"), box, 3.0)
print(f"\nbox forecast, outcome 3.0: ignorance = {v.value}"
      f" (infinite = {v.infinite})")

# A density floor trades that infinity for a bounded penalty.
v = score(ScoreSpec("ignorance"), box, 3.0, density_floor=1e-6)
print(f"same with density_floor=1e-6: {v.value:.4f} bits")

# The energy score is estimated by Monte Carlo and needs a seed;
# at beta=1 it estimates exactly the CRPS.
energy = ScoreSpec("energy", beta=1.0)
v = score(energy, sharp, outcome, seed=42, n=200_000)
c = score(ScoreSpec("crps"), sharp, outcome)
print(f"\nenergy(beta=1) = {v.value:.5f} +- {v.stderr:.5f}"
      f"   (CRPS quadrature: {c.value:.5f})")
