"""Where does CRPS want the outcome to land?  At the forecast median,
no matter how little probability the forecast puts there.
"""

from psl import crps, crps_argmin_outcome, gaussian_mixture

# Two sharp modes at -1 and +1.  The median sits at 0, in the desert
# between them.
d = gaussian_mixture([(0.5, -1.0, 0.1), (0.5, 1.0, 0.1)])

best_y = crps_argmin_outcome(d, (-3.0, 3.0))
print(f"outcome minimizing CRPS: {best_y:.9f}")
print(f"forecast density there:  {float(d.pdf(best_y)):.3e}")
print(f"forecast density at the modes: {float(d.pdf(1.0)):.3f}")

for y in (-1.0, -0.5, 0.0, 0.5, 1.0):
    print(f"  crps(d, {y:+.1f}) = {crps(d, y).value:.12f}")

# CRPS is smallest at y=0 even though the forecast says y=0 is
# essentially impossible (density ~ 8e-22).  A mode outcome, which the
# forecast actually predicted, scores about 8% worse; between the modes
# the scores differ only past the ninth decimal, which is why the
# argmin search works off the CDF rather than score differences.
# Ignorance has the opposite (and more defensible) view: it would score
# y=0 as a catastrophic surprise of about 70 bits.
