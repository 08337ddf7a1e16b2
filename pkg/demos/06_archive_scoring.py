"""Score two forecast systems over a synthetic archive.

The archive holds one record per event: each system's density forecast
plus the realized outcome.  Ignorance differences aggregate into bits
per event, which exponentiate back into an average probability ratio;
that comparison needs no assumption about the true distribution.
"""

import numpy as np

from psl import (
    ForecastRecord,
    ScoreSpec,
    evaluate_archive,
    gaussian,
)

rng = np.random.default_rng(3)

# Truth: outcomes are N(mu_t, 1) with a drifting center the "aware"
# system tracks and the "static" system ignores.
records = []
for _ in range(500):
    center = float(rng.uniform(-2.0, 2.0))
    outcome = float(center + rng.normal())
    records.append(ForecastRecord(
        forecasts={"aware": gaussian(center, 1.0),
                   "static": gaussian(0.0, 2.2)},
        outcome=outcome,
    ))

report = evaluate_archive(records, [ScoreSpec("ignorance"),
                                    ScoreSpec("crps")])

print(f"records scored: {report.count}")
for name, per_family in report.scores.items():
    for label, es in per_family.items():
        print(f"  {name:>6s} {label:>10s}: mean {es.value:.4f}"
              + (f"  ({es.infinite_count} infinite)" if es.infinite else ""))

s1, s2, rel = report.relative[0]
print(f"\nrelative ignorance {s1} vs {s2}: {rel.bits:+.4f} bits per event")
print(f"=> {s1} put on average {rel.probability_ratio:.2f}x the "
      f"probability on what happened" if rel.bits < 0 else
      f"=> {s2} put on average {1 / rel.probability_ratio:.2f}x the "
      f"probability on what happened")

# The same pipeline runs from the command line on a JSON-lines file:
#   psl archive-eval --archive forecasts.jsonl --families ignorance,crps
