"""A small scatter campaign: realized privacy vs. distortion per instance.

Mirrors the CSV the `rldp scatter` subcommand emits; each instance draws
its own ground truth and dataset, and every requested variant is solved
and evaluated against the truth.
"""
from rldp import ExperimentConfig, run_scatter

config = ExperimentConfig(
    s_size=3, u_size=5, alpha=0.05, epsilon=0.5,
    K=8, n=75, seed=2187,
    variants=("nunp", "rurp"),
)

csv = run_scatter(config)
print(csv)

# Rough text rendering of the privacy axis. `inf` rows are the instances a
# plot would omit.
rows = [line.split(",") for line in csv.strip().split("\n")[1:]]
print("eps* by variant (budget 0.5):")
for variant in config.variants:
    vals = [r[3] for r in rows if r[2] == variant]
    print(f"  {variant}: {', '.join(v if v == 'inf' else f'{float(v):.3f}' for v in vals)}")
