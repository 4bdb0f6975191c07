"""Chi-square confidence sets around an empirical distribution.

Draw a ground truth, estimate it from samples, and explore the resulting
uncertainty ball: its radius, membership tests, the projection onto a pair
of conditional distributions, and the constructive lifting back.
"""
import numpy as np

from rldp import (
    Alphabet,
    UncertaintySet,
    chi2_statistic,
    confidence_radius,
    draw_samples,
    empirical,
    sample_jeffreys,
)

alphabet = Alphabet(3, 5)

# Ground truth from the Jeffreys prior, dataset of n = 75 samples.
pstar = sample_jeffreys(alphabet, rng_seed=42)
dataset = draw_samples(pstar, n=75, rng_seed=43)
phat = empirical(dataset)
print("empirical cell estimates:\n", phat.p.round(3))

# The (1 - alpha) confidence ball. Radius shrinks like 1/n.
for n in (75, 750, 15000):
    print(f"radius at n={n}: {confidence_radius(n, 0.05, alphabet):.6f}")

F = UncertaintySet.from_samples(phat, n=75, alpha=0.05)
print("chi-square distance from estimate to truth:", round(chi2_statistic(phat, pstar), 4))
print("ground truth inside the one-shot 95% ball:", F.contains(pstar))

# Project the ball onto the conditionals of two sensitive values and lift a
# member pair back into a full joint distribution.
pset = F.project(0, 1)
r1 = phat.conditional_given_s(0)
r2 = phat.conditional_given_s(1)
print("center pair is a member:", pset.contains(r1, r2))

tilted = 0.85 * r1 + 0.15 * np.ones(5) / 5
if pset.contains(tilted, r2):
    lifted = pset.lift(tilted, r2)
    print("lifted joint is in the ball:", F.contains(lifted))
    print("its conditional reproduces the tilt:",
          np.allclose(lifted.conditional_given_s(0), tilted, atol=1e-12))
