"""Synthesize release mechanisms under the four robustness regimes.

One instance end to end: draw a ground truth and a dataset, build the
confidence ball, solve all four variants, and compare the privacy/utility
each mechanism realizes under the (held-out) ground truth.
"""
import numpy as np

from rldp import (
    Alphabet,
    DistortionSpec,
    ProblemSpec,
    UncertaintySet,
    VARIANTS,
    build_problem,
    draw_samples,
    empirical,
    enforce_robust_privacy,
    extract_mechanism,
    realized_distortion,
    realized_epsilon,
    sample_jeffreys,
    solve_problem,
    verify_solution,
)

alphabet = Alphabet(3, 5)
epsilon = 0.5

pstar = sample_jeffreys(alphabet, rng_seed=12)
phat = empirical(draw_samples(pstar, n=75, rng_seed=13))
F = UncertaintySet.from_samples(phat, n=75, alpha=0.05)
d_table = DistortionSpec().table(alphabet)

print(f"ball radius B = {F.radius:.4f}, truth in ball: {F.contains(pstar)}")
print(f"{'variant':>8} {'objective':>10} {'D* truth':>10} {'eps* truth':>10} {'residual':>10}")
for variant in VARIANTS:
    spec = ProblemSpec(variant, phat, F, epsilon)
    built = build_problem(spec)
    sol = solve_problem(built)
    mech = extract_mechanism(sol, built)
    if built.privacy_triples:
        mech, _ = enforce_robust_privacy(mech, spec)
    report = verify_solution(built, sol, mechanism=mech)
    d = realized_distortion(pstar, mech, d_table)
    e = realized_epsilon(pstar, mech)
    print(f"{variant:>8} {sol.objective_value:>10.4f} {d:>10.4f} {e:>10.4f} "
          f"{report.max_residual:>10.2e}")

print("\nmechanisms designed without robust privacy typically leak more than")
print(f"the budget eps = {epsilon} under the true distribution; the robust ones stay")
print("within it whenever the truth lies in the ball.")
