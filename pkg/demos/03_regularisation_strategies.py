# Spectral filters g_alpha approximating 1/lambda, and their declared constants.
#
# A strategy must keep lambda*g bounded (D), the residual 1 - lambda*g bounded
# (gamma0), and g itself below B/alpha.  The qualification order measures how
# fast lambda^q * residual decays with alpha; it caps the smoothness a method
# can exploit.  verify_strategy / qualification_check enforce all of this on
# dense grids.

import numpy as np

from oplearn import (
    g_eval,
    landweber,
    qualification_check,
    regularized_inverse,
    residual_eval,
    tikhonov,
    truncation,
    verify_strategy,
)

for strat in (tikhonov(), truncation(), landweber(0.1)):
    report = verify_strategy(strat)
    print(f"{strat.kind:10s} grid maxima: |lam g| {report.max_lambda_g:.3f}, "
          f"|resid| {report.max_residual:.3f}, alpha|g| {report.max_g_alpha:.3f} "
          f"-> passed={report.passed}")

print("\nfilter values at alpha=0.1, lambda=0.5:")
for strat in (tikhonov(), truncation(), landweber(0.5)):
    print(f"  {strat.kind:10s} g={g_eval(strat, 0.1, 0.5):.4f} "
          f"r={residual_eval(strat, 0.1, 0.5):.6f}")

# tikhonov saturates at order 1; spectral cut-off has arbitrary qualification
print("\nqualification sups (pass iff <= declared gamma):")
print("  tikhonov  q=1:", round(qualification_check(tikhonov(), 1.0), 4), "(gamma 1)")
print("  tikhonov  q=2:", round(qualification_check(tikhonov(), 2.0), 1), "(blows up: saturation)")
print("  truncation q=3:", round(qualification_check(truncation(), 3.0), 4), "(gamma 1)")

# applying a filter to a PSD matrix: shifted inverse for tikhonov
c = np.diag([1.0, 0.01, 0.0])
print("\ntikhonov regularised inverse of diag(1, 0.01, 0) at alpha=0.1:")
print(np.round(regularized_inverse(tikhonov(), 0.1, c), 4))
print("spectral cut-off at alpha=0.1 removes everything at or below the cut:")
print(np.round(regularized_inverse(truncation(), 0.1, c), 4))
