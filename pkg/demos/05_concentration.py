# Concentration of the empirical covariance around its population value.
#
# For sub-Gaussian inputs, |C_hat - C|_HS is bounded by
# 24 sqrt(2) e psi2(X)^2 sqrt(log(1/delta)/n) with probability 1 - delta.
# The constant is loose by design, so at desk scale a seeded Monte Carlo
# study should see essentially full coverage.  The sub-Gaussian norm is
# plugged in from a moment estimator on a large calibration sample.

from oplearn.studies import StudyConfig, run_concentration_study

cfg = StudyConfig(
    study="conc",
    d_x=20,
    d_y=3,
    n=500,
    delta=0.05,
    trials=300,
    calibration_n=50_000,
    seed=11,
)
report = run_concentration_study(cfg)

print(f"psi2(X) estimate (p_max={report.psi2_p_max}, {report.calibration_n} samples):",
      round(report.psi2_x, 4))
print(f"bound at n={report.n}, delta={report.delta}:", round(report.bound, 4))
print("largest observed deviation:", round(report.deviations.max(), 4))
print(f"coverage over {report.trials} trials:", report.coverage)
