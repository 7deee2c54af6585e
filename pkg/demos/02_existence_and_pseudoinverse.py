# When does the operator equation theta C_XX = C_YX have a bounded solution?
#
# The factorisation is solvable iff the range of C_XY sits inside the range of
# C_XX.  douglas_check decides this numerically and reports the closed-form
# operator norm and squared HS norm of the minimal solution, together with the
# smallest beta making beta C_XX^2 - C_XY C_YX positive semi-definite.

import numpy as np

from oplearn import douglas_check, solve_pseudo, source_condition_value

# solvable: both rows of C_YX live on directions C_XX actually excites
c_xx = np.diag([1.0, 0.5, 0.1])
c_yx = np.array([[1.0, 1.0, 0.0], [0.0, 0.2, 0.1]])
report = douglas_check(c_xx, c_yx)
print("solvable instance:")
print("  range inclusion:", report.range_inclusion)
print("  operator norm of minimal solution:", round(report.sup_ratio_opnorm, 6))
print("  squared HS norm:", round(report.hs_norm_sq, 6))
print("  smallest Douglas beta:", round(report.douglas_beta, 6))
print("  (beta equals the squared operator norm:",
      round(report.sup_ratio_opnorm**2, 6), ")")

theta = solve_pseudo(c_xx, c_yx)
print("  residual of theta C_XX = C_YX:", np.linalg.norm(theta @ c_xx - c_yx))

# unsolvable: C_YX asks for a direction in the null space of C_XX
c_xx_bad = np.diag([1.0, 0.0])
c_yx_bad = np.array([[0.0, 1.0]])
bad = douglas_check(c_xx_bad, c_yx_bad)
print("\nunsolvable instance:")
print("  range inclusion:", bad.range_inclusion, " HS norm:", bad.hs_norm_sq)
theta_bad = solve_pseudo(c_xx_bad, c_yx_bad)
print("  best-effort residual stays large:",
      np.linalg.norm(theta_bad @ c_xx_bad - c_yx_bad))

# smoothness certificates: the squared witness norm at order nu is finite
# exactly when the minimal solution has that much extra regularity
nu = 0.5
print("\nsource-condition value at order", nu, ":",
      round(source_condition_value(c_xx, c_yx, nu), 6))
