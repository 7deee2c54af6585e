# Autoregressive forecasting of a vector-valued time series.
#
# An order-r autoregression is one linear regression from the stacked last r
# values to the next value.  The stacked covariance is assembled block-Toeplitz
# from lag covariances of a single trajectory, regularised, and inverted; the
# fitted blocks drive one-step forecasts whose MSE approaches the innovation
# trace when the transition is recovered well.

import numpy as np

from oplearn import arh_fit, arh_forecast, arh_lag_covs, simulate_arh, tikhonov

rng = np.random.default_rng(1)
d = 4
theta1 = rng.standard_normal((d, d))
theta1 *= 0.5 / np.linalg.svd(theta1, compute_uv=False)[0]
theta2 = rng.standard_normal((d, d))
theta2 *= 0.3 / np.linalg.svd(theta2, compute_uv=False)[0]
noise = 0.09 * np.eye(d)

traj = simulate_arh([theta1, theta2], 30_000, noise, seed=2)
train, test = traj[:25_000], traj[25_000:]

lags = arh_lag_covs(train, 2)
print("lag-0 / lag-1 / lag-2 covariance HS norms:",
      [round(float(np.linalg.norm(l)), 4) for l in lags])

model = arh_fit(train, 2, tikhonov(), 1e-3)
err = np.sqrt(sum(np.linalg.norm(m - b) ** 2 for m, b in zip(model.blocks, (theta1, theta2))))
print("HS error of the recovered blocks:", round(float(err), 4))

sq = []
for t in range(2, len(test)):
    pred = arh_forecast(model, test[t - 2 : t])
    sq.append(float(np.sum((test[t] - pred) ** 2)))
print("one-step forecast MSE:", round(float(np.mean(sq)), 4),
      " innovation trace:", round(float(np.trace(noise)), 4))
