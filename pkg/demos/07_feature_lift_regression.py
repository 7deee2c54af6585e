# Nonlinear regression as linear operator learning on lifted features.
#
# Lifting raw inputs through an explicit feature map turns conditional-mean
# estimation into the same regularised linear problem: the fitted operator
# composed with the lift is the estimated regression function.  Random cosine
# features approximate a Gaussian-kernel lift; the identity lift recovers the
# plain estimator exactly.

import numpy as np

from oplearn import cme_fit, cme_predict, random_fourier_lift, tikhonov
from oplearn.estimate import alpha_schedule


def truth(raw):
    return np.column_stack([np.sin(2.0 * raw[:, 0]), np.cos(raw[:, 0] + raw[:, 1])])


rng = np.random.default_rng(3)
lift = random_fourier_lift(bandwidth=1.0, out_dim=64, in_dim=2, seed=4)

n_test = 2000
test_raw = rng.uniform(-2, 2, (n_test, 2))
test_truth = truth(test_raw)

print("train size -> test MSE of the lifted estimator:")
for n in (128, 512, 2048, 8192):
    train_raw = rng.uniform(-2, 2, (n, 2))
    train_y = truth(train_raw) + 0.25 * rng.standard_normal((n, 2))
    res = cme_fit(train_raw, train_y, lift, tikhonov(), 0.01 * alpha_schedule(n, 1.0))
    pred = lift.apply(test_raw) @ res.theta_hat.T
    mse = float(np.mean(np.sum((pred - test_truth) ** 2, axis=1)))
    print(f"  n={n:5d}: {mse:.5f}")

x = np.array([0.5, -1.0])
res = cme_fit(test_raw, test_truth, lift, tikhonov(), 1e-6)
print("\npointwise prediction at", x, "->", np.round(cme_predict(res, lift, x), 4))
print("ground truth             ->", np.round(truth(x[None, :])[0], 4))
