"""Reference implementations used only by the tests.

Nothing here imports the filter code under test. The scalar-loop Kalman step
spells out every matrix product by hand; the information-form solver reaches
the same posterior by weighted least squares, a different algebraic route.
"""

import numpy as np


def matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def transpose(a):
    return [list(row) for row in zip(*a)]


def add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def inv2(s):
    (a, b), (c, d) = s
    det = a * d - b * c
    return [[d / det, -b / det], [-c / det, a / det]]


def cv_transition(dt):
    return [[1.0, dt, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, dt], [0.0, 0.0, 0.0, 1.0]]


def cv_noise_gain(dt):
    """The 4x2 kinematic gain mapping per-axis acceleration noise to the state."""
    return [[dt * dt / 2, 0.0], [dt, 0.0], [0.0, dt * dt / 2], [0.0, dt]]


def selector():
    return [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]


def kf_step_loops(x, p, z, f, q, h, r):
    """Prediction and update written out with explicit list arithmetic.

    Returns a dict with the posterior state and covariance, the predicted
    measurement, innovation, innovation covariance and NIS.
    """
    x = [[v] for v in x]
    x_pred = matmul(f, x)
    p_pred = add(matmul(matmul(f, p), transpose(f)), q)
    s = add(r, matmul(matmul(h, p_pred), transpose(h)))
    z_pred = matmul(h, x_pred)
    nu = [[z[0] - z_pred[0][0]], [z[1] - z_pred[1][0]]]
    s_inv = inv2(s)
    w = matmul(matmul(p_pred, transpose(h)), s_inv)
    x_post = add(x_pred, matmul(w, nu))
    p_post = sub(p_pred, matmul(matmul(w, s), transpose(w)))
    nis = matmul(matmul(transpose(nu), s_inv), nu)[0][0]
    return {
        "x": np.array([row[0] for row in x_post]),
        "p": np.array(p_post),
        "z_pred": np.array([row[0] for row in z_pred]),
        "nu": np.array([row[0] for row in nu]),
        "s": np.array(s),
        "nis": nis,
        "x_pred": np.array([row[0] for row in x_pred]),
        "p_pred": np.array(p_pred),
    }


def posterior_information_form(x_pred, p_pred, z, h, r):
    """One-step posterior as the weighted least-squares solution.

    Minimizes ``|x - x_pred|^2_{P^-1} + |z - H x|^2_{R^-1}``.
    """
    x_pred = np.asarray(x_pred, dtype=float)
    h = np.asarray(h, dtype=float)
    p_inv = np.linalg.inv(np.asarray(p_pred, dtype=float))
    r_inv = np.linalg.inv(np.asarray(r, dtype=float))
    info = p_inv + h.T @ r_inv @ h
    cov = np.linalg.inv(info)
    mean = cov @ (p_inv @ x_pred + h.T @ r_inv @ np.asarray(z, dtype=float))
    return mean, cov
