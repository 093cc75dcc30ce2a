"""Reference values computed independently of the package code paths.

Each helper uses a different formula from the one the package implements
(Klein-model arcsinh instead of the cross-ratio, direct ratio maxima instead
of log differences, matrix powers instead of iteration).
"""

import itertools

import numpy as np

# Largest four-point defect over all 12**4 quadruples of the net
# ``disc_net()`` under the Hilbert metric of the unit disc, computed once by
# ``brute_force_disc_delta`` and frozen here.
DELTA_DISC = 1.3842958589566567


def klein_disc_distance(x, y):
    """Hilbert distance on the unit disc as twice the Klein-model distance."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    # sinh form: (1 - x.y)^2 - (1 - |x|^2)(1 - |y|^2) = |x - y|^2 - |x ^ y|^2,
    # which stays accurate when x and y are close
    wedge = x[0] * y[1] - x[1] * y[0]
    num = max((x - y) @ (x - y) - wedge * wedge, 0.0)
    return 2.0 * np.arcsinh(np.sqrt(num / ((1.0 - x @ x) * (1.0 - y @ y))))


def cone_distance(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return float(np.log(np.max(x / y) * np.max(y / x)))


def thompson_distance(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    return float(np.log(max(np.max(x / y), np.max(y / x))))


def poincare_distance(z, w):
    z, w = complex(*z), complex(*w)
    return float(np.arctanh(abs(z - w) / abs(1 - np.conj(w) * z)))


def disc_net(m=12, r=1e-3):
    ang = 2 * np.pi * np.arange(m) / m
    return (1.0 - r) * np.c_[np.cos(ang), np.sin(ang)]


def brute_force_disc_delta(points):
    n = len(points)
    d = np.array([[klein_disc_distance(a, b) for b in points] for a in points])
    best = 0.0
    for x, y, z, w in itertools.product(range(n), repeat=4):
        xz = 0.5 * (d[x, w] + d[z, w] - d[x, z])
        yz = 0.5 * (d[y, w] + d[z, w] - d[y, z])
        xy = 0.5 * (d[x, w] + d[y, w] - d[x, y])
        best = max(best, min(xz, yz) - xy)
    return best


def perron_point(a, steps=200):
    """Normalised Perron vector by the power method."""
    v = np.ones(len(a))
    a = np.asarray(a, float)
    for _ in range(steps):
        v = a @ v
        v /= v.sum()
    return v


def mobius_power_orbit(a, theta, z0, k):
    """``f^k(z0)`` for ``f(z) = e^{i theta}(z - a)/(1 - conj(a) z)`` via a 2x2 matrix power."""
    rot = np.exp(1j * theta)
    m = np.array([[rot, -rot * a], [-np.conj(a), 1.0]], dtype=complex)
    p = np.linalg.matrix_power(m, k)
    return (p[0, 0] * z0 + p[0, 1]) / (p[1, 0] * z0 + p[1, 1])


def busemann_poincare(y, xi):
    """Busemann function at 0 toward ``xi`` for the arctanh disc metric."""
    y, xi = np.asarray(y, float), np.asarray(xi, float)
    return 0.5 * np.log(np.sum((xi - y) ** 2, axis=-1) / (1.0 - np.sum(y * y, axis=-1)))


def busemann_hilbert_disc(y, xi):
    """Busemann function at 0 toward ``xi`` for the Hilbert metric of the unit disc.

    Maps the Klein point to the conformal disc and doubles the standard
    hyperbolic Busemann function there.
    """
    y, xi = np.asarray(y, float), np.asarray(xi, float)
    p = y / (1.0 + np.sqrt(1.0 - np.sum(y * y, axis=-1, keepdims=True)))
    return 4.0 * busemann_poincare(p, xi)
