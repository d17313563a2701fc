"""Localized s-perimeter of the half-plane {y > 0} in the unit ball.

For x in the upper half disc at height d, twice the inner integral over the
lower half plane minus its part in the lower half disc is
  (1/s) int_pi^2pi [ rho_in^{-s} + max(rho_in, rho_out)^{-s} ] dth,
with rho_in = d/|sin th| the distance to the line and rho_out the distance to
the unit circle. The rho_in part integrates to C d^{-s}, C = int_0^pi sin^s,
and then to a Beta function over the half disc. The max switches branch on
the directions from x to (1, 0) and (-1, 0); each piece is smooth and is
integrated by Gauss-Legendre. Printed for two node counts as a convergence
check."""
import numpy as np
from scipy import special

s = 0.5
C = np.sqrt(np.pi) * special.gamma((1 + s) / 2) / special.gamma(1 + s / 2)
first = C * special.beta((1 - s) / 2, 1.5)


def gl(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = np.asarray(a)[..., None], np.asarray(b)[..., None]
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def second(n_outer, n_inner):
    # outer: polar coordinates on the upper half disc, graded towards r = 1 and the axis
    u, wu = np.polynomial.legendre.leggauss(n_outer)
    r = 1 - ((1 - u) / 2) ** 2          # r in (0, 1), clustered at 1
    wr = wu * (1 - u) / 2
    v, wv = np.polynomial.legendre.leggauss(n_outer)
    tt = (v + 1) / 2
    phi = np.pi * tt * tt * (3 - 2 * tt)  # clustered at 0 and pi
    wphi = wv * np.pi * 3 * tt * (1 - tt)
    R, P = np.meshgrid(r, phi, indexing="ij")
    W = np.outer(wr, wphi) * R
    x, y = R * np.cos(P), R * np.sin(P)
    t1 = np.arctan2(-y, 1 - x) % (2 * np.pi)   # towards (1, 0)
    t2 = np.arctan2(-y, -1 - x) % (2 * np.pi)  # towards (-1, 0)
    total = np.zeros_like(x)
    for a, b, branch in [(np.pi + 0 * x, t2, "in"), (t2, t1, "out"), (t1, 2 * np.pi + 0 * x, "in")]:
        th, wt = gl(a, b, n_inner)
        c, sn = np.cos(th), np.sin(th)
        X, Y = x[..., None], y[..., None]
        if branch == "in":
            f = (Y / np.abs(sn)) ** (-s)
        else:
            xu = X * c + Y * sn
            f = (-xu + np.sqrt(xu * xu + 1 - X * X - Y * Y)) ** (-s)
        total += np.sum(f * wt, axis=-1)
    return np.sum(total * W)


for n in (200, 400):
    print(n, "%.12g" % ((first + second(n, 48)) / s))
