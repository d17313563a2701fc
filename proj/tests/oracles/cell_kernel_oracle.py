"""Independent values of the unit cell-pair kernel average
kappa(k) = int_{[-1,1]^2} |k+w|^{-(2+s)} (1-|w1|)(1-|w2|) dw
by two-dimensional tanh-sinh quadrature, split along w1 = 0 and w2 = 0 and at
the singular corner."""
import mpmath as mp

mp.mp.dps = 20


def kappa(k1, k2, s):
    p = 2 + mp.mpf(s)
    f = lambda a, b: ((k1 + a) ** 2 + (k2 + b) ** 2) ** (-p / 2) * (1 - abs(a)) * (1 - abs(b))
    return mp.quad(f, [-1, 0, 1], [-1, 0, 1])


for k, s in [((1, 0), 0.5), ((1, 1), 0.5), ((3, 2), 0.5), ((1, 0), 0.1), ((2, -1), 0.3), ((0, 7), 0.3)]:
    print(k, s, mp.nstr(kappa(*k, s), 17))
