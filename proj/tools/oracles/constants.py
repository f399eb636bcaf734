"""Independent high-precision values frozen in the C++ tests."""
from mpmath import mp, mpf, pi, tanh, coth, sinh, cosh, csch, nsum, inf, diff, findroot, tan, quad, sqrt

mp.dps = 40


def odd_sum(a2):
    # sum over odd n >= 1 of 1/(n^2 + a2)^2
    f = lambda t: pi * tanh(pi * sqrt(t) / 2) / (4 * sqrt(t))
    return -diff(f, a2)


def even_sum(a2):
    # sum over even n >= 0 of c_n/(n^2 + a2)^2 with c_0 = 1/pi, c_n = 2/pi
    # sum_{k in Z} 1/(4k^2 + a2) = pi coth(pi a/2) / (2a)
    f = lambda t: pi * coth(pi * sqrt(t) / 2) / (2 * sqrt(t))
    return -diff(f, a2) / pi


def dirichlet_center_variance():
    return 4 / pi**2 * nsum(lambda k: odd_sum((2 * k + 1) ** 2 + 1), [0, inf])


def neumann_center_variance():
    # weights 1/pi (m = 0) and 2/pi (m > 0) on the x axis, m even
    return (1 / pi) * even_sum(1) + (2 / pi) * nsum(lambda k: even_sum((2 * k) ** 2 + 1), [1, inf])


def robin_root(L, beta, k):
    F = lambda w: (w * w - beta * beta) * mp.sin(w * L) - 2 * beta * w * mp.cos(w * L)
    lo, hi = (k - 1) * pi / L, k * pi / L
    return findroot(F, (lo + mpf("1e-30"), hi), solver="anderson")


def green_variance_half():
    G = lambda y: sinh(min(y, mpf(1) / 2)) * sinh(1 - max(y, mpf(1) / 2)) / sinh(1)
    return quad(lambda y: G(y) ** 2, [0, mpf(1) / 2, 1])


def interval_l2_sum():
    return pi * coth(pi) / 4 + pi**2 * csch(pi) ** 2 / 4 - mpf(1) / 2


if __name__ == "__main__":
    print("dirichlet_center_variance", mp.nstr(dirichlet_center_variance(), 20))
    print("neumann_center_variance", mp.nstr(neumann_center_variance(), 20))
    print("robin_root(1,1,1)", mp.nstr(robin_root(1, 1, 1), 20))
    print("robin_root(1,1,2)", mp.nstr(robin_root(1, 1, 2), 20))
    print("robin_root(pi,0.5,3)", mp.nstr(robin_root(pi, mpf("0.5"), 3), 20))
    print("green_variance_half", mp.nstr(green_variance_half(), 20))
    print("interval_l2_sum", mp.nstr(interval_l2_sum(), 20))
    print("direct_l2_sum_1e4", mp.nstr(nsum(lambda k: 1 / (k * k + 1) ** 2, [1, 10000]), 20))
