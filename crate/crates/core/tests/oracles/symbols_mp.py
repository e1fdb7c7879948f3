"""High-precision reference values for the damped-wave symbols.

D(eps, k2, t) = exp(-t/(2 eps^2)) * sum_j t^(2j+1)/(2j+1)! * lam2^j
with lam2 = 1/(4 eps^4) - k2/eps^2 and k2 = 1 + |n|^2, evaluated with 60-digit
arithmetic. Run with `python3 symbols_mp.py`; values are pasted into
symbols_oracle.rs.
"""
from mpmath import mp, mpf, exp, factorial, quad, sqrt

mp.dps = 60


def series(x, odd, terms=400):
    s = mpf(0)
    for j in range(terms):
        s += x**j / factorial(2 * j + 1 if odd else 2 * j)
    return s


def dhat(eps, k2, t):
    eps, k2, t = mpf(eps), mpf(k2), mpf(t)
    lam2 = 1 / (4 * eps**4) - k2 / eps**2
    return exp(-t / (2 * eps**2)) * t * series(t * t * lam2, True)


def dhat_dt(eps, k2, t):
    eps, k2, t = mpf(eps), mpf(k2), mpf(t)
    lam2 = 1 / (4 * eps**4) - k2 / eps**2
    a = 1 / (2 * eps**2)
    return -a * dhat(eps, k2, t) + exp(-a * t) * series(t * t * lam2, False)


CASES = [
    (0.5, 1, 1.0),
    (0.1, 1, 0.5),
    (0.1, 2, 0.3),
    (0.1, 26, 0.05),
    (0.2, 7.0, 0.8),
    (0.2, 6.25, 0.8),
    (0.05, 401, 0.01),
    (0.3, 3, 2.0),
    (1.0, 1, 3.0),
    (1.0, 50, 1.5),
]

if __name__ == "__main__":
    print("phi(1) =", series(mpf(1), True))
    for eps, k2, t in CASES:
        d = dhat(eps, k2, t)
        dd = dhat_dt(eps, k2, t)
        comb = d / mpf(eps) ** 2 + dd
        print(f"({eps}, {k2}, {t}, {mp.nstr(d, 20)}, {mp.nstr(dd, 20)}, {mp.nstr(comb, 20)}),")
    for eps in [0.1, 0.05, 0.025]:
        c = dhat(eps, 2, 0.5) / mpf(eps) ** 2 + dhat_dt(eps, 2, 0.5)
        print("combined n=(1,0) t=0.5 eps", eps, mp.nstr(c - exp(-1), 20))
    # Duhamel weight and stationary gain
    print("duhamel eps=0.5 n=0 h=1", mp.nstr(quad(lambda s: dhat(0.5, 1, s) / mpf(0.25), [0, 1]), 20))
    print("Q11 eps=0.5 n=0 h=inf", mp.nstr(quad(lambda s: (dhat(0.5, 1, s) / mpf(0.25)) ** 2, [0, 10, 60]), 20))
