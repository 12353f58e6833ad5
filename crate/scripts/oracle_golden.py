#!/usr/bin/env python3
"""Golden values for the kernel evaluators, computed with mpmath.

Every quantity is evaluated straight from its integral definition with
high-precision tanh-sinh quadrature, split at the tent knots. Nothing here
shares code or closed forms with the Rust implementation.

Writes CSV rows: quantity,p,x,t,value,oracle_tolerance
"""
import sys
from mpmath import mp, mpf, quad, exp, sqrt, pi, log, inf

mp.dps = 40


def tent(s):
    return max(mpf(0), 1 - abs(s))


def heat(x, t):
    k = lambda s: tent(s) * exp(-(s - x) ** 2 / (4 * t))
    return quad(k, [-1, 0, 1]) / (2 * sqrt(pi * t))


def heat_dx(x, t):
    k = lambda s: tent(s) * (s - x) / (2 * t) * exp(-(s - x) ** 2 / (4 * t))
    return quad(k, [-1, 0, 1]) / (2 * sqrt(pi * t))


def delta(s):
    return heat(s, mpf(1))


def excess(s, p):
    a = 1 - p
    return (a + delta(s) ** a) ** (1 / a) - a ** (1 / a)


def excess_mass(p):
    f = lambda s: excess(s, p)
    # even datum: integrate the right half and double
    return 2 * quad(f, [0, 1, 4, 10, 25, 60])


def linearized(x, t, p):
    tau = t - 1
    f = lambda s: excess(s, p) * exp(-(s - x) ** 2 / (4 * tau))
    lo, hi = -60, 60
    pts = sorted(set([lo, -25, -10, -4, -1, 0, 1, 4, 10, 25, hi, x]))
    val = quad(f, pts)
    return t ** (p / (1 - p)) / (2 * sqrt(pi * tau)) * val


def main(out):
    third = mpf(1) / 3
    rows = []

    def add(q, p, x, t, v, tol):
        rows.append((q, p, x, t, v, tol))

    for (x, t) in [(0, 1), (0.3, 0.7), (2, 0.5), (5, 3), (0, 100), (-1.7, 0.05)]:
        add("D", "", x, t, heat(mpf(x), mpf(t)), "1e-14")
    for (x, t) in [(0.3, 0.7), (1.2, 0.2), (-3, 4)]:
        add("Dx", "", x, t, heat_dx(mpf(x), mpf(t)), "1e-14")
    for s in [0, 1.5, 4, 9]:
        add("Delta", "", s, 1, delta(mpf(s)), "1e-14")
    for p in ["0.2", "1/3", "0.5", "0.7"]:
        pv = third if p == "1/3" else mpf(p)
        for s in [0, 3, 8]:
            add("E", p, s, 1, excess(mpf(s), pv), "1e-13")
        add("I", p, "", "", excess_mass(pv), "1e-11")
    for (p, x, t) in [("1/3", 0, 2), ("1/3", 1.5, 10), ("1/3", 0, 100), ("0.5", 0, 5), ("0.2", 2.5, 30)]:
        pv = third if p == "1/3" else mpf(p)
        add("W", p, x, t, linearized(mpf(x), mpf(t), pv), "1e-10")
    i13 = excess_mass(third)
    add("cbar_minus", "1/3", "", "", mpf(1) / (4 * sqrt(2 * pi / 3)), "1e-14")
    add("cbar_plus", "1/3", "", "", i13 / sqrt(2 * pi), "1e-11")
    tol = mpf("1e-12")
    t_end = mpf(100)
    add("choose_domain", "", "", t_end, 1 + 2 * sqrt(t_end * log(1 / (2 * sqrt(pi * t_end) * tol))), "1e-9")

    with open(out, "w") as fh:
        fh.write("quantity,p,x,t,value,oracle_tolerance\n")
        for q, p, x, t, v, tol in rows:
            fh.write(f"{q},{p},{x},{t},{mp.nstr(v, 20, strip_zeros=False)},{tol}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/data/golden.csv")
