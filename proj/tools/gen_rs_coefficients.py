#!/usr/bin/env python3
"""Generate Taylor coefficients of the Riemann-Siegel correction terms C0..C4.

The terms are expanded in x = p - 1/2 where p is the fractional part of
sqrt(t / 2pi). Output is a C++ header consumed by include/zlab/special.hpp.
"""
import sys
from mpmath import mp, mpf, pi, cos, sin, factorial

mp.dps = 60
DEGREE = 90


def series_mul(a, b):
    out = [mpf(0)] * DEGREE
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(DEGREE - i):
            out[i + j] += ai * b[j]
    return out


def series_div(a, b):
    out = [mpf(0)] * DEGREE
    for n in range(DEGREE):
        acc = a[n] - sum(out[i] * b[n - i] for i in range(n))
        out[n] = acc / b[0]
    return out


def psi_series():
    # Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p), p = x + 1/2
    #        = cos(2 pi x^2 - 5 pi / 8) / (-cos(2 pi x))
    c0, s0 = cos(-5 * pi / 8), sin(-5 * pi / 8)
    num = [mpf(0)] * DEGREE
    for m in range(DEGREE // 4 + 1):
        # cos(2 pi x^2) and sin(2 pi x^2) series in x^2
        u = (2 * pi) ** (2 * m) / factorial(2 * m) * (-1) ** m
        v = (2 * pi) ** (2 * m + 1) / factorial(2 * m + 1) * (-1) ** m
        if 4 * m < DEGREE:
            num[4 * m] += c0 * u
        if 4 * m + 2 < DEGREE:
            num[4 * m + 2] -= s0 * v
    den = [mpf(0)] * DEGREE
    for m in range(DEGREE // 2):
        den[2 * m] = -((2 * pi) ** (2 * m)) / factorial(2 * m) * (-1) ** m
    return series_div(num, den)


def deriv(s, k):
    out = list(s)
    for _ in range(k):
        out = [out[i + 1] * (i + 1) for i in range(len(out) - 1)] + [mpf(0)]
    return out


def combine(terms):
    out = [mpf(0)] * DEGREE
    for coef, s in terms:
        for i in range(DEGREE):
            out[i] += coef * s[i]
    return out


def main():
    psi = psi_series()
    p2, p4, p6, p8 = pi ** 2, pi ** 4, pi ** 6, pi ** 8
    d = lambda k: deriv(psi, k)
    c = [
        psi,
        combine([(-1 / (96 * p2), d(3))]),
        combine([(1 / (64 * p2), d(2)), (1 / (18432 * p4), d(6))]),
        combine([(-1 / (64 * p2), d(1)), (-1 / (3840 * p4), d(5)),
                 (-1 / (5308416 * p6), d(9))]),
        combine([(1 / (128 * p2), psi), (19 / (24576 * p4), d(4)),
                 (11 / (5898240 * p6), d(8)), (1 / (2038431744 * p8), d(12))]),
    ]
    out = sys.stdout
    out.write("// Generated by tools/gen_rs_coefficients.py. Do not edit.\n")
    out.write("#pragma once\n\n#include <array>\n#include <span>\n\n")
    out.write("namespace zlab::detail {\n\n")
    out.write("// Riemann-Siegel correction terms C_k as power series in (p - 1/2).\n")
    names = []
    for k, series in enumerate(c):
        keep = 0
        for i, v in enumerate(series[: DEGREE - 14]):
            if abs(v) * mpf(0.5) ** i > mpf(10) ** -22:
                keep = i + 1
        names.append((f"kRsC{k}", keep))
        out.write(f"inline constexpr std::array<double, {keep}> kRsC{k} = {{\n")
        for v in series[:keep]:
            out.write(f"    {mp.nstr(v, 20, min_fixed=0, max_fixed=0)},\n")
        out.write("};\n\n")
    out.write("inline constexpr std::array<std::span<const double>, 5> kRsCorrection = {\n")
    for name, _ in names:
        out.write(f"    std::span<const double>({name}),\n")
    out.write("};\n\n} // namespace zlab::detail\n")


if __name__ == "__main__":
    main()
