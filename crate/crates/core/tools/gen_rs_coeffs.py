"""Generate Taylor tables for the Riemann-Siegel correction terms C0..C4.

Each C_j(p) is expanded in powers of z = 2p - 1 about p = 1/2. Taylor
coefficients of Psi(p) = cos(2pi(p^2 - p - 1/16)) / cos(2pi p) come from a
high-precision Cauchy integral; Psi is entire, so any radius works.

Usage: python3 gen_rs_coeffs.py > ../src/zeta/rs_coeffs.rs
"""
import mpmath as mp

mp.mp.dps = 80
DEG = 90       # Taylor degree of Psi in q = p - 1/2
POINTS = 512
RADIUS = mp.mpf("1.3")
CUTOFF = mp.mpf("1e-22")


def psi(q):
    p = q + mp.mpf(1) / 2
    return mp.cos(2 * mp.pi * (p * p - p - mp.mpf(1) / 16)) / mp.cos(2 * mp.pi * p)


def psi_taylor():
    samples = []
    for j in range(POINTS):
        w = mp.expjpi(2 * mp.mpf(j) / POINTS)
        samples.append((w, psi(RADIUS * w)))
    coeffs = []
    for n in range(DEG + 1):
        acc = mp.mpc(0)
        for w, v in samples:
            acc += v * w ** (-n)
        coeffs.append(mp.re(acc / POINTS) / RADIUS ** n)
    return coeffs


def deriv(c, k):
    # k-th derivative of a power series in q
    out = []
    for n in range(k, len(c)):
        out.append(c[n] * mp.ff(n, k))
    return out


def combine(terms, length):
    out = [mp.mpf(0)] * length
    for scale, series in terms:
        for i, v in enumerate(series):
            if i < length:
                out[i] += scale * v
    return out


def main():
    a = psi_taylor()
    L = DEG - 12
    pi = mp.pi
    d = lambda k: deriv(a, k)
    c0 = combine([(1, d(0))], L)
    c1 = combine([(-1 / (96 * pi**2), d(3))], L)
    c2 = combine([(1 / (64 * pi**2), d(2)), (1 / (18432 * pi**4), d(6))], L)
    c3 = combine([(-1 / (64 * pi**2), d(1)), (-1 / (3840 * pi**4), d(5)),
                  (-1 / (5308416 * pi**6), d(9))], L)
    c4 = combine([(1 / (128 * pi**2), d(0)), (19 / (24576 * pi**4), d(4)),
                  (11 / (5898240 * pi**6), d(8)), (1 / (2038431744 * pi**8), d(12))], L)
    print("// Generated by tools/gen_rs_coeffs.py. Do not edit.")
    print("//")
    print("// Coefficients of C_j(p) in powers of z = 2p - 1.")
    print("#![allow(clippy::excessive_precision)]")
    print()
    for name, series in [("C0", c0), ("C1", c1), ("C2", c2), ("C3", c3), ("C4", c4)]:
        zc = [v / mp.mpf(2) ** n for n, v in enumerate(series)]
        last = max(i for i, v in enumerate(zc) if abs(v) > CUTOFF)
        zc = zc[: last + 1]
        print(f"pub(crate) const {name}: [f64; {len(zc)}] = [")
        for v in zc:
            if abs(v) < CUTOFF:
                print("    0.0,")
            else:
                print(f"    {mp.nstr(v, 20, min_fixed=0, max_fixed=0)},")
        print("];")
        print()


if __name__ == "__main__":
    main()
