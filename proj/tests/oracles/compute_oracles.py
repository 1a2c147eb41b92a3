"""Regenerates tests/unit/oracle_values.hpp from mpmath at 40 digits.

Run from the repository root:  python3 tests/oracles/compute_oracles.py
"""
import mpmath as mp

mp.mp.dps = 40

ORDERS = [0, 0.3, 0.5, 1, 2.5, 7, 14.9, 15, 20, 40, 120, 400]
ARGS = [1e-3, 0.5, 5, 29, 31, 80, 300, 2000]


def scaled_i(nu, z):
    nu, z = mp.mpf(nu), mp.mpf(z)
    return mp.besseli(nu, z) * mp.exp(-z)


def half_plane(t, x, y):
    # Image oracle at kappa0 = pi, Cartesian points.
    t = mp.mpf(t)
    k = lambda a, b: mp.exp(-((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) / (4 * t)) / (4 * mp.pi * t)
    return k(x, y) - k(x, (y[0], -y[1]))


def main():
    rows = []
    for nu in ORDERS:
        for z in ARGS:
            v = scaled_i(nu, z)
            # Below the double range the table records 0 (checked as underflow).
            text = mp.nstr(v, 20) if v > mp.mpf("1e-300") else "0.0"
            rows.append(f"    {{{nu!r}, {z!r}, {text}}},")
    g = half_plane(1, (0, 1), (0, 1))
    out = [
        "#pragma once",
        "// Generated by tests/oracles/compute_oracles.py (mpmath, 40 digits). Do not edit.",
        "",
        "namespace oracle {",
        "",
        "struct BesselCase {",
        "  double nu;",
        "  double z;",
        "  double value;  // e^{-z} I_nu(z)",
        "};",
        "",
        "inline constexpr BesselCase kScaledBessel[] = {",
        *rows,
        "};",
        "",
        f"inline constexpr double kScaledI0At100 = {mp.nstr(scaled_i(0, 100), 20)};",
        f"inline constexpr double kScaledIHalfAt1 = {mp.nstr(scaled_i(0.5, 1), 20)};",
        f"inline constexpr double kHalfPlaneKernelT1 = {mp.nstr(g, 20)};",
        f"inline constexpr double kErfHalf = {mp.nstr(mp.erf(0.5), 20)};",
        f"inline constexpr double kLnSqrtPi = {mp.nstr(mp.log(mp.sqrt(mp.pi)), 20)};",
        f"inline constexpr double kLnGamma3_7 = {mp.nstr(mp.loggamma(3.7), 20)};",
        f"inline constexpr double kLnGamma0_01 = {mp.nstr(mp.loggamma(0.01), 20)};",
        f"inline constexpr double kLnGamma171_5 = {mp.nstr(mp.loggamma(171.5), 20)};",
        f"inline constexpr double kAbsMoment3 = {mp.nstr(2 ** mp.mpf(1.5) * mp.gamma(2) / mp.sqrt(mp.pi), 20)};",
        "",
        "}  // namespace oracle",
        "",
    ]
    with open("tests/unit/oracle_values.hpp", "w") as fh:
        fh.write("\n".join(out))


if __name__ == "__main__":
    main()
