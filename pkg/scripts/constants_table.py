"""Bubble constants for n = 4..12 with a quadrature cross-check of T K2 = K1."""
import numpy as np
from scipy import integrate

from yamabe_lab.special_functions import critical_p, duplication_residual, k_moments, sphere_area

from _common import parser, write_rows


def radial(n, f):
    g = lambda s: s ** (n - 1) * f(s)
    return sphere_area(n) * sum(integrate.quad(g, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
                                for a, b in ((0, 1), (1, np.inf)))


def main():
    args = parser(__doc__).parse_args()
    rows = []
    for n in range(4, 13):
        m = k_moments(n)
        K1 = (n - 2) ** 2 * radial(n, lambda s: s * s / (1 + s * s) ** n)
        K2 = radial(n, lambda s: (1 + s * s) ** (-n)) ** (2 / critical_p(n))
        rows.append({"n": n, "T": m.T, "K1": m.K1, "K2": m.K2, "K3": m.K3,
                     "duplication_residual": duplication_residual(n),
                     "closed_form_rel": abs(m.T * m.K2 - m.K1) / m.K1,
                     "quadrature_rel": abs(m.T * K2 - K1) / K1})
        print(" ".join(f"{k}={v:.6g}" for k, v in rows[-1].items()))
    write_rows(args.outdir, "constants_table.csv", rows)


if __name__ == "__main__":
    main()
