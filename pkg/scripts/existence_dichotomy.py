"""Continuation in q toward p for the three reference cases.

The flat beta = 0 case is the slow one (about a minute); --skip-blowup omits it.
"""
from yamabe_lab.continuation import subcritical_continuation
from yamabe_lab.curvature import synthetic_jet

from _common import parser, write_rows


def main():
    ap = parser(__doc__)
    ap.add_argument("--skip-blowup", action="store_true")
    args = ap.parse_args()
    cases = [("flat_beta1_n4", None, 6.0, 1.0, 4),
             ("curved_beta0_n5", synthetic_jet(5, 7, -1.0, 0.05), 2.4, 0.0, 5)]
    if not args.skip_blowup:
        cases.append(("flat_beta0_n5", None, 1.0, 0.0, 5))
    rows = []
    for name, jet, r, beta, n in cases:
        tr = subcritical_continuation(jet, r, 1.0, beta, n=n)
        print(f"{name}: {tr.terminal_status} (final grid {tr.diagnostics['final_intervals']} cells)")
        for q, sup, ok, res in zip(tr.exponents, tr.sup_values, tr.converged_flags, tr.residuals):
            rows.append({"case": name, "q": q, "sup_u": sup, "converged": ok, "residual": res,
                         "status": tr.terminal_status})
    write_rows(args.outdir, "existence_dichotomy.csv", rows)


if __name__ == "__main__":
    main()
