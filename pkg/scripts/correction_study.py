"""Correction PDE study: closeness exponents in d and the quotient of u + v and |v|."""
import numpy as np

from yamabe_lab.curvature import synthetic_jet
from yamabe_lab.pipelines import corrected_test_function, d_sweep

from _common import parser, write_rows


def main():
    ap = parser(__doc__)
    ap.add_argument("--weyl-scale", type=float, default=0.05)
    ap.add_argument("--eps", type=float, default=1e-4)
    args = ap.parse_args()
    rows = []
    for n in (4, 5, 6):
        jet = synthetic_jet(n, 0, -1.0, args.weyl_scale)
        lp, l2 = d_sweep(jet, None, np.geomspace(0.02, 0.2, 5), eps=args.eps)
        res = corrected_test_function(jet, 0.2, eps=args.eps)
        thr = res.report.threshold
        row = {"n": n, "gamma": res.gamma, "lp_slope": lp.fitted_exponent, "lp_bound": lp.bound_exponent,
               "l2_slope": l2.fitted_exponent, "l2_bound": l2.bound_exponent,
               "min_u_plus_v": res.positivity.min_value,
               "Q_u_plus_v_over_aT": res.report_u_plus_v.value / thr,
               "Q_abs_v_over_aT": res.report_abs_v.value / thr,
               "Q_perturbed_u_over_T": res.baseline.value / res.baseline.threshold}
        print(" ".join(f"{k}={v:.5g}" for k, v in row.items()))
        rows.append(row)
    write_rows(args.outdir, "correction_study.csv", rows)


if __name__ == "__main__":
    main()
