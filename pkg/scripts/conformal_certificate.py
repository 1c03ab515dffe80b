"""Conformal factor on the flat torus with negative scalar curvature at a point."""
from yamabe_lab.pipelines import conformal_negativity

from _common import parser, write_rows


def main():
    ap = parser(__doc__)
    ap.add_argument("--grid", type=int, default=32)
    args = ap.parse_args()
    rows = []
    for n, m in ((3, args.grid), (4, args.grid)):
        cert = conformal_negativity(n, 1.0, m, 2.0, 0.05).certificate
        row = {"n": n, **{k: v for k, v in cert.to_dict().items() if k != "checks"}}
        print(row)
        rows.append(row)
    write_rows(args.outdir, "conformal_certificate.csv", rows)


if __name__ == "__main__":
    main()
