import argparse
import csv
import os


def parser(doc):
    ap = argparse.ArgumentParser(description=doc)
    ap.add_argument("--outdir", default=os.environ.get("YAMABE_LAB_OUTDIR", "results"))
    return ap


def write_rows(outdir, name, rows):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")
    return path
