#!/usr/bin/env python3
"""Generate a synthetic census-style benchmark: data.csv plus config.json.

Deterministic for a given seed. The schema mirrors the usual census
benchmark shape: three numeric quasi-identifiers (age, education years,
weekly hours), a categorical work sector kept un-split, and a sensitive
occupation column. The default split spec yields 20 numeric cuts.
"""

import argparse
import csv
import json
import random
from pathlib import Path

SECTORS = {
    "gov": ["federal", "state", "local"],
    "private": ["company", "self_employed", "nonprofit"],
}

OCCUPATIONS = ["craft", "sales", "tech", "clerical", "service",
               "managerial", "transport", "farming"]


def make_rows(n, rng):
    rows = []
    leaves = [v for vs in SECTORS.values() for v in vs]
    for _ in range(n):
        age = min(90, max(17, int(rng.gauss(38, 13))))
        edu = min(16, max(1, int(rng.gauss(10, 2.5))))
        # hours cluster at full time with occasional part/overtime
        r = rng.random()
        if r < 0.6:
            hours = 40
        elif r < 0.8:
            hours = rng.randint(20, 39)
        else:
            hours = rng.randint(41, 99)
        work = rng.choice(leaves)
        occ = rng.choices(OCCUPATIONS,
                          weights=[14, 12, 10, 12, 13, 13, 8, 3])[0]
        rows.append((age, edu, hours, work, occ))
    return rows


def config_doc():
    return {
        "attributes": [
            {"name": "age", "kind": "numeric", "role": "qi",
             "domain": [17, 90], "splits": {"type": "equi_width", "count": 8}},
            {"name": "education_num", "kind": "numeric", "role": "qi",
             "domain": [1, 16], "splits": {"type": "equi_width", "count": 5}},
            {"name": "hours_per_week", "kind": "numeric", "role": "qi",
             "domain": [1, 99], "splits": {"type": "equi_width", "count": 7}},
            {"name": "workclass", "kind": "categorical", "role": "qi",
             "taxonomy": "workclass", "splits": {"type": "none"}},
            {"name": "occupation", "kind": "categorical", "role": "sensitive",
             "values": OCCUPATIONS},
        ],
        "taxonomies": {
            "workclass": {"label": "any", "children": [
                {"label": sector, "children": [{"label": v} for v in vs]}
                for sector, vs in SECTORS.items()
            ]},
        },
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=17)
    ap.add_argument("--out-dir", default="bench")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    rows = make_rows(args.rows, rng)

    with open(out / "data.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["age", "education_num", "hours_per_week", "workclass",
                    "occupation"])
        w.writerows(rows)
    with open(out / "config.json", "w") as fh:
        json.dump(config_doc(), fh, indent=2)
        fh.write("\n")
    print(f"wrote {out / 'data.csv'} ({args.rows} rows) and "
          f"{out / 'config.json'}")


if __name__ == "__main__":
    main()
