#!/usr/bin/env python3
"""Regenerates the synthetic CSVs under data/synthetic/.

These are stand-ins for tests and examples only. They are not PROMISE data.
"""

import csv
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic"


def write(name, header, rows):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def fmt(x):
    return f"{x:.6g}"


def small8():
    # n = 8, m = 4, used for the brute-force Pareto check.
    rng = np.random.default_rng(8)
    rows = []
    for _ in range(8):
        f = rng.uniform(0, 10, size=4)
        effort = 5 + 3 * f[0] + 1.5 * f[1] - 0.5 * f[2] + rng.normal(0, 2) + 0.2 * f[3]
        rows.append([fmt(v) for v in f] + [fmt(max(effort, 1.0))])
    write("small8.csv", ["f1", "f2", "f3", "f4", "effort"], rows)


def albrecht_like():
    # 24 projects, 7 function-point style inputs, effort in months.
    rng = np.random.default_rng(24)
    rows = []
    for _ in range(24):
        inp = rng.integers(7, 200)
        out = rng.integers(12, 150)
        inq = rng.integers(0, 75)
        fil = rng.integers(3, 60)
        fpadj = round(rng.uniform(0.75, 1.2), 2)
        raw = 4 * inp + 5 * out + 4 * inq + 10 * fil
        adj = round(raw * fpadj)
        effort = max(1.0, 0.012 * adj * rng.lognormal(0, 0.35))
        rows.append([inp, out, inq, fil, fpadj, raw, adj, fmt(effort)])
    write("albrecht_like.csv", ["Input", "Output", "Inquiry", "File", "FPAdj", "RawFP", "AdjFP", "Effort"], rows)


def desharnais_like():
    # 81 projects, 4 with a missing cell, a categorical language column.
    rng = np.random.default_rng(81)
    langs = ["Basic", "Advanced", "4GL"]
    rows = []
    missing = {5, 22, 40, 63}
    for i in range(81):
        team = rng.integers(0, 5)
        mgr = rng.integers(0, 8)
        year = rng.integers(82, 89)
        length = rng.integers(1, 40)
        trans = rng.integers(10, 600)
        ent = rng.integers(5, 400)
        pna = trans + ent
        adjust = rng.integers(5, 53)
        pa = round(pna * (0.65 + 0.01 * adjust))
        lang = langs[rng.integers(0, 3)]
        effort = max(546.0, 12 * pa * (1.3 if lang == "Basic" else 1.0) * rng.lognormal(0, 0.4))
        row = [i + 1, team, mgr, year, length, trans, ent, pna, adjust, pa, lang, round(effort)]
        if i in missing:
            row[1 + (i % 3)] = "?"
        rows.append(row)
    header = ["Project", "TeamExp", "ManagerExp", "YearEnd", "Length", "Transactions", "Entities",
              "PointsNonAdjust", "Adjustment", "PointsAdjust", "Language", "Effort"]
    write("desharnais_like.csv", header, rows)


def telecom_like():
    rng = np.random.default_rng(18)
    rows = []
    for _ in range(18):
        changes = rng.integers(3, 300)
        files = rng.integers(3, 250)
        effort = max(23.5, 1.4 * changes + 0.8 * files + rng.normal(0, 30))
        rows.append([changes, files, fmt(effort)])
    write("telecom_like.csv", ["changes", "files", "effort"], rows)


if __name__ == "__main__":
    small8()
    albrecht_like()
    desharnais_like()
    telecom_like()
