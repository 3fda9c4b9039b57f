#!/usr/bin/env python3
"""Rebuild data/ecoli.csv (UCI Ecoli, 336 rows, 8 classes) from the KEEL
binarized copies shipped in the `imbalanced_databases` wheel.

The KEEL files keep the original feature values. Four of them cover all 336
rows (im, pp, imU, om vs rest); the remaining classes are recovered from the
smaller one-vs-some files by matching feature tuples.

    pip download --no-deps imbalanced_databases==0.1.1 -d /tmp/wheels
    python3 scripts/rebuild_ecoli.py /tmp/wheels/imbalanced_databases-0.1.1-py3-none-any.whl
"""
import sys
import zipfile
from collections import Counter


def short_key(x):
    # Some KEEL variants store 100*x with trailing zeros dropped (0.40 -> "4.0").
    s = str(int(round(x * 100))).rstrip("0")
    return s or "0"


def load(archive, name, scaled=False):
    text = archive.read(f"imbalanced_databases/data/{name}/{name}.dat").decode()
    rows, in_data = [], False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.lower() == "@data":
            in_data = True
            continue
        if in_data:
            parts = [p.strip() for p in line.split(",")]
            values = [float(p) for p in parts[:-1]]
            key = tuple(str(int(v)) for v in values) if scaled else tuple(short_key(v) for v in values)
            rows.append((key, values, parts[-1]))
    return rows


def positives(archive, name, scaled=False):
    return Counter(k for k, _, c in load(archive, name, scaled) if c == "positive")


def main():
    archive = zipfile.ZipFile(sys.argv[1])
    base = load(archive, "ecoli1")
    pools = [
        ("im", positives(archive, "ecoli1")),
        ("pp", positives(archive, "ecoli2")),
        ("imU", positives(archive, "ecoli3")),
        ("om", positives(archive, "ecoli4")),
        ("cp", positives(archive, "ecoli-0_vs_1")),
    ]
    om_or_oml = positives(archive, "ecoli-0-3-4-7_vs_5-6", scaled=True)
    iml_or_oml = positives(archive, "ecoli-0-1-3-7_vs_2-6", scaled=True)

    labels = []
    for key, _, _ in base:
        hits = [name for name, pool in pools if pool[key] > 0]
        assert len(hits) <= 1, key
        if hits:
            dict(pools)[hits[0]][key] -= 1
            labels.append(hits[0])
            if hits[0] == "om":
                om_or_oml[key] -= 1
        elif om_or_oml[key] > 0:
            labels.append("omL")
            om_or_oml[key] -= 1
            iml_or_oml[key] -= 1
        elif iml_or_oml[key] > 0:
            labels.append("imL")
            iml_or_oml[key] -= 1
        else:
            labels.append("imS")

    counts = Counter(labels)
    expected = {"cp": 143, "im": 77, "pp": 52, "imU": 35, "om": 20, "omL": 5, "imL": 2, "imS": 2}
    assert counts == expected, counts

    with open("data/ecoli.csv", "w") as out:
        out.write("mcg,gvh,lip,chg,aac,alm1,alm2,class\n")
        for (_, values, _), label in zip(base, labels):
            out.write(",".join(f"{v:.2f}" for v in values) + "," + label + "\n")


if __name__ == "__main__":
    main()
