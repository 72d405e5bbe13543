#!/usr/bin/env python3
"""Build data/abalone.csv and data/diabetes.csv from locally installable packages.

The UCI abalone table is reassembled from two redistributions available on PyPI:
  * cdt (Tuebingen cause-effect pairs 5-11 carry rings plus the seven numeric
    measurements for all 4177 rows in the canonical order),
  * keel-ds (the KEEL "abalone*" files carry the sex column next to the same
    measurements).
Rows whose sex cannot be recovered are written with an empty Sex field; the
C++ loader drops them and reports the count.

The diabetes table comes from the copy bundled with scikit-learn.
"""
import argparse
import collections
import glob
import gzip
import os
import subprocess
import sys
import tempfile
import zipfile

NUMERIC = [
    ("Length", "pair5"),
    ("Diameter", "pair7"),
    ("Height", "pair8"),
    ("Whole_weight", "pair9"),
    ("Shucked_weight", "pair10"),
    ("Viscera_weight", "pair11"),
    ("Shell_weight", "pair6"),
]


def fetch_wheel(name, dest):
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", name, "-d", dest],
                   check=True, stdout=subprocess.DEVNULL)
    (path,) = glob.glob(os.path.join(dest, "*.whl"))
    return zipfile.ZipFile(path)


def build_abalone(out_path):
    with tempfile.TemporaryDirectory() as tmp:
        cdt = fetch_wheel("cdt==0.6.0", os.path.join(tmp, "cdt"))
        keel = fetch_wheel("keel-ds==0.2.5", os.path.join(tmp, "keel"))

        pairs = {}
        for line in cdt.read("cdt/data/resources/Tuebingen_pairs.csv").decode().splitlines()[1:]:
            sample_id, a, b = line.split(",")
            pairs[sample_id] = (a.split(), b.split())
        rings = pairs["pair5"][0]
        columns = {}
        for name, pair in NUMERIC:
            cause, effect = pairs[pair]
            if cause != rings:
                raise RuntimeError(f"{pair} is not aligned with the rings column")
            columns[name] = effect

        sex_by_row = collections.defaultdict(set)
        for member in keel.namelist():
            if "abalone" not in member or not member.endswith(".dat"):
                continue
            for line in keel.read(member).decode().splitlines():
                if not line.strip() or line.startswith("@"):
                    continue
                parts = [p.strip() for p in line.split(",")]
                sex_by_row[tuple(float(v) for v in parts[1:8])].add(parts[0])

    unresolved = 0
    with open(out_path, "w") as fh:
        fh.write("Sex," + ",".join(name for name, _ in NUMERIC) + ",Rings\n")
        for i, ring in enumerate(rings):
            values = [columns[name][i] for name, _ in NUMERIC]
            sexes = sex_by_row.get(tuple(float(v) for v in values), set())
            sex = next(iter(sexes)) if len(sexes) == 1 else ""
            unresolved += sex == ""
            fh.write(",".join([sex] + values + [ring]) + "\n")
    print(f"abalone: {len(rings)} rows, {unresolved} without sex -> {out_path}")


def build_diabetes(out_path):
    import sklearn

    base = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data")
    with gzip.open(os.path.join(base, "diabetes_data_raw.csv.gz"), "rt") as fh:
        rows = [line.split() for line in fh.read().splitlines() if line.strip()]
    with gzip.open(os.path.join(base, "diabetes_target.csv.gz"), "rt") as fh:
        target = [line.strip() for line in fh.read().splitlines() if line.strip()]
    header = ["age", "sex", "bmi", "bp", "s1", "s2", "s3", "s4", "s5", "s6", "target"]
    if rows and not rows[0][0].replace(".", "").isdigit():
        rows = rows[1:]
    with open(out_path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row, t in zip(rows, target):
            fh.write(",".join(row + [t]) + "\n")
    print(f"diabetes: {len(rows)} rows -> {out_path}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    build_abalone(os.path.join(args.out_dir, "abalone.csv"))
    build_diabetes(os.path.join(args.out_dir, "diabetes.csv"))


if __name__ == "__main__":
    main()
