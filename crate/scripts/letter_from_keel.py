#!/usr/bin/env python3
"""Convert the UCI Letter Recognition data shipped in the `keel_ds` wheel to CSV.

Output: one header line, then `label,x1..x16` rows with letters A..Z mapped to
0..25, in the row order of the source file.

    pip download --no-deps keel_ds==0.2.5 -d /tmp/keel
    python3 scripts/letter_from_keel.py /tmp/keel/keel_ds-0.2.5-py3-none-any.whl data/letter/letter.csv
"""
import sys
import zipfile

MEMBER = "keel_ds/data/balanced/raw/letter.dat"


def main(wheel, out):
    text = zipfile.ZipFile(wheel).read(MEMBER).decode()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        *features, letter = [f.strip() for f in line.split(",")]
        rows.append([str(ord(letter) - ord("A"))] + features)
    with open(out, "w") as fh:
        fh.write(",".join(["label"] + [f"x{i}" for i in range(1, 17)]) + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
