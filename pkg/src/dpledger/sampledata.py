"""Synthetic survey-style CSV for demos and tests.

Produces a table shaped like the public use microdata samples used in the
documentation examples: two income columns, an age column and two
categorical columns.  Values stay inside the committed domains of the
shipped example configuration.

Usage: ``python -m dpledger.sampledata out.csv --rows 5000 --seed 7``
"""

from __future__ import annotations

import argparse
import csv
import io
from pathlib import Path

import numpy as np

COLUMNS = (
    "total_personal_income",
    "total_family_income",
    "age",
    "race",
    "citizenship",
)

RACES = ("white", "black", "asian", "native", "other")
RACE_WEIGHTS = (0.6, 0.13, 0.06, 0.01, 0.2)
CITIZENSHIP = ("citizen", "non_citizen")
CITIZENSHIP_WEIGHTS = (0.88, 0.12)


def survey_csv_bytes(rows: int = 5000, seed: int = 7) -> bytes:
    rng = np.random.default_rng(seed)
    personal = np.clip(rng.normal(42000, 35000, size=rows), -5000, 700000)
    family = np.clip(
        personal * rng.uniform(1.0, 2.2, size=rows) + rng.normal(8000, 15000, size=rows),
        -5000,
        1379500,
    )
    age = rng.integers(0, 96, size=rows)
    race = rng.choice(RACES, size=rows, p=RACE_WEIGHTS)
    citizenship = rng.choice(CITIZENSHIP, size=rows, p=CITIZENSHIP_WEIGHTS)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for i in range(rows):
        writer.writerow(
            [
                f"{personal[i]:.2f}",
                f"{family[i]:.2f}",
                int(age[i]),
                race[i],
                citizenship[i],
            ]
        )
    return buffer.getvalue().encode("utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", type=Path)
    parser.add_argument("--rows", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_bytes(survey_csv_bytes(rows=args.rows, seed=args.seed))
    print(f"wrote {args.rows} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
