#!/usr/bin/env python3
"""Regenerate the bundled end-to-end fixture: a 2000-row CFPB-format
complaint CSV whose narratives carry four planted topics, plus a matching
embeddings file with four well-separated clusters.

Cluster markers are chosen so each cluster's top-3 c-TF-IDF words are
exactly its markers. Usage: python scripts/make_e2e_fixture.py [outdir]
"""

import csv
import sys
from pathlib import Path

import numpy as np

SEED = 20240101
N_PER_CLUSTER = 500
DIM = 8

MARKERS = [
    ["escrow", "foreclosure", "appraisal"],
    ["overdraft", "teller", "deposit"],
    ["repossession", "dealership", "odometer"],
    ["chargeback", "merchant", "refund"],
]

PRODUCTS = ["Mortgage", "Checking account", "Auto loan", "Credit card"]
COMPANIES = ["Acme Bank", "Summit Financial", "Lakeside Credit", "Harbor Lending"]

FILLERS = [
    "account", "company", "money", "time", "issue", "service", "customer",
    "problem", "letter", "phone", "response", "information", "request",
    "process", "office", "manager", "notice", "record", "amount", "review",
]

TEMPLATES = [
    "On XXXX the {m0} on my {product} was mishandled and the {m1} review took 30 days. "
    "I called the {f0} about the {m2} but got no {f1}.",
    "My {m0} dispute is still open. The {f0} sent a {f1} about the {m1} and the {m2} "
    "was wrong by 250 dollars on XXXX XXXX.",
    "I asked for the {m0} documents, the {m1} statement, and a {m2} correction. "
    "Their {f0} never sent any {f1} or {f2}.",
    "The {m0} fee appeared twice. After the {m1} call their {f0} admitted the {m2} "
    "record was stale. Still waiting on a {f1}.",
]


def narratives(rng):
    rows = []
    for cluster in range(4):
        markers = MARKERS[cluster]
        for i in range(N_PER_CLUSTER):
            template = TEMPLATES[int(rng.integers(0, len(TEMPLATES)))]
            fillers = [FILLERS[j] for j in rng.choice(len(FILLERS), 3, replace=False)]
            text = template.format(
                m0=markers[0], m1=markers[1], m2=markers[2],
                f0=fillers[0], f1=fillers[1], f2=fillers[2],
                product=PRODUCTS[cluster].lower(),
            )
            rows.append((cluster, text))
    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def main(outdir: Path) -> None:
    rng = np.random.default_rng(SEED)
    rows = narratives(rng)
    centers = np.zeros((4, DIM))
    for c in range(4):
        centers[c, 2 * c] = 12.0
        centers[c, 2 * c + 1] = -12.0

    csv_path = outdir / "complaints2000.csv"
    emb_path = outdir / "embeddings2000.tsv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "Date received", "Product", "Company",
            "Consumer complaint narrative", "Complaint ID",
        ])
        for i, (cluster, text) in enumerate(rows):
            writer.writerow([
                f"2021-{1 + (i % 12):02d}-{1 + (i % 28):02d}",
                PRODUCTS[cluster],
                COMPANIES[cluster],
                text,
                str(100000 + i),
            ])
    with open(emb_path, "w", encoding="utf-8") as fh:
        for i, (cluster, _) in enumerate(rows):
            vec = centers[cluster] + rng.normal(0.0, 0.4, DIM)
            values = ",".join(f"{x:.9g}" for x in vec)
            fh.write(f"{100000 + i}\t{DIM}\t{values}\n")
    print(f"wrote {csv_path} and {emb_path} ({len(rows)} rows)")


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/data")
    target.mkdir(parents=True, exist_ok=True)
    main(target)
