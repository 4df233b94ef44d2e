#!/usr/bin/env python3
"""Generate the bundled study fixtures.

noblis_fixture.csv
    17,121 per-decision records over 169 examiners whose category totals match
    the published Noblis marginals exactly. Per-examiner splits are synthetic:
    the public release is not redistributed here.

recovery_scenario.json
    A "true rate" scenario for the recovery experiment. Population rates and
    examiners E010/E042/E107 are the published values; the remaining examiners
    are drawn from Dirichlet(lambda * population) with lambda = exp(6).

Both files are deterministic for a given --seed.
"""

import argparse
import csv
import json
import math
from pathlib import Path

import numpy as np

CATEGORIES = ["NV", "Exc.VEO", "Exc.VID", "Inc.VEO", "Inc.VID", "Ind.VEO", "Ind.VID"]
VALUE = ["NV", "VEO", "VID", "VEO", "VID", "VEO", "VID"]
DECISION = ["", "Exclusion", "Exclusion", "Inconclusive", "Inconclusive",
            "Individualization", "Individualization"]

TOTALS = {
    "mated": np.array([3389, 161, 450, 2019, 1856, 40, 3663]),
    "nonmated": np.array([558, 325, 3622, 577, 455, 0, 6]),
}

EXAMINERS = 169
PHASE1_PER_EXAMINER = 100
PHASE1_REMOVED = 27
PHASE2_EXAMINERS = 42
PHASE2_RESPONSES = 248
MATED_CASES = 500
NONMATED_CASES = 244

# Pinned cells: (scenario, category index, examiner number) -> count.
PINNED = {
    ("mated", 2, 157): 14,
    ("mated", 2, 91): 12,
    ("nonmated", 6, 28): 1,
    ("nonmated", 6, 63): 2,
    ("nonmated", 6, 12): 1,
    ("nonmated", 6, 77): 1,
    ("nonmated", 6, 140): 1,
}
# Non-pinned cells in these categories are capped.
CAPS = {("mated", 2): 11, ("nonmated", 6): 0, ("nonmated", 5): 0}

POP_TRUE = {
    "mated": [30.70, 1.00, 4.00, 17.00, 16.00, 0.30, 31.00],
    "nonmated": [10.90, 6.00, 65.00, 10.00, 8.00, 0.00, 0.10],
}
EXAMINER_TRUE = {
    10: ([32.36, 3.02, 0.82, 14.35, 3.52, 4.34, 41.60],
         [14.15, 4.01, 79.18, 1.46, 1.20, 0.00, 0.00]),
    42: ([33.74, 1.11, 0.07, 25.15, 3.81, 0.08, 36.04],
         [26.74, 7.17, 46.08, 5.14, 14.87, 0.00, 0.00]),
    107: ([35.17, 0.00, 0.52, 17.19, 15.98, 0.00, 31.14],
          [19.72, 11.57, 57.87, 10.51, 0.25, 0.00, 0.08]),
}


def examiner_id(j):
    return f"E{j:03d}"


def presented_counts(rng):
    n = np.full(EXAMINERS, PHASE1_PER_EXAMINER)
    n[rng.choice(EXAMINERS, PHASE1_REMOVED, replace=False)] -= 1
    phase2 = np.zeros(EXAMINERS, dtype=int)
    chosen = rng.choice(EXAMINERS, PHASE2_EXAMINERS, replace=False)
    base, extra = divmod(PHASE2_RESPONSES, PHASE2_EXAMINERS)
    phase2[chosen] = base
    phase2[chosen[:extra]] += 1
    return n, phase2


def split_mated(rng, n_total):
    slots = np.repeat(np.arange(EXAMINERS), n_total)
    mated_total = TOTALS["mated"].sum()
    flags = np.zeros(slots.size, dtype=bool)
    flags[rng.choice(slots.size, mated_total, replace=False)] = True
    n_m = np.bincount(slots[flags], minlength=EXAMINERS)
    return n_m, n_total - n_m


def allocate(rng, scenario, n, concentration):
    totals = TOTALS[scenario]
    mean = totals / totals.sum()
    counts = np.zeros((EXAMINERS, 7), dtype=int)
    for j in range(EXAMINERS):
        alpha = np.maximum(concentration * mean, 1e-3)
        theta = rng.dirichlet(alpha)
        counts[j] = rng.multinomial(n[j], theta)

    fixed = np.zeros_like(counts, dtype=bool)
    cap = np.full_like(counts, np.iinfo(np.int32).max)
    for (s, c), limit in CAPS.items():
        if s == scenario:
            cap[:, c] = limit
    for (s, c, j), value in PINNED.items():
        if s == scenario:
            fixed[j - 1, c] = True
            cap[j - 1, c] = value

    # Enforce pins and caps by moving units within each examiner's row.
    for j in range(EXAMINERS):
        for c in range(7):
            target = cap[j, c] if fixed[j, c] else min(counts[j, c], cap[j, c])
            while counts[j, c] > target:
                counts[j, c] -= 1
                dest = [k for k in range(7) if k != c and counts[j, k] < cap[j, k] and not fixed[j, k]]
                counts[j, rng.choice(dest)] += 1
            while counts[j, c] < target:
                src = [k for k in range(7) if k != c and counts[j, k] > 0 and not fixed[j, k]]
                counts[j, rng.choice(src)] -= 1
                counts[j, c] += 1

    # Balance column totals with single-unit moves inside examiner rows.
    while True:
        diff = counts.sum(axis=0) - totals
        if not diff.any():
            break
        over = rng.choice(np.flatnonzero(diff > 0))
        under = rng.choice(np.flatnonzero(diff < 0))
        rows = np.flatnonzero((counts[:, over] > 0) & ~fixed[:, over] & ~fixed[:, under]
                              & (counts[:, under] < cap[:, under]))
        j = rng.choice(rows)
        counts[j, over] -= 1
        counts[j, under] += 1
    assert (counts.sum(axis=1) == n).all()
    assert (counts.sum(axis=0) == totals).all()
    return counts


def write_records(path, rng, n_phase1, n_phase2, mated_counts, nonmated_counts):
    mated_cases = [f"TC{i:03d}" for i in range(1, MATED_CASES + 1)]
    nonmated_cases = [f"TC{i:03d}" for i in range(MATED_CASES + 1, MATED_CASES + NONMATED_CASES + 1)]
    rows = []
    for j in range(EXAMINERS):
        decisions = []
        for scenario, counts, pool in (("Mates", mated_counts, mated_cases),
                                       ("Non-mates", nonmated_counts, nonmated_cases)):
            labels = np.repeat(np.arange(7), counts[j])
            rng.shuffle(labels)
            cases = rng.choice(pool, labels.size, replace=False)
            decisions += [(case, scenario, int(c)) for case, c in zip(cases, labels)]
        order = rng.permutation(len(decisions))
        for pos, idx in enumerate(order):
            case, scenario, c = decisions[idx]
            phase = 1 if pos < n_phase1[j] else 2
            rows.append((examiner_id(j + 1), case, scenario, VALUE[c], DECISION[c], phase))
    rows.sort(key=lambda r: (r[0], r[5], r[1]))
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["examiner_id", "pair_id", "mating", "latent_value", "decision", "phase"])
        out.writerows(rows)


def normalise(percent):
    v = np.asarray(percent, dtype=float)
    return (v / v.sum()).tolist()


def write_scenario(path, rng, lam):
    pop = {s: np.asarray(normalise(POP_TRUE[s])) for s in ("mated", "nonmated")}
    examiners = []
    for j in range(1, EXAMINERS + 1):
        if j in EXAMINER_TRUE:
            m, nm = EXAMINER_TRUE[j]
            entry = {"id": examiner_id(j), "mated": normalise(m), "nonmated": normalise(nm)}
        else:
            entry = {"id": examiner_id(j)}
            for s in ("mated", "nonmated"):
                alpha = lam * pop[s]
                draw = np.zeros(7)
                live = alpha > 0
                draw[live] = rng.dirichlet(alpha[live])
                entry[s] = draw.tolist()
        examiners.append(entry)
    doc = {
        "description": "True-rate recovery scenario: published population rates and "
                       "examiners E010, E042, E107; other examiners drawn from "
                       f"Dirichlet({lam:.4f} * population).",
        "population": {s: pop[s].tolist() for s in ("mated", "nonmated")},
        "examiners": examiners,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[2] / "data")
    ap.add_argument("--seed", type=int, default=20111)
    ap.add_argument("--concentration", type=float, default=20.0,
                    help="Dirichlet concentration for synthetic examiner heterogeneity")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n_phase1, n_phase2 = presented_counts(rng)
    n_m, n_nm = split_mated(rng, n_phase1 + n_phase2)
    mated = allocate(rng, "mated", n_m, args.concentration)
    nonmated = allocate(rng, "nonmated", n_nm, args.concentration)
    args.out.mkdir(parents=True, exist_ok=True)
    write_records(args.out / "noblis_fixture.csv", rng, n_phase1, n_phase2, mated, nonmated)
    write_scenario(args.out / "recovery_scenario.json", rng, math.exp(6.0))


if __name__ == "__main__":
    main()
