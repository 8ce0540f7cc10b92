#!/usr/bin/env python3
"""Simulated study: scripted agents run search tasks across conditions and the
logs flow through the grouped-means and significance reports.

Example:
    python scripts/run_simulation.py --tasks-per-condition 25 --seed 42 \
        --effect random:shape:1.2 --out sim-report.json
"""

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from timbrespace.config import StudyConfig
from timbrespace.pipeline import build_library_context
from timbrespace.scene import canonical_json
from timbrespace.simulate import demo_library, simulate_results
from timbrespace.stats import significance_report, summary_table

ALL_CONDITIONS = [("dr", "baseline"), ("random", "baseline"),
                  ("dr", "shape"), ("random", "shape"),
                  ("dr", "color"), ("random", "color"),
                  ("dr", "texture"), ("random", "texture")]


def parse_effect(text):
    placement, label, factor = text.split(":")
    return (placement, label), float(factor)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=48)
    parser.add_argument("--participants", type=int, default=6)
    parser.add_argument("--tasks-per-condition", type=int, default=25)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--effect", action="append", default=[],
                        help="placement:label:factor, e.g. random:shape:1.2")
    parser.add_argument("--conditions", default="baseline,shape",
                        help="comma-separated label modes to simulate")
    parser.add_argument("--out", default=None)
    parser.add_argument("--log-out", default=None,
                        help="also dump the raw result records (jsonl)")
    args = parser.parse_args()

    labels = [l.strip() for l in args.conditions.split(",") if l.strip()]
    conditions = [(p, l) for (p, l) in ALL_CONDITIONS if l in labels]
    effects = dict(parse_effect(e) for e in args.effect)

    t0 = time.perf_counter()
    print(f"building library context ({args.samples} synthetic samples)...")
    config = StudyConfig(n_epochs=300)
    ctx = build_library_context(demo_library(n=args.samples, seed=args.seed), config)
    print(f"  done in {time.perf_counter() - t0:.1f}s")

    t0 = time.perf_counter()
    participants = [f"sim{i:02d}" for i in range(args.participants)]
    records = simulate_results(ctx, participants, conditions,
                               args.tasks_per_condition, seed=args.seed,
                               time_effects=effects)
    print(f"simulated {len(records)} tasks in {time.perf_counter() - t0:.1f}s")

    if args.log_out:
        with open(args.log_out, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
        print(f"raw log -> {args.log_out}")

    rows = summary_table(records, seed=args.seed)
    print(f"\n{'measure':<9} {'label':<9} {'placement':<9} "
          f"{'mean':>8} {'95% CI':>20} {'n':>4}")
    for r in rows:
        ci = f"[{r['ci_low']:.1f}, {r['ci_high']:.1f}]"
        print(f"{r['measure']:<9} {r['label_mode']:<9} {r['placement_mode']:<9} "
              f"{r['mean']:>8.2f} {ci:>20} {r['n']:>4}")

    report = significance_report(records)
    print("\nsignificance:")
    for row in report["measures"]:
        flag = "**" if row["significant"] else "  "
        where = row.get("label_mode") or row.get("placement_mode")
        print(f" {flag} {row['measure']:<9} {row['comparison']:<10} {where:<9} "
              f"{row['test']:<16} p={row['p']:.4g}")

    if args.out:
        payload = {"summary": rows, "significance": report,
                   "conditions": [list(c) for c in conditions],
                   "effects": {f"{k[0]}:{k[1]}": v for k, v in effects.items()},
                   "seed": args.seed}
        Path(args.out).write_text(canonical_json(payload) + "\n", encoding="utf-8")
        print(f"\nreport -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
