"""Per-transaction detectors on the simple model (single feature: step).

    python scripts/simple_outliers.py [--seed 42]
"""
import argparse

from txnforge.abm import paper_config, run
from txnforge.features import event_matrix
from txnforge.report import run_detector

EXPERIMENTS = [
    ("dtree", {"max_depth": 1}),
    ("dtree", {"max_depth": 2}),
    ("gmm", {"n_components": 1}),
    ("gmm", {"n_components": 2}),
    ("gmm", {"n_components": 3}),
    ("iforest", {"contamination": 0.1}),
    ("iforest", {"contamination": 0.01}),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    fm = event_matrix(run(paper_config("simple", seed=args.seed)))
    print(f"{len(fm.y)} transactions, {fm.y.sum()} suspicious")
    print(f"{'detector':<10}{'params':<26}{'tp':>5}{'fp':>6}{'fn':>5}{'recall':>8}{'mcc':>8}")
    for algo, params in EXPERIMENTS:
        rep = run_detector(fm, algo, params, seed=args.seed, feature_set="time", granularity="event")
        cm, m = rep.confusion, rep.metrics
        desc = ", ".join(f"{k}={v}" for k, v in params.items())
        print(f"{algo:<10}{desc:<26}{cm.tp:>5}{cm.fp:>6}{cm.fn:>5}{m.recall:>8.3f}{m.mcc:>8.3f}")
        if "thresholds" in rep.extra:
            print(f"{'':<10}thresholds: {[t['threshold'] for t in rep.extra['thresholds']]}")


if __name__ == "__main__":
    main()
