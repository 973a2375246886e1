"""MCC of every detector on every per-agent feature set of the graph model.

    python scripts/graph_benchmark.py [--seed 42] [--contamination 0.01]
"""
import argparse

from txnforge.abm import paper_config, run
from txnforge.features import FeatureSet, extract_features, select_columns
from txnforge.report import run_detector


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--contamination", type=float, default=0.01)
    ap.add_argument("--max-depth", type=int, default=1)
    args = ap.parse_args()

    features = extract_features(run(paper_config("graph", seed=args.seed)))
    params = {
        "dtree": {"max_depth": args.max_depth},
        "gmm": {"n_components": 2},
        "iforest": {"contamination": args.contamination},
    }
    sets = list(FeatureSet)
    print(f"{'detector':<10}" + "".join(f"{fs.value:>17}" for fs in sets))
    for algo, p in params.items():
        cells = []
        for fs in sets:
            rep = run_detector(select_columns(features, fs), algo, p, seed=args.seed)
            cells.append(f"{rep.metrics.mcc:>17.3f}")
        print(f"{algo:<10}" + "".join(cells))


if __name__ == "__main__":
    main()
