#!/usr/bin/env python3
"""Hyperparameter sweep: curves over a grid of k and n on one synthetic run.

Writes the combined sweep CSV and overlay SVG through the CLI surface and
prints the per-n maximum gap across k values; on well-separated data the
gap stays small at every layer.
"""

import argparse
import sys
import tempfile
from pathlib import Path

from modgraph.cli import main as modgraph_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="sweep_out")
    parser.add_argument("--k-list", default="3,5,7,9,11")
    parser.add_argument("--n-list", default="200,500")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        run_dir = Path(tmp) / "run"
        code = modgraph_main([
            "synth", "--out", str(run_dir), "--n", "500", "--classes", "10",
            "--features", "256", "--layers", "10", "--schedule", "3:6",
            "--seed", str(args.seed),
        ])
        if code != 0:
            return code
        return modgraph_main([
            "sweep", "--manifest", str(run_dir / "manifest.json"),
            "--k-list", args.k_list, "--n-list", args.n_list,
            "--out", args.out,
        ])


if __name__ == "__main__":
    sys.exit(main())
