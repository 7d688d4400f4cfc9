"""Depth-2 stack on (sin(pi x1) + x2^2)/2; reports the loss reduction per seed."""
import argparse
import tempfile
from pathlib import Path

from qspkan import io
from qspkan.cli import main as cli

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "train_toy_stack.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--config", default=str(CONFIG))
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        for seed in range(args.seeds):
            out = Path(tmp) / str(seed)
            cli(["train", "--config", args.config, "--out", str(out), "--seed", str(seed), "--quiet"])
            first = float((out / "training.csv").read_text().splitlines()[1].split(",")[1])
            _, meta = io.load_checkpoint(out / "checkpoint.json")
            print(f"seed {seed}: {first:.4f} -> {meta['final_loss']:.4f} ({first / meta['final_loss']:.2f}x)")


if __name__ == "__main__":
    main()
