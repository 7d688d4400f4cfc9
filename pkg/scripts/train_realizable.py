"""Train a 2-feature layer on data from hidden phases, over several seeds."""
import argparse
import tempfile
from pathlib import Path

from qspkan import io
from qspkan.cli import main as cli

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "train_realizable_layer.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--config", default=str(CONFIG))
    args = ap.parse_args()
    hits = 0
    with tempfile.TemporaryDirectory() as tmp:
        for seed in range(args.seeds):
            out = Path(tmp) / str(seed)
            cli(["train", "--config", args.config, "--out", str(out), "--seed", str(seed), "--quiet"])
            _, meta = io.load_checkpoint(out / "checkpoint.json")
            hits += meta["final_loss"] <= 1e-3
            print(f"seed {seed}: final loss {meta['final_loss']:.3e} after {meta['iterations']} iterations")
    print(f"{hits}/{args.seeds} seeds reached 1e-3")


if __name__ == "__main__":
    main()
