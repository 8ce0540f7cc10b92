#!/usr/bin/env python3
"""Write a synthetic .wav sample library to disk, for trying the CLI and the
study server without any external dataset.

Example:
    python scripts/build_demo_library.py --out demo-library --n 48
    timbrespace serve --library demo-library --port 8000
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from timbrespace.dataset import write_wav
from timbrespace.simulate import demo_library


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo-library")
    parser.add_argument("--n", type=int, default=48)
    parser.add_argument("--duration", type=float, default=4.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    library = demo_library(n=args.n, duration=args.duration, seed=args.seed)
    for sample in library:
        write_wav(out / f"{sample.id}.wav", sample)
    print(f"wrote {len(library)} samples to {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
