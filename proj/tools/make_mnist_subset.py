#!/usr/bin/env python3
"""Write a 10,000-digit MNIST subset as IDX files.

The digits come from the npm `mnist` package, which ships 10,000 binarized
28x28 MNIST digits as JSON. They are shuffled with a fixed seed and written
as train-images-idx3-ubyte / train-labels-idx1-ubyte (pixels 0 or 255).

    tools/make_mnist_subset.py [--package DIR] [--out data/mnist]

Without --package the script runs `npm pack mnist` in a temporary directory.
If you have the official MNIST files, point the configs at them instead.
"""

import argparse
import json
import random
import struct
import subprocess
import tarfile
import tempfile
from pathlib import Path

SIDE = 28


def fetch_package(workdir: Path) -> Path:
    out = subprocess.run(["npm", "pack", "mnist", "--silent"], cwd=workdir, check=True,
                         capture_output=True, text=True).stdout.strip().splitlines()[-1]
    with tarfile.open(workdir / out) as tar:
        tar.extractall(workdir)
    return workdir / "package"


def load_digits(package: Path):
    records = []
    for digit in range(10):
        flat = json.loads((package / "src" / "digits" / f"{digit}.json").read_text())["data"]
        if len(flat) % (SIDE * SIDE):
            raise SystemExit(f"digit {digit}: {len(flat)} values is not a multiple of 784")
        for start in range(0, len(flat), SIDE * SIDE):
            pixels = bytes(255 if v else 0 for v in flat[start:start + SIDE * SIDE])
            records.append((digit, pixels))
    return records


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--package", type=Path, help="unpacked npm mnist package directory")
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "mnist")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        package = args.package or fetch_package(Path(tmp))
        records = load_digits(package)

    random.Random(args.seed).shuffle(records)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "train-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(records), SIDE, SIDE))
        for _, pixels in records:
            f.write(pixels)
    with open(args.out / "train-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(records)))
        f.write(bytes(label for label, _ in records))
    print(f"wrote {len(records)} digits to {args.out}")


if __name__ == "__main__":
    main()
