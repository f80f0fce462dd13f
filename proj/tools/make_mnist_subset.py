#!/usr/bin/env python3
"""Convert the digits bundled with the `mnist` npm package into gzipped IDX files.

The npm package (https://www.npmjs.com/package/mnist, MIT licensed) ships
10,000 MNIST digits as JSON arrays of pixel intensities divided by 255 and
rounded to three decimals, which is enough to recover the original uint8
pixels exactly.  The digits are shuffled with a fixed seed, stratified by
class, and split into train/test IDX files.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist-10k
"""

import argparse
import gzip
import json
import pathlib
import struct

import numpy as np


def write_idx(path, array, dtype_code):
    header = struct.pack(">BBBB", 0, 0, dtype_code, array.ndim)
    header += b"".join(struct.pack(">I", dim) for dim in array.shape)
    # mtime=0 keeps the archives byte-reproducible
    with gzip.GzipFile(path, "wb", mtime=0) as fh:
        fh.write(header)
        fh.write(array.astype(">u1").tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=pathlib.Path)
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--test-fraction", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=20180215)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    train_idx, test_idx = [], []
    images, labels = [], []
    for digit in range(10):
        rows = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        pix = np.rint(np.asarray(rows, dtype=np.float64).reshape(-1, 784) * 255.0)
        assert pix.min() >= 0 and pix.max() <= 255
        start = len(labels)
        images.append(pix.astype(np.uint8))
        labels.extend([digit] * len(pix))
        order = rng.permutation(len(pix)) + start
        n_test = int(round(len(pix) * args.test_fraction))
        test_idx.extend(order[:n_test])
        train_idx.extend(order[n_test:])

    images = np.vstack(images)
    labels = np.asarray(labels, dtype=np.uint8)
    train_idx = rng.permutation(np.asarray(train_idx))
    test_idx = rng.permutation(np.asarray(test_idx))

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for split, idx in (("train", train_idx), ("test", test_idx)):
        write_idx(args.out_dir / f"{split}-images-idx3-ubyte.gz",
                  images[idx].reshape(-1, 28, 28), 0x08)
        write_idx(args.out_dir / f"{split}-labels-idx1-ubyte.gz", labels[idx], 0x08)
        print(split, len(idx), np.bincount(labels[idx], minlength=10).tolist())


if __name__ == "__main__":
    main()
