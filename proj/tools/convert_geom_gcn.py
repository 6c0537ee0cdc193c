#!/usr/bin/env python3
"""Convert a Geom-GCN style raw dataset directory into `glinkx ingest` inputs.

Expected layout (as distributed for chameleon / squirrel / film / ...):

    out1_graph_edges.txt          header, then "src<TAB>dst"
    out1_node_feature_label.txt   header, then "id<TAB>f1,f2,...<TAB>label"
    <name>_split_0.6_0.2_<k>.npz  train_mask / val_mask / test_mask

Writes edges.tsv, features.tsv, labels.tsv and split_<k>.tsv into --out and
prints the matching ingest command line.
"""

import argparse
import glob
import os
import re
import sys

import numpy as np


def read_rows(path):
    with open(path) as f:
        next(f)  # header
        for line in f:
            line = line.rstrip("\n")
            if line:
                yield line.split("\t")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("raw", help="directory with out1_*.txt files")
    ap.add_argument("--splits", help="directory with *_split_*.npz files (default: raw)")
    ap.add_argument("--name", default=None, help="dataset name used in the split file names")
    ap.add_argument("--out", required=True)
    ap.add_argument("--film", action="store_true", help="features are index lists of nonzero entries (film)")
    ap.add_argument("--film-dim", type=int, default=932)
    args = ap.parse_args(argv)

    os.makedirs(args.out, exist_ok=True)
    nodes = {}
    for node, feat, label in read_rows(os.path.join(args.raw, "out1_node_feature_label.txt")):
        if args.film:
            x = np.zeros(args.film_dim)
            x[np.array(feat.split(","), dtype=np.int64)] = 1
        else:
            x = np.array(feat.split(","), dtype=np.float64)
        nodes[int(node)] = (x, int(label))
    ids = sorted(nodes)
    if ids != list(range(len(ids))):
        sys.exit("node ids are not 0..n-1")

    with open(os.path.join(args.out, "labels.tsv"), "w") as f:
        for v in ids:
            f.write(f"{v}\t{nodes[v][1]}\n")
    with open(os.path.join(args.out, "features.tsv"), "w") as f:
        for v in ids:
            f.write(f"{v}\t" + " ".join(f"{a:g}" for a in nodes[v][0]) + "\n")
    m = 0
    with open(os.path.join(args.out, "edges.tsv"), "w") as f:
        for src, dst in read_rows(os.path.join(args.raw, "out1_graph_edges.txt")):
            f.write(f"{src}\t{dst}\n")
            m += 1

    split_dir = args.splits or args.raw
    pattern = f"{args.name}_split_*.npz" if args.name else "*_split_*.npz"
    files = glob.glob(os.path.join(split_dir, pattern))
    files.sort(key=lambda p: int(re.search(r"_(\d+)\.npz$", p).group(1)))
    split_args = []
    for k, path in enumerate(files):
        z = np.load(path)
        train, valid, test = (z[key].astype(bool) for key in ("train_mask", "val_mask", "test_mask"))
        if len(train) != len(ids):
            sys.exit(f"{path}: mask length {len(train)} != n={len(ids)}")
        if np.any(train.astype(int) + valid + test != 1):
            sys.exit(f"{path}: masks do not partition the nodes")
        out = os.path.join(args.out, f"split_{k}.tsv")
        with open(out, "w") as f:
            for v in ids:
                f.write(f"{v}\t{'train' if train[v] else 'valid' if valid[v] else 'test'}\n")
        split_args += ["--split", out]

    print(f"{len(ids)} nodes, {m} edges, {len(files)} splits", file=sys.stderr)
    d = args.out
    print(" ".join(["glinkx", "ingest", "--edges", f"{d}/edges.tsv", "--features", f"{d}/features.tsv",
                    "--labels", f"{d}/labels.tsv", *split_args, "--name", args.name or "geom-gcn",
                    "--out", f"{d}/bundle"]))


if __name__ == "__main__":
    main()
