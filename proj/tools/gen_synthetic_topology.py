#!/usr/bin/env python3
"""Generate a synthetic qvpn-topology v1 file.

Nodes are scattered uniformly in a square; a Euclidean minimum spanning tree keeps the
graph connected and the shortest remaining node pairs are added until the requested link
count is reached. Fibre length is the straight-line distance times a detour factor.
"""
import argparse
import math
import random


def generate(nodes, links, side_km, detour, seed, prefix):
    rng = random.Random(seed)
    pos = [(rng.uniform(0, side_km), rng.uniform(0, side_km)) for _ in range(nodes)]
    dist = lambda i, j: math.dist(pos[i], pos[j])
    pairs = sorted((dist(i, j), i, j) for i in range(nodes) for j in range(i + 1, nodes))

    parent = list(range(nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    for d, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            chosen.append((i, j))
    for d, i, j in pairs:
        if len(chosen) >= links:
            break
        if (i, j) not in chosen:
            chosen.append((i, j))
    chosen.sort()

    lines = ["qvpn-topology v1", f"# synthetic: {nodes} nodes, {len(chosen)} links, seed {seed}",
             "param T 1e-06", "param beta 0.2", "param alpha 0.2"]
    for i, (x, y) in enumerate(pos):
        lines.append(f"node {prefix}{i:02d} {x:.1f} {y:.1f}")
    for i, j in chosen:
        lines.append(f"link {prefix}{i:02d} {prefix}{j:02d} {dist(i, j) * detour:.1f}")
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, required=True)
    ap.add_argument("--links", type=int, required=True)
    ap.add_argument("--side-km", type=float, default=200.0)
    ap.add_argument("--detour", type=float, default=1.2)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--prefix", default="n")
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    if args.links < args.nodes - 1:
        ap.error("--links must be at least nodes-1")
    text = generate(args.nodes, args.links, args.side_km, args.detour, args.seed, args.prefix)
    with open(args.out, "w") as f:
        f.write(text)


if __name__ == "__main__":
    main()
