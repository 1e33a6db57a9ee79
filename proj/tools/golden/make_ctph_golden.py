#!/usr/bin/env python3
"""Regenerate tests/data/ctph_golden.txt.

The corpus is synthesized from SplitMix64 streams; tests/support/golden_corpus.hpp
rebuilds the exact same bytes in C++. Signatures and scores come from an
external reference implementation invoked through a small driver program:

    <driver> hash FILE...       one "bs:digest:digest" per file
    <driver> cmp                reads signature pairs from stdin, prints scores

ssdeep_driver.c next to this script is such a driver; build it against the
libfuzzy sources of ssdeep 2.14.1 (fuzzy.c, edit_dist.c).
"""
import argparse
import os
import subprocess
import sys
import tempfile

import numpy as np

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def __call__(self):
        self.state = (self.state + GAMMA) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def many(self, n):
        k = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + k * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * GAMMA) & MASK
        return z


BASE_COUNT = 100
TINY_COUNT = 64
MIN_SIZE = 1024
MAX_SIZE = 256 * 1024
PERIOD = 509


def base_file(i):
    rng = SplitMix64(0x5EED0000 + i)
    size = MIN_SIZE + rng() % (MAX_SIZE - MIN_SIZE + 1)
    kind = i % 4
    if kind == 0:
        return (rng.many(size) & np.uint64(0xFF)).astype(np.uint8).tobytes()
    if kind == 1:
        return (np.uint64(0x61) + rng.many(size) % np.uint64(4)).astype(np.uint8).tobytes()
    if kind == 2:
        out = bytearray()
        while len(out) < size:
            v = rng()
            run = 1 + (v >> 8) % 64
            out += bytes([v & 0xFF]) * min(run, size - len(out))
        return bytes(out)
    block = (rng.many(PERIOD) & np.uint64(0xFF)).astype(np.uint8)
    v = rng.many(size)
    data = block[np.arange(size) % PERIOD]
    noisy = (v % np.uint64(61)) == 0
    data[noisy] = ((v[noisy] >> np.uint64(8)) & np.uint64(0xFF)).astype(np.uint8)
    return data.tobytes()


def mutant_file(i, base):
    rng = SplitMix64(0xED170000 + i)
    data = bytearray(base)
    pct = 1 + rng() % 5
    edits = max(1, len(data) * pct // 100)
    bursts = 1 + rng() % 4
    for b in range(bursts):
        blen = edits // bursts + (1 if b < edits % bursts else 0)
        start = rng() % (len(data) - blen + 1)
        noise = (rng.many(blen) >> np.uint64(32)) & np.uint64(0xFF)
        data[start:start + blen] = noise.astype(np.uint8).tobytes()
    indels = rng() % 9
    for _ in range(indels):
        v = rng()
        pos = (v >> 8) % len(data)
        seglen = 1 + (v >> 32) % 16
        if (v >> 16) & 1:
            data[pos:pos] = bytes(((v >> 40) + k) & 0xFF for k in range(seglen))
        else:
            del data[pos:pos + seglen]
    return bytes(data)


def tiny_file(t):
    rng = SplitMix64(0x71790000 + t)
    size = t * 5
    if t % 8 == 3:
        return bytes(size)
    data = bytearray(int(x) & 0xFF for x in rng.many(size))
    if t % 8 == 7:
        for k in range(max(0, size - 8), size):
            data[k] = 0
    return bytes(data)


def corpus():
    files = {}
    for i in range(BASE_COUNT):
        b = base_file(i)
        files[("base", i)] = b
        files[("mut", i)] = mutant_file(i, b)
        files[("half", i)] = b[: len(b) // 2]
    for t in range(TINY_COUNT):
        files[("tiny", t)] = tiny_file(t)
    return files


def pairs():
    out = []
    for i in range(BASE_COUNT):
        out += [(("base", i), ("mut", i)), (("mut", i), ("base", i)),
                (("base", i), ("half", i)), (("half", i), ("base", i)),
                (("base", i), ("base", (i + 1) % BASE_COUNT)),
                (("mut", i), ("half", i))]
    for t in range(TINY_COUNT):
        out += [(("tiny", t), ("tiny", t)), (("tiny", t), ("tiny", (t + 1) % TINY_COUNT))]
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--oracle", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    files = corpus()
    keys = sorted(files)
    with tempfile.TemporaryDirectory() as tmp:
        paths = []
        for k in keys:
            p = os.path.join(tmp, f"{k[0]}_{k[1]}")
            with open(p, "wb") as fh:
                fh.write(files[k])
            paths.append(p)
        res = subprocess.run([args.oracle, "hash", *paths], check=True,
                             capture_output=True, text=True)
    sigs = dict(zip(keys, res.stdout.split()))

    def empty(sig):
        return sig.split(":")[1] == ""

    cmp_pairs = [p for p in pairs() if not (empty(sigs[p[0]]) and empty(sigs[p[1]]))]
    stdin = "".join(f"{sigs[a]}\n{sigs[b]}\n" for a, b in cmp_pairs)
    res = subprocess.run([args.oracle, "cmp"], input=stdin, check=True,
                         capture_output=True, text=True)
    scores = [int(s) for s in res.stdout.split()]

    with open(args.out, "w") as fh:
        fh.write("# CTPH golden vectors: ssdeep 2.14.1 (libfuzzy), corpus per make_ctph_golden.py\n")
        fh.write("# sig <set> <index> <size> <signature>\n")
        fh.write("# cmp <set> <index> <set> <index> <score>\n")
        for k in keys:
            fh.write(f"sig {k[0]} {k[1]} {len(files[k])} {sigs[k]}\n")
        for (a, b), s in zip(cmp_pairs, scores):
            fh.write(f"cmp {a[0]} {a[1]} {b[0]} {b[1]} {s}\n")
    print(f"{len(keys)} signatures, {len(scores)} comparisons", file=sys.stderr)


if __name__ == "__main__":
    main()
