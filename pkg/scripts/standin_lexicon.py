#!/usr/bin/env python3
"""Build a NETtalk-format stand-in lexicon from CMUdict.

Only for benchmarking and smoke runs when the NETtalk file is unavailable:
accuracies on it are NOT comparable with published NETtalk figures.

Each ARPAbet phone is mapped to one character, then words are aligned one
letter to one symbol by hard (Viterbi) EM: a letter emits one phone, a null
``-``, or a phone pair that gets its own compound symbol (like NETtalk's
``X`` for /ks/).  Needs the ``cmudict`` package.

    python scripts/standin_lexicon.py --out data/standin.data --every 6
"""

import argparse
import math
import string
from collections import Counter

PHONES = {
    "AA": "a", "AE": "@", "AH": "^", "AO": "c", "AW": "W", "AY": "A", "B": "b", "CH": "C",
    "D": "d", "DH": "D", "EH": "E", "ER": "R", "EY": "e", "F": "f", "G": "g", "HH": "h",
    "IH": "I", "IY": "i", "JH": "J", "K": "k", "L": "l", "M": "m", "N": "n", "NG": "G",
    "OW": "o", "OY": "O", "P": "p", "R": "r", "S": "s", "SH": "S", "T": "t", "TH": "T",
    "UH": "U", "UW": "u", "V": "v", "W": "w", "Y": "y", "Z": "z", "ZH": "Z",
}
SPARE = [c for c in "XQKLMNYx!*+0123456789" if c not in PHONES.values()]


def align(word, phones, score, pair_ok):
    """Best one-to-one alignment; returns list of per-letter outputs or None."""
    n, m = len(word), len(phones)
    NEG = -1e18
    best = [[NEG] * (m + 1) for _ in range(n + 1)]
    back = [[None] * (m + 1) for _ in range(n + 1)]
    best[0][0] = 0.0
    for i in range(n):
        for j in range(m + 1):
            if best[i][j] == NEG:
                continue
            options = [("-", 0)]
            if j < m:
                options.append((phones[j], 1))
            if j + 1 < m and pair_ok(phones[j] + phones[j + 1]):
                options.append((phones[j] + phones[j + 1], 2))
            for out, k in options:
                s = best[i][j] + score(word[i], out)
                if s > best[i + 1][j + k]:
                    best[i + 1][j + k] = s
                    back[i + 1][j + k] = (j, out)
    if best[n][m] == NEG:
        return None
    outs, j = [], m
    for i in range(n, 0, -1):
        j, out = back[i][j]
        outs.append(out)
    return outs[::-1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--every", type=int, default=6, help="keep every k-th eligible word")
    ap.add_argument("--iterations", type=int, default=4)
    args = ap.parse_args()

    import cmudict

    raw = []
    for word, prons in sorted(cmudict.dict().items()):
        if not (2 <= len(word) <= 16) or not set(word) <= set(string.ascii_lowercase):
            continue
        phones = [PHONES[p.rstrip("012")] for p in prons[0]]
        if len(phones) > 2 * len(word):
            continue
        raw.append((word, phones))
    raw = raw[:: args.every]

    pairs = Counter()
    for word, phones in raw:
        if len(phones) > len(word):
            pairs.update(a + b for a, b in zip(phones, phones[1:]))
    compound = {p: c for (p, _), c in zip(pairs.most_common(len(SPARE)), SPARE)}

    counts = Counter()
    letter_tot = Counter()

    def score(letter, out):
        if not counts:
            return 0.0 if len(out) == 1 else (-1.0 if out == "-" else -3.0)
        return math.log((counts[letter, out] + 0.1) / (letter_tot[letter] + 10.0))

    aligned = []
    for _ in range(args.iterations):
        new_counts = Counter()
        aligned = []
        for word, phones in raw:
            outs = align(word, phones, score, compound.__contains__)
            if outs is None:
                continue
            aligned.append((word, outs))
            new_counts.update(zip(word, outs))
        counts = new_counts
        letter_tot = Counter()
        for (letter, _), c in counts.items():
            letter_tot[letter] += c

    with open(args.out, "w") as fh:
        for word, outs in aligned:
            pron = "".join(compound.get(o, o) for o in outs)
            fh.write(f"{word}\t{pron}\t0\t0\n")
    print(f"wrote {len(aligned)} entries to {args.out}")


if __name__ == "__main__":
    main()
