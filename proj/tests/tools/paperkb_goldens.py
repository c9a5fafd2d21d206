#!/usr/bin/env python3
"""Brute-force goldens for the paperkb-u fixture.

Enumerates all 2^6 disorder states under the leak-free noisy-OR model and
prints the probabilities that the C++ tests freeze. Independent of the C++
engine: no inclusion-exclusion, plain definition-level sums.
"""
from fractions import Fraction
from itertools import product

effects = {
    "d1": ["s2", "s3", "s7"],
    "d2": ["s1", "s2", "s4", "s5", "s6"],
    "d3": ["s2", "s3", "s6"],
    "d4": ["s1", "s4", "s5"],
    "d5": ["s1", "s3", "s6"],
    "d6": ["s4", "s7"],
}
disorders = list(effects)
symptoms = [f"s{i}" for i in range(1, 8)]
prior = Fraction(1, 10)
strength = Fraction(9, 10)


def c(d, s):
    return strength if s in effects[d] else Fraction(0)


def states():
    for bits in product([0, 1], repeat=len(disorders)):
        present = {d for d, b in zip(disorders, bits) if b}
        w = Fraction(1)
        for d in disorders:
            w *= prior if d in present else 1 - prior
        yield present, w


def likelihood(present, pos, neg):
    w = Fraction(1)
    for s in pos:
        fail = Fraction(1)
        for d in present:
            fail *= 1 - c(d, s)
        w *= 1 - fail
    for s in neg:
        for d in present:
            w *= 1 - c(d, s)
    return w


def joint(event, pos, neg):
    return sum((w * likelihood(p, pos, neg) for p, w in states() if event(p)), Fraction(0))


def clustering_event(diffs):
    return lambda present: all(present & set(dd) for dd in diffs)


def causes(s):
    return {d for d in disorders if c(d, s) > 0}


def partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def rgs_partitions(items):
    # restricted growth string order
    n = len(items)
    a = [0] * n

    def rec(i, m):
        if i == n:
            blocks = [[] for _ in range(m)]
            for k, b in enumerate(a):
                blocks[b].append(items[k])
            yield blocks
            return
        for v in range(m + 1):
            a[i] = v
            yield from rec(i + 1, max(m, v + 1))

    yield from rec(1, 1) if n else iter([[]])


def fmt(x):
    return f"{float(x):.17g}"


reference = [["d2", "d4"], ["d1", "d3"]]
P = ["s1", "s2", "s3", "s4"]
print("joint_absent_and_cands(reference, N'={})", fmt(joint(clustering_event(reference), [], [])))
num = joint(clustering_event(reference), P, [])
den = joint(lambda p: True, P, [])
print("numerator(reference, P=s1..s4)", fmt(num))
print("evidence(P=s1..s4)", fmt(den))
print("posterior(reference, P=s1..s4)", fmt(num / den))
num5 = joint(clustering_event(reference), P, ["s5"])
den5 = joint(lambda p: True, P, ["s5"])
print("numerator(reference, P=s1..s4, N=s5)", fmt(num5))
print("evidence(P=s1..s4, N=s5)", fmt(den5))
print("posterior(reference, P=s1..s4, N=s5)", fmt(num5 / den5))

print("# all clusterings of P=s1..s4 in RGS order with posteriors")
for blocks in rgs_partitions(P):
    diffs = [set.intersection(*(causes(s) for s in b)) for b in blocks]
    if any(not d for d in diffs):
        continue
    if any(diffs[i] & diffs[j] for i in range(len(diffs)) for j in range(i + 1, len(diffs))):
        continue
    sig = " | ".join(",".join(b) + "<-" + ",".join(sorted(d)) for b, d in zip(blocks, diffs))
    post = joint(clustering_event([sorted(d) for d in diffs]), P, []) / den
    print(sig, fmt(post))

print("# minimal candidates for s1..s4 with candidate_present posteriors")
from itertools import combinations
cov = []
for k in range(1, 7):
    for comb in combinations(disorders, k):
        covered = set().union(*(effects[d] for d in comb))
        if set(P) <= covered and not any(set(m) <= set(comb) for m in cov):
            cov.append(comb)
for m in cov:
    post = joint(lambda p, m=m: set(m) <= p, P, []) / den
    print(",".join(m), fmt(post))
