"""Independent brute-force reference implementations used by the tests.

Written without reference to the package code: exact rational arithmetic
where possible and the most literal reading of each definition.
"""

import itertools
import math
from fractions import Fraction


def avg_ranks(xs):
    # rank of x = 1 + #smaller + (#equal - 1) / 2
    out = []
    for x in xs:
        smaller = sum(1 for y in xs if y < x)
        equal = sum(1 for y in xs if y == x)
        out.append(Fraction(2 * smaller + equal + 1, 2))
    return out


def pearson_exact(xs, ys):
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    # rho^2 exact, sign from sxy
    r2 = sxy * sxy / (sxx * syy)
    return math.copysign(math.sqrt(r2), sxy) if sxy != 0 else 0.0


def spearman_oracle(xs, ys):
    return pearson_exact(avg_ranks(xs), avg_ranks(ys))


def skewness_oracle(xs, adjusted=True):
    xs = [Fraction(x) for x in xs]
    n = len(xs)
    mean = sum(xs) / n
    m2 = sum((x - mean) ** 2 for x in xs) / n
    m3 = sum((x - mean) ** 3 for x in xs) / n
    b1 = float(m3) / float(m2) ** 1.5
    if adjusted:
        return b1 * math.sqrt(n * (n - 1)) / (n - 2)
    return b1


def exact_p_oracle(xs, ys):
    """Two-sided permutation p for Spearman by full enumeration."""
    rx, ry = avg_ranks(xs), avg_ranks(ys)
    n = len(xs)
    mean = Fraction(n + 1, 2)
    stat = abs(sum((a - mean) * (b - mean) for a, b in zip(rx, ry)))
    hits = total = 0
    for perm in itertools.permutations(ry):
        s = abs(sum((a - mean) * (b - mean) for a, b in zip(rx, perm)))
        hits += s >= stat
        total += 1
    return hits / total


def hazen_oracle(xs):
    n = len(xs)
    return [float(100 * (r - Fraction(1, 2)) / n) for r in avg_ranks(xs)]


def preference_oracle(counts):
    rows = [sum(r) for r in counts]
    cols = [sum(c) for c in zip(*counts)]
    total = sum(rows)
    return [[Fraction(counts[i][j], cols[j]) / Fraction(rows[i], total)
             if cols[j] and rows[i] else None for j in range(len(cols))]
            for i in range(len(rows))]
