"""Symmetric (n, r, 1) block designs built from planar difference sets.

A design over the points ``0..n-1`` has ``n = r(r-1) + 1`` blocks of size ``r``
and covers every pair of distinct points exactly once. The construction here
searches for a planar difference set modulo ``n`` and develops it cyclically.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

from redsim.errors import InvalidParameter, NoDesignAvailable

# Lexicographically smallest planar difference sets, as returned by the search.
_KNOWN_DIFFERENCE_SETS: dict[int, tuple[int, ...]] = {
    2: (0, 1),
    3: (0, 1, 3),
    4: (0, 1, 3, 9),
    5: (0, 1, 4, 14, 16),
    6: (0, 1, 3, 8, 12, 18),
}


@dataclass(frozen=True)
class DifferenceSet:
    modulus: int
    residues: tuple[int, ...]

    def differences(self) -> Counter:
        """Multiset of ordered differences ``a - b (mod n)`` over ``a != b``."""
        n = self.modulus
        return Counter((a - b) % n for a in self.residues for b in self.residues if a != b)

    def is_planar(self) -> bool:
        diffs = self.differences()
        return set(diffs) == set(range(1, self.modulus)) and all(c == 1 for c in diffs.values())


@dataclass(frozen=True)
class Design:
    """A block design used as a schedule; ``blocks[i]`` is served to job ``i mod n``."""

    n: int
    r: int
    blocks: tuple[tuple[int, ...], ...]

    def point_counts(self) -> list[int]:
        counts = [0] * self.n
        for block in self.blocks:
            for point in block:
                if 0 <= point < self.n:
                    counts[point] += 1
        return counts


@dataclass
class BibdReport:
    ok: bool
    violations: list[str] = field(default_factory=list)


def bibd_order(r: int) -> int:
    """Number of points (and blocks) of a symmetric design with block size ``r``."""
    if r < 2:
        raise InvalidParameter(f"block size r must be >= 2, got {r}")
    return r * (r - 1) + 1


def _prime_power_base(m: int) -> int | None:
    """Return p if m == p**k for a prime p and k >= 1, else None."""
    if m < 2:
        return None
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            return p if m == 1 else None
        p += 1
    return m


def _search_difference_set(r: int, n: int) -> tuple[int, ...] | None:
    # Depth-first in increasing residue order, so the first hit is lexicographically smallest.
    used = [False] * n
    chosen = [0]

    def extend() -> bool:
        if len(chosen) == r:
            return True
        for cand in range(chosen[-1] + 1, n - (r - len(chosen)) + 1):
            new = []
            clash = False
            for d in chosen:
                for diff in ((cand - d) % n, (d - cand) % n):
                    if used[diff] or diff in new:
                        clash = True
                        break
                    new.append(diff)
                if clash:
                    break
            if clash:
                continue
            for diff in new:
                used[diff] = True
            chosen.append(cand)
            if extend():
                return True
            chosen.pop()
            for diff in new:
                used[diff] = False
        return False

    return tuple(chosen) if extend() else None


@lru_cache(maxsize=None)
def find_planar_difference_set(r: int) -> DifferenceSet:
    """Find the lexicographically smallest planar difference set of size ``r``.

    Such a set exists when ``r - 1`` is a prime power (Singer's theorem); the
    degenerate order-1 plane covers ``r = 2``. Other block sizes are rejected
    without searching.
    """
    n = bibd_order(r)
    if r in _KNOWN_DIFFERENCE_SETS:
        return DifferenceSet(n, _KNOWN_DIFFERENCE_SETS[r])
    if r != 2 and _prime_power_base(r - 1) is None:
        raise NoDesignAvailable(
            f"no planar difference set for r={r}: r-1={r - 1} is not a prime power"
        )
    residues = _search_difference_set(r, n)
    if residues is None:
        raise NoDesignAvailable(
            f"exhaustive search found no planar difference set of size {r} mod {n}"
        )
    return DifferenceSet(n, residues)


def develop_design(ds: DifferenceSet) -> Design:
    n = ds.modulus
    blocks = tuple(tuple(sorted((d + i) % n for d in ds.residues)) for i in range(n))
    design = Design(n=n, r=len(ds.residues), blocks=blocks)
    report = verify_bibd(design, 1)
    assert report.ok, f"cyclic development produced an invalid design: {report.violations}"
    return design


def build_design(r: int) -> Design:
    """Convenience: the cyclic (r(r-1)+1, r, 1) design for block size ``r``."""
    return develop_design(find_planar_difference_set(r))


def verify_bibd(d: Design, lam: int = 1) -> BibdReport:
    """Check the three block-design properties against ``lam``.

    Malformed input is reported, never raised: out-of-range points, repeated
    points, blocks of the wrong size, and every pair whose cover count differs
    from ``lam`` each produce one violation string.
    """
    violations: list[str] = []
    pair_counts: Counter = Counter()
    for i, block in enumerate(d.blocks):
        pts = list(block)
        bad = [p for p in pts if not (isinstance(p, int) and 0 <= p < d.n)]
        if bad:
            violations.append(f"block {i} has out-of-range points {bad}")
        if len(set(pts)) != len(pts):
            violations.append(f"block {i} repeats a point: {tuple(pts)}")
        if len(set(pts)) != d.r:
            violations.append(f"block {i} has {len(set(pts))} distinct points, expected {d.r}")
        for pair in combinations(sorted(set(p for p in pts if p not in bad)), 2):
            pair_counts[pair] += 1

    for pair in combinations(range(d.n), 2):
        count = pair_counts.get(pair, 0)
        if count != lam:
            kind = "uncovered" if count == 0 else "over-covered" if count > lam else "under-covered"
            violations.append(f"pair {pair} {kind}: in {count} blocks, expected {lam}")
    return BibdReport(ok=not violations, violations=violations)
