"""Non-adaptive server selection: random, round-robin and BIBD block cycling."""

from __future__ import annotations

import enum

import numpy as np

from redsim.designs import Design, bibd_order, build_design, verify_bibd
from redsim.errors import InvalidParameter


class PolicyKind(str, enum.Enum):
    RANDOM = "random"
    ROUND_ROBIN = "round-robin"
    BIBD = "bibd"

    @classmethod
    def parse(cls, value: "PolicyKind | str") -> "PolicyKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"rr": "round-robin", "roundrobin": "round-robin"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidParameter(f"unknown policy {value!r}") from None


def random_subsets(rng: np.random.Generator, n: int, r: int, count: int) -> np.ndarray:
    """Draw ``count`` uniform r-subsets of ``range(n)`` by partial Fisher-Yates.

    Row-wise vectorised: step j swaps column j with a uniform column in j..n-1.
    """
    perm = np.tile(np.arange(n, dtype=np.int64), (count, 1))
    rows = np.arange(count)
    for j in range(r):
        k = j + rng.integers(0, n - j, size=count)
        head = perm[rows, j].copy()
        perm[rows, j] = perm[rows, k]
        perm[rows, k] = head
    return perm[:, :r].copy()


class PolicyState:
    """Stateful selector producing one r-subset of servers per job.

    Not thread-safe; every replication should build its own state.
    """

    def __init__(
        self,
        kind: PolicyKind,
        n: int,
        r: int,
        seed: int | np.random.SeedSequence | None = 0,
        design: Design | None = None,
    ):
        self.kind = kind
        self.n = n
        self.r = r
        self.counter = 0
        self.design = design
        self.rng = np.random.default_rng(seed) if kind is PolicyKind.RANDOM else None
        if design is not None:
            self._blocks = np.asarray(design.blocks, dtype=np.int64)

    def next_selection(self) -> tuple[int, ...]:
        """Servers for the next job, in copy order ``j = 1..r``."""
        n, r, i = self.n, self.r, self.counter
        if self.kind is PolicyKind.RANDOM:
            pool = list(range(n))
            for j in range(r):
                k = j + int(self.rng.integers(0, n - j))
                pool[j], pool[k] = pool[k], pool[j]
            sel = tuple(pool[:r])
        elif self.kind is PolicyKind.ROUND_ROBIN:
            sel = tuple((i * r + j) % n for j in range(r))
        else:
            sel = self.design.blocks[i % n]
        self.counter += 1
        return sel

    def draw(self, count: int) -> np.ndarray:
        """Selections for the next ``count`` jobs as a ``(count, r)`` int array.

        The cyclic policies match ``count`` calls of :meth:`next_selection`
        exactly. Random draws the same distribution through a vectorised
        stream, so mixing the two methods on one state gives a different
        (equally valid) sequence.
        """
        n, r = self.n, self.r
        idx = self.counter + np.arange(count, dtype=np.int64)
        if self.kind is PolicyKind.RANDOM:
            out = random_subsets(self.rng, n, r, count)
        elif self.kind is PolicyKind.ROUND_ROBIN:
            out = (idx[:, None] * r + np.arange(r)) % n
        else:
            out = self._blocks[idx % n]
        self.counter += count
        return out


def new_policy(
    kind: PolicyKind | str,
    n: int,
    r: int,
    seed: int | np.random.SeedSequence | None = 0,
    design: Design | None = None,
) -> PolicyState:
    """Build a fresh policy state with ``counter = 0``.

    For BIBD the cyclic design for ``r`` is constructed unless one is passed in;
    a supplied design must be a verified (n, r, 1) design.
    """
    kind = PolicyKind.parse(kind)
    if not (1 <= r <= n):
        raise InvalidParameter(f"need 1 <= r <= n, got n={n}, r={r}")
    if kind is PolicyKind.BIBD:
        if r < 2 or n != bibd_order(r):
            raise InvalidParameter(f"bibd policy needs n = r(r-1)+1, got n={n}, r={r}")
        if design is None:
            design = build_design(r)
        elif design.n != n or design.r != r or not verify_bibd(design, 1).ok:
            raise InvalidParameter("supplied design is not a verified (n, r, 1) design")
    return PolicyState(kind, n, r, seed=seed, design=design if kind is PolicyKind.BIBD else None)
