"""Set partitions of mode labels, generated as restricted growth strings."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class InvalidPartitionError(ValueError):
    pass


@dataclass(frozen=True)
class ModePartition:
    """Disjoint blocks of 1-based mode labels covering ``1..n_modes``."""

    blocks: tuple[tuple[int, ...], ...]
    forced_singletons: frozenset[int] = frozenset()

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(m) for m in b)) for b in self.blocks)
        blocks = tuple(sorted(blocks))
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "forced_singletons", frozenset(int(m) for m in self.forced_singletons))
        seen: list[int] = [m for b in blocks for m in b]
        if any(len(b) == 0 for b in blocks) or not blocks:
            raise InvalidPartitionError("blocks must be non-empty")
        if len(seen) != len(set(seen)):
            raise InvalidPartitionError(f"blocks overlap: {blocks}")
        if sorted(seen) != list(range(1, len(seen) + 1)):
            raise InvalidPartitionError(f"blocks do not cover 1..{len(seen)}: {blocks}")
        for f in self.forced_singletons:
            if (f,) not in blocks:
                raise InvalidPartitionError(f"mode {f} must form its own block")

    @property
    def n_modes(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    @classmethod
    def parse(cls, text: str, forced_singletons: Iterable[int] = ()) -> "ModePartition":
        """Parse ``"1,2,3|4"`` style notation."""
        try:
            blocks = [tuple(int(t) for t in part.split(",") if t.strip())
                      for part in text.split("|")]
        except ValueError as exc:
            raise InvalidPartitionError(f"cannot parse partition {text!r}") from exc
        return cls(tuple(blocks), frozenset(forced_singletons))

    @classmethod
    def singletons(cls, n_modes: int) -> "ModePartition":
        return cls(tuple((m,) for m in range(1, n_modes + 1)))


def restricted_growth_strings(n: int) -> Iterator[list[int]]:
    """All restricted growth strings of length ``n`` in lexicographic order."""
    if n == 0:
        yield []
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield list(a)
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = max(b[j - 1], a[j - 1] + 1)


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    for rgs in restricted_growth_strings(len(items)):
        blocks: list[list[int]] = [[] for _ in range(max(rgs, default=-1) + 1)]
        for item, label in zip(items, rgs):
            blocks[label].append(item)
        yield blocks


def enumerate_partitions(n_modes: int, min_blocks: int = 2,
                         forced_singletons: Iterable[int] = (),
                         max_blocks: int | None = None) -> list[ModePartition]:
    """Partitions of ``1..n_modes`` with each forced mode kept alone.

    ``min_blocks``/``max_blocks`` count the blocks formed by the free (not
    forced) modes; forced singletons are appended to every partition. The
    order follows the restricted growth strings of the free modes.
    """
    forced = frozenset(int(f) for f in forced_singletons)
    for f in forced:
        if not 1 <= f <= n_modes:
            raise InvalidPartitionError(f"forced singleton {f} outside 1..{n_modes}")
    free = [m for m in range(1, n_modes + 1) if m not in forced]
    if not 1 <= min_blocks <= max(len(free), 1):
        raise InvalidPartitionError(
            f"min_blocks={min_blocks} impossible with {len(free)} free modes")
    out = []
    for blocks in set_partitions(free):
        k = len(blocks)
        if k < min_blocks or (max_blocks is not None and k > max_blocks):
            continue
        out.append(ModePartition(tuple(map(tuple, blocks)) + tuple((f,) for f in sorted(forced)),
                                 forced))
    return out


def bipartitions(modes: Sequence[int]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The ``2^(n-1) - 1`` unordered cuts ``A|B``; ``A`` always holds ``modes[0]``."""
    modes = list(modes)
    out = []
    for blocks in set_partitions(modes):
        if len(blocks) == 2:
            out.append((tuple(blocks[0]), tuple(blocks[1])))
    return out
