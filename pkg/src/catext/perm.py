"""Permutations as tuples of images, plus a total order on mixed identifiers.

A permutation ``s`` of ``range(n)`` is stored as ``s[i] = s(i)``.  Acting on a
list by ``s`` gives ``[xs[s[0]], ..., xs[s[n-1]]]``; this is the contravariant
convention, so ``permute(permute(xs, t), s) == permute(xs, compose(t, s))``.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence


def identity(n: int) -> tuple:
    return tuple(range(n))


def compose(s: Sequence[int], t: Sequence[int]) -> tuple:
    """``(s t)(i) = s(t(i))``."""
    return tuple(s[i] for i in t)


def inverse(s: Sequence[int]) -> tuple:
    inv = [0] * len(s)
    for i, si in enumerate(s):
        inv[si] = i
    return tuple(inv)


def permute(xs: Sequence, s: Sequence[int]) -> tuple:
    return tuple(xs[i] for i in s)


def is_permutation(s: Sequence[int], n: int | None = None) -> bool:
    if n is not None and len(s) != n:
        return False
    return sorted(s) == list(range(len(s)))


def transposition(n: int, i: int) -> tuple:
    """The adjacent transposition swapping ``i`` and ``i + 1``."""
    s = list(range(n))
    s[i], s[i + 1] = s[i + 1], s[i]
    return tuple(s)


def adjacent_transpositions(n: int) -> list:
    return [transposition(n, i) for i in range(n - 1)]


def all_perms(n: int) -> Iterable[tuple]:
    return itertools.permutations(range(n))


def block_perm(sizes: Sequence[int], s: Sequence[int]) -> tuple:
    """Permutation of a concatenation of blocks induced by permuting the blocks.

    Block ``j`` of the result is block ``s[j]`` of the original concatenation.
    """
    starts = list(itertools.accumulate([0, *sizes]))
    out = []
    for j in s:
        out.extend(range(starts[j], starts[j] + sizes[j]))
    return tuple(out)


def block_sum(perms: Sequence[Sequence[int]]) -> tuple:
    """The direct sum of permutations acting on consecutive blocks."""
    out = []
    off = 0
    for p in perms:
        out.extend(off + i for i in p)
        off += len(p)
    return tuple(out)


def okey(v):
    """Total order key on identifiers built from ints, strings and tuples."""
    if v is None:
        return (0,)
    if isinstance(v, bool):
        return (1, int(v))
    if isinstance(v, int):
        return (1, v)
    if isinstance(v, str):
        return (2, v)
    if isinstance(v, (tuple, list)):
        return (3, tuple(okey(x) for x in v))
    if isinstance(v, frozenset):
        return (4, tuple(sorted(okey(x) for x in v)))
    sk = getattr(v, "sort_key", None)
    if sk is not None:
        return (5, sk())
    return (6, repr(v))
