"""Pure-Python implementations of the combinatorial kernels.

Signatures mirror ``_ckernels.pyx`` exactly; ``shelogic.kernels`` picks one
of the two at import time.  Shops are rows of image bitmasks, so a shop
on ``n`` elements is an int array of length ``n``.
"""

from __future__ import annotations

import numpy as np


def shop_code(images, n: int) -> int:
    code = 0
    for x in range(n):
        code |= int(images[x]) << (n * x)
    return code


def compose_table(images: np.ndarray, lookup: np.ndarray) -> np.ndarray:
    """``table[i, j]`` is the index of ``images[i] o images[j]``."""
    m, n = images.shape
    rows = [[int(v) for v in row] for row in images]
    table = np.empty((m, m), dtype=np.int32)
    for i in range(m):
        g = rows[i]
        for j in range(m):
            f = rows[j]
            code = 0
            for x in range(n):
                fx = f[x]
                acc = 0
                y = 0
                while fx:
                    if fx & 1:
                        acc |= g[y]
                    fx >>= 1
                    y += 1
                code |= acc << (n * x)
            table[i, j] = lookup[code]
    return table


_LIST_CACHE: dict[int, tuple[np.ndarray, list, list]] = {}


def _as_lists(comp: np.ndarray) -> tuple[list, list]:
    hit = _LIST_CACHE.get(id(comp))
    if hit is None or hit[0] is not comp:
        hit = (comp, comp.tolist(), comp.T.tolist())
        _LIST_CACHE[id(comp)] = hit
    return hit[1], hit[2]


def close(member: np.ndarray, seeds: np.ndarray, comp: np.ndarray,
          down_ptr: np.ndarray, down_idx: np.ndarray) -> int:
    """Close ``member`` in place under composition and sub-shops.

    ``member`` must already be closed; ``seeds`` are the new elements.
    Returns the number of elements added.
    """
    rows, cols = _as_lists(comp)
    flags = member.tolist()
    ptr = down_ptr.tolist()
    down = down_idx.tolist()
    inside = [i for i, v in enumerate(flags) if v]
    stack = [int(s) for s in seeds]
    added = 0
    while stack:
        x = stack.pop()
        if flags[x]:
            continue
        flags[x] = 1
        inside.append(x)
        added += 1
        stack.extend(d for d in down[ptr[x]:ptr[x + 1]] if not flags[d])
        row = rows[x]
        col = cols[x]
        for y in inside:
            a = row[y]
            if not flags[a]:
                stack.append(a)
            b = col[y]
            if not flags[b]:
                stack.append(b)
    member[:] = flags
    return added


def she_filter(images: np.ndarray, table: np.ndarray, tuples: np.ndarray,
               n: int) -> np.ndarray:
    """Flag the rows of ``images`` that preserve one relation.

    ``table`` is the relation's dense indicator over ``n ** arity`` cells
    (first coordinate most significant); ``tuples`` lists its members.
    """
    m = images.shape[0]
    t, arity = tuples.shape
    elems = [[y for y in range(n) if (int(mask) >> y) & 1] for mask in range(1 << n)]
    out = np.ones(m, dtype=np.uint8)
    for i in range(m):
        row = images[i]
        ok = True
        for j in range(t):
            choices = [elems[int(row[int(tuples[j, p])])] for p in range(arity)]
            codes = [0]
            for opts in choices:
                codes = [c * n + y for c in codes for y in opts]
            for c in codes:
                if not table[c]:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            out[i] = 0
    return out
