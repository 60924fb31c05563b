"""Compare the compiled and pure-Python kernel backends on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each row reports the best wall time per backend and the speed-up; the
outputs of both backends are checked for equality before timing counts.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from shelogic import kernels
from shelogic.model import clique, nae
from shelogic.shop import _relation_arrays, enumerate_shops, shop_matrix
from shelogic.dsm import shop_space


def _best(fn, repeat: int):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _compose_case(n: int):
    images = np.ascontiguousarray(shop_matrix(n), dtype=np.int32)
    lookup = np.full(1 << (n * n), -1, dtype=np.int32)
    for i, s in enumerate(enumerate_shops(n)):
        lookup[kernels.shop_code(s.images, n)] = i
    return lambda mod: mod.compose_table(images, lookup)


def _close_case(n: int):
    space = shop_space(n)
    comp = space.comp
    ptr, idx = space.down
    ident = int(np.flatnonzero((space.images == (1 << np.arange(n))).all(axis=1))[0])

    def run(mod):
        sizes = []
        for i in range(space.size):
            member = np.zeros(space.size, dtype=np.uint8)
            mod.close(member, np.array([ident, i], dtype=np.int32), comp, ptr, idx)
            sizes.append(int(member.sum()))
        return np.array(sizes)

    return run


def _she_case(B):
    images = np.ascontiguousarray(shop_matrix(B.n), dtype=np.int32)
    (table, tuples), = _relation_arrays(B)
    return lambda mod: mod.she_filter(images, table, tuples, B.n)


CASES = [
    ("compose_table n=3 (265^2)", lambda: _compose_case(3)),
    ("close: 265 principal DSMs n=3", lambda: _close_case(3)),
    ("she_filter K4 (41503 shops)", lambda: _she_case(clique(4))),
    ("she_filter NAE on 3 (265 shops)", lambda: _she_case(nae(3))),
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    compiled = kernels.compiled_backend
    if compiled is None:
        print("compiled backend not built; run: python3 setup.py build_ext --inplace")
        return 1
    print(f"{'case':34s} {'cython':>10s} {'python':>10s} {'speed-up':>9s}")
    for name, make in CASES:
        fn = make()
        tc, oc = _best(lambda: fn(compiled), args.repeat)
        tp, op = _best(lambda: fn(kernels.python_backend), args.repeat)
        if not np.array_equal(np.asarray(oc), np.asarray(op)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        print(f"{name:34s} {tc:9.4f}s {tp:9.4f}s {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
