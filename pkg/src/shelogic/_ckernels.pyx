# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, realloc

cnp.import_array()


def shop_code(images, int n):
    cdef long code = 0
    cdef int x
    for x in range(n):
        code |= (<long>images[x]) << (n * x)
    return code


def compose_table(const cnp.int32_t[:, ::1] images, const cnp.int32_t[::1] lookup):
    cdef Py_ssize_t m = images.shape[0]
    cdef int n = images.shape[1]
    cdef Py_ssize_t i, j
    cdef int x, y, fx, acc
    cdef long code
    out = np.empty((m, m), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] table = out
    for i in range(m):
        for j in range(m):
            code = 0
            for x in range(n):
                fx = images[j, x]
                acc = 0
                y = 0
                while fx:
                    if fx & 1:
                        acc |= images[i, y]
                    fx >>= 1
                    y += 1
                code |= (<long>acc) << (n * x)
            table[i, j] = lookup[code]
    return out


def close(cnp.uint8_t[::1] member, const cnp.int32_t[::1] seeds,
          const cnp.int32_t[:, ::1] comp, const cnp.int32_t[::1] down_ptr,
          const cnp.int32_t[::1] down_idx):
    cdef Py_ssize_t m = member.shape[0]
    cdef Py_ssize_t cap = m * 2 + seeds.shape[0] + down_idx.shape[0] + 16
    cdef int *inside = <int *> malloc(m * sizeof(int))
    cdef int *stack = <int *> malloc(cap * sizeof(int))
    cdef Py_ssize_t n_inside = 0, top = 0, k, q
    cdef int x, y, a, b, d
    cdef int added = 0
    if inside == NULL or stack == NULL:
        free(inside)
        free(stack)
        raise MemoryError()
    try:
        for k in range(m):
            if member[k]:
                inside[n_inside] = <int>k
                n_inside += 1
        for k in range(seeds.shape[0]):
            stack[top] = seeds[k]
            top += 1
        while top > 0:
            top -= 1
            x = stack[top]
            if member[x]:
                continue
            member[x] = 1
            inside[n_inside] = x
            n_inside += 1
            added += 1
            # pushes this round are bounded by the down-set plus 2 * n_inside
            if top + 2 * n_inside + (down_ptr[x + 1] - down_ptr[x]) >= cap:
                cap = 2 * cap + 2 * n_inside + (down_ptr[x + 1] - down_ptr[x])
                stack = _grow(stack, cap)
            for k in range(down_ptr[x], down_ptr[x + 1]):
                d = down_idx[k]
                if not member[d]:
                    stack[top] = d
                    top += 1
            for q in range(n_inside):
                y = inside[q]
                a = comp[x, y]
                if not member[a]:
                    stack[top] = a
                    top += 1
                b = comp[y, x]
                if not member[b]:
                    stack[top] = b
                    top += 1
    finally:
        free(inside)
        free(stack)
    return added


cdef int *_grow(int *buf, Py_ssize_t cap) except NULL:
    cdef int *out = <int *> realloc(buf, cap * sizeof(int))
    if out == NULL:
        raise MemoryError()
    return out


def she_filter(const cnp.int32_t[:, ::1] images, const cnp.uint8_t[::1] table,
               const cnp.int32_t[:, ::1] tuples, int n):
    cdef Py_ssize_t m = images.shape[0]
    cdef Py_ssize_t t = tuples.shape[0]
    cdef int arity = tuples.shape[1]
    cdef Py_ssize_t i, j
    cdef int p, code, mask
    cdef bint ok, carry
    cdef int cur[16]
    out = np.ones(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] res = out
    if arity > 16:
        raise ValueError("arity above 16 is not supported")
    for i in range(m):
        ok = True
        for j in range(t):
            # odometer over the product of images, one digit per position
            for p in range(arity):
                mask = images[i, tuples[j, p]]
                cur[p] = _lowest(mask)
            while True:
                code = 0
                for p in range(arity):
                    code = code * n + cur[p]
                if not table[code]:
                    ok = False
                    break
                p = arity - 1
                carry = True
                while carry and p >= 0:
                    mask = images[i, tuples[j, p]]
                    cur[p] = _next_bit(mask, cur[p])
                    if cur[p] < 0:
                        cur[p] = _lowest(mask)
                        p -= 1
                    else:
                        carry = False
                if carry:
                    break
            if not ok:
                break
        if not ok:
            res[i] = 0
    return out


cdef inline int _lowest(int mask):
    cdef int y = 0
    while not (mask >> y) & 1:
        y += 1
    return y


cdef inline int _next_bit(int mask, int y):
    y += 1
    while y < 31:
        if (mask >> y) & 1:
            return y
        if (mask >> y) == 0:
            return -1
        y += 1
    return -1
