# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the hot arithmetic kernels.

conv_trunc_mod works in 64-bit machine words; callers route moduli at or
above 2**31 to the pure-Python kernel.
"""

from libc.stdint cimport int64_t


def val_p_factorial(long long p, n):
    if n > 2**62:
        from mixchar._kernels_py import val_p_factorial as slow
        return slow(p, n)
    cdef long long m = n
    cdef long long v = 0
    m //= p
    while m:
        v += m
        m //= p
    return v


def conv_trunc_mod(a, b, Py_ssize_t n, m):
    if m >= 2**31:
        from mixchar._kernels_py import conv_trunc_mod as slow
        return slow(a, b, n, m)
    cdef int64_t mod = m
    cdef Py_ssize_t la = min(len(a), n), lb = min(len(b), n)
    cdef Py_ssize_t i, j
    cdef int64_t ai
    cdef int64_t[:] av
    cdef int64_t[:] bv
    cdef int64_t[:] out
    import array
    av = array.array('q', [x % m for x in a[:la]])
    bv = array.array('q', [x % m for x in b[:lb]])
    out = array.array('q', [0] * n)
    for i in range(la):
        ai = av[i]
        if ai == 0:
            continue
        for j in range(min(lb, n - i)):
            out[j + i] = (out[j + i] + ai * bv[j]) % mod
    return [out[i] for i in range(n)]


def forward_differences(values):
    from mixchar._kernels_py import forward_differences as slow
    return slow(values)
