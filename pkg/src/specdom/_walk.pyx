# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled killed random walk kernel.

Scalar per-path loop with the same counter-based draw sequence as
_walk_py.run_paths; see that module for the contract.  Compiled with
-ffp-contract=off so the float arithmetic matches the pure kernel bit
for bit.
"""

from libc.math cimport log1p, INFINITY

import numpy as np

ctypedef unsigned long long u64

cdef u64 GOLDEN = <u64>0x9E3779B97F4A7C15
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline u64 _mix(u64 z) noexcept nogil:
    z ^= z >> 30
    z *= <u64>0xBF58476D1CE4E5B9
    z ^= z >> 27
    z *= <u64>0x94D049BB133111EB
    z ^= z >> 31
    return z


def run_paths(
    long long[::1] indptr,
    long long[::1] codes,
    double[::1] cum,
    double[::1] rates,
    long long start,
    long long n_paths,
    unsigned long long seed,
    long long path_offset=0,
    double horizon=INFINITY,
    long long max_jumps=10_000_000,
):
    tau_arr = np.full(n_paths, np.inf)
    exit_arr = np.full(n_paths, -1, dtype=np.int64)
    cdef double[::1] tau = tau_arr
    cdef long long[::1] exit_ = exit_arr

    cdef long long p, v, lo, hi1, j, code, jumps
    cdef u64 sp, k
    cdef double t, rate, u1, u2, x
    cdef bint overflow = False

    with nogil:
        for p in range(n_paths):
            sp = _mix(seed + (<u64>(path_offset + p) + 1) * GOLDEN)
            k = 0
            t = 0.0
            v = start
            jumps = 0
            while True:
                rate = rates[v]
                if rate <= 0.0:
                    break
                k += 1
                u1 = <double>(_mix(sp + k * GOLDEN) >> 11) * INV53
                t = t + (-log1p(-u1) / rate)
                if t > horizon:
                    break
                k += 1
                u2 = <double>(_mix(sp + k * GOLDEN) >> 11) * INV53
                lo = indptr[v]
                hi1 = indptr[v + 1] - 1
                x = u2 * cum[hi1]
                j = lo
                while j < hi1 and x >= cum[j]:
                    j += 1
                code = codes[j]
                if code < 0:
                    tau[p] = t
                    exit_[p] = -code - 1
                    break
                v = code
                jumps += 1
                if jumps >= max_jumps:
                    overflow = True
                    break
            if overflow:
                break
    if overflow:
        raise RuntimeError(f"walk exceeded {max_jumps} jumps")
    return tau_arr, exit_arr
