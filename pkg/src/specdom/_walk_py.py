"""Pure-Python killed random walk kernel.

Counter-based randomness: path p consumes draws

    state(p) = mix64(seed + (offset + p + 1) * GOLDEN)      (mod 2**64)
    draw(k)  = (mix64(state(p) + k * GOLDEN) >> 11) * 2**-53, k = 1, 2, ...

with the 64-bit finalizer

    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27; z *= 0x94D049BB133111EB
    z ^= z >> 31

Each jump consumes exactly two draws, holding time first (inverse CDF
through log1p), destination second (cumulative conductance scan).  Every
path is therefore reproducible in isolation from (seed, path index), and
the compiled kernel in _walk.pyx follows the identical float sequence,
so the two implementations agree bit for bit.

Paths run in lockstep across numpy arrays here; at any step every live
path has consumed the same number of draws, so the per-path draw counter
can be shared.  Comparisons against the cumulative table are done
entry by entry, exactly as the scalar kernel does them.
"""

from __future__ import annotations

import math

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(z: int) -> int:
    """Scalar 64-bit finalizer, for tests and spot checks."""
    mask = (1 << 64) - 1
    z &= mask
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & mask
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & mask
    z ^= z >> 31
    return z


def path_state(seed: int, p: int) -> int:
    return mix64((seed + (p + 1) * GOLDEN) & ((1 << 64) - 1))


def draw(state: int, k: int) -> float:
    """k-th uniform of a path, k starting at 1."""
    return (mix64((state + k * GOLDEN) & ((1 << 64) - 1)) >> 11) * _INV53


def _mix_vec(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(0xBF58476D1CE4E5B9)
    z ^= z >> np.uint64(27)
    z *= np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return z


def run_paths(
    indptr: np.ndarray,
    codes: np.ndarray,
    cum: np.ndarray,
    rates: np.ndarray,
    start: int,
    n_paths: int,
    seed: int,
    path_offset: int = 0,
    horizon: float = math.inf,
    max_jumps: int = 10_000_000,
):
    """Run killed continuous-time walks from one start vertex.

    Tables are in free-vertex index space: for vertex i the destination
    entries are ``codes[indptr[i]:indptr[i+1]]`` (a free index, or
    ``-(original_id + 1)`` for an absorbing neighbour) with cumulative
    conductances ``cum`` over the same range, and ``rates[i]`` is the
    total conductance over the vertex measure.

    Returns (tau, exit): absorption time and absorbing vertex id per
    path, with ``tau = inf`` and ``exit = -1`` for paths still alive at
    the horizon.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    codes = np.asarray(codes, dtype=np.int64)
    cum = np.asarray(cum, dtype=np.float64)
    rates = np.asarray(rates, dtype=np.float64)

    gold = np.uint64(GOLDEN)
    p = np.arange(n_paths, dtype=np.uint64)
    p += np.uint64(path_offset % (1 << 64))
    with np.errstate(over="ignore"):
        sp = _mix_vec(np.uint64(seed % (1 << 64)) + (p + np.uint64(1)) * gold)

    t = np.zeros(n_paths)
    v = np.full(n_paths, start, dtype=np.int64)
    tau = np.full(n_paths, np.inf)
    exit_ = np.full(n_paths, -1, dtype=np.int64)
    active = np.ones(n_paths, dtype=bool)

    k = 0
    steps = 0
    while active.any():
        idx = np.flatnonzero(active)
        vv = v[idx]
        rr = rates[vv]
        trapped = rr <= 0.0
        if trapped.any():
            active[idx[trapped]] = False
            idx = idx[~trapped]
            if idx.size == 0:
                continue
            vv = vv[~trapped]
            rr = rr[~trapped]

        k += 1
        with np.errstate(over="ignore"):
            z = _mix_vec(sp[idx] + np.uint64(k) * gold)
        u1 = (z >> np.uint64(11)).astype(np.float64) * _INV53
        # libm log1p per entry, matching the scalar kernel bit for bit
        log_terms = np.array([math.log1p(-x) for x in u1])
        t[idx] = t[idx] + (-log_terms / rr)

        censored = t[idx] > horizon
        if censored.any():
            active[idx[censored]] = False
            idx = idx[~censored]
            if idx.size == 0:
                k += 1
                continue
            vv = vv[~censored]

        k += 1
        with np.errstate(over="ignore"):
            z = _mix_vec(sp[idx] + np.uint64(k) * gold)
        u2 = (z >> np.uint64(11)).astype(np.float64) * _INV53
        lo = indptr[vv]
        hi1 = indptr[vv + 1] - 1
        x = u2 * cum[hi1]
        j = lo.copy()
        scan = (j < hi1) & (x >= cum[j])
        while scan.any():
            j[scan] += 1
            scan = (j < hi1) & (x >= cum[j])
        code = codes[j]

        absorbed = code < 0
        if absorbed.any():
            hit = idx[absorbed]
            tau[hit] = t[hit]
            exit_[hit] = -code[absorbed] - 1
            active[hit] = False
        moving = idx[~absorbed]
        v[moving] = code[~absorbed]

        steps += 1
        if steps >= max_jumps and active.any():
            raise RuntimeError(f"walk exceeded {max_jumps} jumps")
    return tau, exit_
