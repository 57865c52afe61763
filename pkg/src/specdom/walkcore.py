"""Walk kernel selection.

The compiled kernel is used when the extension built; the pure kernel is
always available and produces bit-identical output, so everything
downstream is reproducible regardless of which one runs.
"""

from __future__ import annotations

from . import _walk_py

try:
    from . import _walk  # compiled extension, optional

    HAVE_COMPILED = True
except ImportError:
    _walk = None
    HAVE_COMPILED = False


def run_paths(
    indptr,
    codes,
    cum,
    rates,
    start,
    n_paths,
    seed,
    path_offset=0,
    horizon=float("inf"),
    max_jumps=10_000_000,
    force=None,
):
    """Dispatch to the selected kernel; ``force`` is "pure" or
    "compiled" for cross-checks and benchmarks."""
    if force not in (None, "pure", "compiled"):
        raise ValueError(f"unknown kernel {force!r}")
    use_compiled = HAVE_COMPILED if force is None else force == "compiled"
    if use_compiled and not HAVE_COMPILED:
        raise RuntimeError("compiled kernel not available")
    impl = _walk if use_compiled else _walk_py
    return impl.run_paths(
        indptr, codes, cum, rates, start, n_paths, seed, path_offset, horizon, max_jumps
    )
