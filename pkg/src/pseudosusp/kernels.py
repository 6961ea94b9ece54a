"""Hot kernels for Bowen-ball counting over precomputed orbit data.

The greedy pass keeps a point iff its Bowen distance to every kept point is
>= eps, scanning in canonical order (the scan order is part of the
reproducibility contract).  Pair closeness at one time step means: some deck
shift s in {-1, 0, 1} makes both the strip distance and the symbol-window
comparison fall below eps; the symbol windows arrive pre-gathered per
(point, time, shift) so the same kernel serves shifts and odometers.

Backend: numba @njit by default, pure numpy when PSEUDOSUSP_BACKEND=numpy
(or when numba is unavailable).
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("PSEUDOSUSP_BACKEND", "").strip().lower()

if _FLAG not in ("", "numba", "numpy"):
    raise ValueError(f"PSEUDOSUSP_BACKEND must be 'numba' or 'numpy', got {_FLAG!r}")

HAVE_NUMBA = False
if _FLAG != "numpy":
    try:
        from numba import njit
        HAVE_NUMBA = True
    except ImportError:
        HAVE_NUMBA = False


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def _greedy_core(tt, rn, eff, eps):
    n_pts, n_times = tt.shape
    width = eff.shape[3]
    kept = np.zeros(n_pts, np.bool_)
    kept_idx = np.empty(n_pts, np.int64)
    n_kept = 0
    for j in range(n_pts):
        separated = True
        for kk in range(n_kept):
            q = kept_idx[kk]
            close_all = True
            for i in range(n_times):
                close_i = False
                for si in range(3):
                    s = si - 1
                    strip = abs(tt[j, i] - tt[q, i]) + abs(rn[j, i] - (rn[q, i] + s))
                    if strip >= eps:
                        continue
                    agree = True
                    for d in range(width):
                        if eff[j, i, 1, d] != eff[q, i, si, d]:
                            agree = False
                            break
                    if agree:
                        close_i = True
                        break
                if not close_i:
                    close_all = False
                    break
            if close_all:
                separated = False
                break
        if separated:
            kept[j] = True
            kept_idx[n_kept] = j
            n_kept += 1
    return kept


if HAVE_NUMBA:
    _greedy_numba = njit(cache=True)(_greedy_core)


def greedy_bowen_numpy(tt, rn, eff, eps):
    """Vectorized-over-kept variant computing the identical selection."""
    n_pts, n_times = tt.shape
    kept_idx: list[int] = []
    kept = np.zeros(n_pts, np.bool_)
    for j in range(n_pts):
        if kept_idx:
            ks = np.array(kept_idx)
            alive = np.ones(len(ks), np.bool_)
            for i in range(n_times):
                close_i = np.zeros(len(ks), np.bool_)
                for si in range(3):
                    s = si - 1
                    strip = (np.abs(tt[j, i] - tt[ks, i])
                             + np.abs(rn[j, i] - (rn[ks, i] + s)))
                    mask = strip < eps
                    if not mask.any():
                        continue
                    agree = (eff[ks, i, si, :] == eff[j, i, 1, :]).all(axis=1)
                    close_i |= mask & agree
                alive &= close_i
                if not alive.any():
                    break
            if alive.any():
                continue
        kept[j] = True
        kept_idx.append(j)
    return kept


def greedy_bowen_select(tt: np.ndarray, rn: np.ndarray, eff: np.ndarray,
                        eps: float) -> np.ndarray:
    """Boolean mask of the greedy maximal Bowen-eps-separated subsample."""
    tt = np.ascontiguousarray(tt, dtype=np.float64)
    rn = np.ascontiguousarray(rn, dtype=np.float64)
    eff = np.ascontiguousarray(eff, dtype=np.int8)
    if HAVE_NUMBA:
        return np.asarray(_greedy_numba(tt, rn, eff, float(eps)))
    return greedy_bowen_numpy(tt, rn, eff, float(eps))
