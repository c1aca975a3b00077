"""Sampling inner loop, shared by the numba and pure-Python backends.

The same function body is compiled with @njit when numba is usable and run
as-is otherwise, so both backends execute identical arithmetic on identical
inputs and produce bit-identical output.  Set MTBN_DISABLE_NUMBA=1 to force
the pure path.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

RC_OK = 0
RC_CYCLE = 1
RC_MISSING_ROW = 2


def _sample_block(order, gate_ptr, gate_idx, gate_stride, cfg_offset,
                  ap_ptr, ap_data, ap_stride, row_base, rowtab, row_probs,
                  dom_sizes, u, clamp_mask, clamp_val, filter_mask, filter_val,
                  values, logw, ok):
    n = u.shape[0]
    n_inst = order.shape[0]
    for s in range(n):
        resolved = np.zeros(n_inst, dtype=np.uint8)
        remaining = n_inst
        alive = True
        w = 0.0
        while remaining > 0 and alive:
            progress = False
            for kk in range(n_inst):
                i = order[kk]
                if resolved[i] == 1:
                    continue
                ready = True
                cfg = 0
                for j in range(gate_ptr[i], gate_ptr[i + 1]):
                    gi = gate_idx[j]
                    if resolved[gi] == 0:
                        ready = False
                        break
                    cfg += values[s, gi] * gate_stride[j]
                if not ready:
                    continue
                slot = cfg_offset[i] + cfg
                digit = 0
                for j in range(ap_ptr[slot], ap_ptr[slot + 1]):
                    pi = ap_data[j]
                    if resolved[pi] == 0:
                        ready = False
                        break
                    digit += values[s, pi] * ap_stride[j]
                if not ready:
                    continue
                rid = rowtab[row_base[slot] + digit]
                if rid < 0:
                    return RC_MISSING_ROW
                if clamp_mask[i] == 1:
                    v = np.int64(clamp_val[i])
                    p = row_probs[rid, v]
                    if p <= 0.0:
                        w = -np.inf
                    else:
                        w += np.log(p)
                else:
                    uu = u[s, i]
                    v = np.int64(dom_sizes[i] - 1)
                    c = 0.0
                    for d in range(dom_sizes[i]):
                        c += row_probs[rid, d]
                        if uu < c:
                            v = np.int64(d)
                            break
                values[s, i] = v
                resolved[i] = 1
                remaining -= 1
                progress = True
                if filter_mask[i] == 1 and values[s, i] != filter_val[i]:
                    ok[s] = 0
                    alive = False
                    break
            if alive and remaining > 0 and not progress:
                return RC_CYCLE
        logw[s] = w
    return RC_OK


if HAS_NUMBA:
    _sample_block_njit = njit(cache=True, nogil=True)(_sample_block)


def numba_disabled() -> bool:
    return os.environ.get("MTBN_DISABLE_NUMBA", "") not in ("", "0")


def get_kernel(backend: str = "auto"):
    """Return (kernel, backend_name) honoring the env flag and availability."""
    if backend not in ("auto", "numba", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "python":
        return _sample_block, "python"
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _sample_block_njit, "numba"
    if numba_disabled() or not HAS_NUMBA:
        return _sample_block, "python"
    return _sample_block_njit, "numba"
