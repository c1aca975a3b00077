"""Monte Carlo inference over deployed models.

All three entry points draw from the same counter-based stream: the random
number consumed by instance i of sample s depends only on (seed, s, i), never
on evaluation order or worker count.  Runs are therefore reproducible
bit-for-bit across backends and across --workers settings; workers fill
disjoint sample slices of the same preallocated arrays and the final
reductions read those arrays in fixed order.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .compile import CompiledModel, compile_model
from .errors import CyclicModelError, InconclusiveRunError, MissingRowError, MtbnError
from .model import CondensedModel
from .rng import uniform_block

Value = object


def _compiled(m) -> CompiledModel:
    if isinstance(m, CompiledModel):
        return m
    if isinstance(m, CondensedModel):
        return compile_model(m)
    raise TypeError(f"expected CondensedModel or CompiledModel, got {type(m).__name__}")


def _encode_evidence(cm: CompiledModel, evidence) -> list[tuple[int, int]]:
    out = []
    seen = set()
    for ref, value in (evidence or {}).items():
        i = cm.resolve(ref)
        if i in seen:
            raise MtbnError(f"evidence given twice for {cm.instances[i].name}")
        seen.add(i)
        out.append((i, cm.value_index(i, value)))
    return out


@dataclass
class SampleRun:
    method: str
    n: int
    seed: int
    workers: int
    backend: str
    target: tuple[str, Value] | None
    evidence: dict
    estimate: float
    distribution: dict
    accepted: int | None = None
    weight_sum: float | None = None


@dataclass
class SimulationResult:
    n: int
    seed: int
    backend: str
    instances: list[str]
    values: np.ndarray
    _domains: list[tuple] = field(repr=False, default_factory=list)

    def records(self):
        for s in range(self.n):
            yield {name: self._domains[i][self.values[s, i]]
                   for i, name in enumerate(self.instances)}

    def distribution(self, ref_to_index, ref: str) -> dict:
        i = ref_to_index(ref)
        dom = self._domains[i]
        counts = np.bincount(self.values[:, i], minlength=len(dom))
        return {dom[v]: counts[v] / self.n for v in range(len(dom))}


_RC_ERRORS = {
    _kernels.RC_CYCLE: (CyclicModelError,
                        "sampling stalled on an unresolved dependency cycle"),
    _kernels.RC_MISSING_ROW: (MissingRowError,
                              "sampling hit a context with no declared row"),
}


def _run_blocks(cm: CompiledModel, n: int, seed: int, workers: int, backend: str,
                clamp: list[tuple[int, int]], filt: list[tuple[int, int]]):
    kernel, backend_name = _kernels.get_kernel(backend)
    n_inst = len(cm.instances)
    values = np.zeros((n, n_inst), dtype=np.int16)
    logw = np.zeros(n, dtype=np.float64)
    ok = np.ones(n, dtype=np.uint8)

    clamp_mask = np.zeros(n_inst, dtype=np.uint8)
    clamp_val = np.zeros(n_inst, dtype=np.int16)
    for i, v in clamp:
        clamp_mask[i] = 1
        clamp_val[i] = v
    filter_mask = np.zeros(n_inst, dtype=np.uint8)
    filter_val = np.zeros(n_inst, dtype=np.int16)
    for i, v in filt:
        filter_mask[i] = 1
        filter_val[i] = v

    workers = max(1, min(workers, n))
    bounds = [(k * n // workers, (k + 1) * n // workers) for k in range(workers)]
    bounds = [(lo, hi) for lo, hi in bounds if hi > lo]

    def run_slice(lo: int, hi: int) -> int:
        u = uniform_block(seed, lo, hi, n_inst)
        return kernel(cm.order, cm.gate_ptr, cm.gate_idx, cm.gate_stride,
                      cm.cfg_offset, cm.ap_ptr, cm.ap_data, cm.ap_stride,
                      cm.row_base, cm.rowtab, cm.row_probs, cm.dom_sizes, u,
                      clamp_mask, clamp_val, filter_mask, filter_val,
                      values[lo:hi], logw[lo:hi], ok[lo:hi])

    if backend_name == "numba" and len(bounds) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            rcs = list(pool.map(lambda b: run_slice(*b), bounds))
    else:
        rcs = [run_slice(lo, hi) for lo, hi in bounds]

    for rc in rcs:
        if rc != _kernels.RC_OK:
            exc, msg = _RC_ERRORS[rc]
            raise exc(msg)
    return values, logw, ok, backend_name


def forward_simulate(m, n: int, seed: int = 0, workers: int = 1,
                     backend: str = "auto") -> SimulationResult:
    cm = _compiled(m)
    values, _, _, backend_name = _run_blocks(cm, n, seed, workers, backend, [], [])
    return SimulationResult(n=n, seed=seed, backend=backend_name,
                            instances=[inst.name for inst in cm.instances],
                            values=values, _domains=list(cm.domains))


def logic_sampling_query(m, target: tuple[str, Value], evidence=None, n: int = 10000,
                         seed: int = 0, workers: int = 1,
                         backend: str = "auto") -> SampleRun:
    cm = _compiled(m)
    ti = cm.resolve(target[0])
    tv = cm.value_index(ti, target[1])
    filt = _encode_evidence(cm, evidence)
    values, _, ok, backend_name = _run_blocks(cm, n, seed, workers, backend, [], filt)
    mask = ok == 1
    accepted = int(np.count_nonzero(mask))
    if accepted == 0:
        raise InconclusiveRunError(
            f"no sample matched the evidence after n={n}; increase n or use "
            "likelihood weighting")
    dom = cm.domains[ti]
    col = values[mask, ti]
    counts = np.bincount(col, minlength=len(dom))
    dist = {dom[v]: counts[v] / accepted for v in range(len(dom))}
    return SampleRun(method="ls", n=n, seed=seed, workers=workers,
                     backend=backend_name, target=(target[0], dom[tv]),
                     evidence=dict(evidence or {}), estimate=dist[dom[tv]],
                     distribution=dist, accepted=accepted)


def likelihood_weighting_query(m, target: tuple[str, Value], evidence=None,
                               n: int = 10000, seed: int = 0, workers: int = 1,
                               backend: str = "auto") -> SampleRun:
    cm = _compiled(m)
    ti = cm.resolve(target[0])
    tv = cm.value_index(ti, target[1])
    clamp = _encode_evidence(cm, evidence)
    values, logw, _, backend_name = _run_blocks(cm, n, seed, workers, backend,
                                                clamp, [])
    top = float(np.max(logw))
    if top == -np.inf:
        raise InconclusiveRunError(
            f"all n={n} samples carried zero weight under the evidence")
    w = np.exp(logw - top)
    total = float(np.sum(w))
    dom = cm.domains[ti]
    dist = {}
    col = values[:, ti]
    for v in range(len(dom)):
        dist[dom[v]] = float(np.sum(w[col == v])) / total
    return SampleRun(method="lw", n=n, seed=seed, workers=workers,
                     backend=backend_name, target=(target[0], dom[tv]),
                     evidence=dict(evidence or {}), estimate=dist[dom[tv]],
                     distribution=dist, weight_sum=total)
