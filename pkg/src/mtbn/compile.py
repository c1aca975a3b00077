"""Flat integer-array encoding of a deployed model.

The encoding resolves, once, everything the inner loops need: for every
instance, its dynamic gates, and for every joint gate configuration the
activated parent list and a dense table mapping parent values to a global
CPD row id.  Exact enumeration, sampling kernels, and BN export all consume
this one structure, so a context-lookup bug cannot hide in just one path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from .cpd import build_tables, context_key
from .deploy import DeployedGraph, Instance, deploy_model, sort_key
from .errors import ModelInvalidError, UnknownInstanceError
from .model import ACTIVE, BOUNDARY, CondensedModel, Value
from .structure import certified_cyclic_configs, free_structural_instances

Ref = Union[str, Instance]


@dataclass
class CompiledModel:
    model: CondensedModel
    graph: DeployedGraph
    instances: list[Instance]
    domains: list[tuple[Value, ...]]
    dom_sizes: np.ndarray
    is_structural: np.ndarray
    order: np.ndarray
    static_ok: bool

    gate_ptr: np.ndarray
    gate_idx: np.ndarray
    gate_stride: np.ndarray
    cfg_offset: np.ndarray
    ap_ptr: np.ndarray
    ap_data: np.ndarray
    ap_stride: np.ndarray
    row_base: np.ndarray
    rowtab: np.ndarray
    row_probs: np.ndarray

    free_structural: list[Instance] = field(default_factory=list)
    zone_gate_idx: list[int] = field(default_factory=list)
    cyclic_combos: set[tuple[int, ...]] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.index = {inst: k for k, inst in enumerate(self.instances)}
        self.by_name = {inst.name: k for k, inst in enumerate(self.instances)}

    @property
    def n_instances(self) -> int:
        return len(self.instances)

    def resolve(self, ref: Ref) -> int:
        if isinstance(ref, Instance):
            k = self.index.get(ref)
            if k is None:
                raise UnknownInstanceError(f"instance {ref.name!r} is not deployed here")
            return k
        k = self.by_name.get(ref)
        if k is not None:
            return k
        raise UnknownInstanceError(f"no deployed instance {ref!r}")

    def value_index(self, inst_idx: int, value: Value) -> int:
        dom = self.domains[inst_idx]
        if value in dom:
            return dom.index(value)
        # CLI input arrives as text; match by printed form when exact
        # membership fails.
        text = str(value)
        for k, v in enumerate(dom):
            if str(v) == text:
                return k
        raise ModelInvalidError(
            f"{self.instances[inst_idx].name} has no domain value {value!r} "
            f"(domain: {list(dom)})")

    def encode(self, assignment: Mapping[Ref, Value]) -> dict[int, int]:
        out: dict[int, int] = {}
        for ref, value in assignment.items():
            i = self.resolve(ref)
            if i in out:
                raise ModelInvalidError(
                    f"{self.instances[i].name} assigned more than once")
            out[i] = self.value_index(i, value)
        return out

    def row_id(self, values: np.ndarray, i: int) -> int:
        """Global CPD row id for instance i given a full value-index vector."""
        cfg = 0
        for j in range(self.gate_ptr[i], self.gate_ptr[i + 1]):
            cfg += values[self.gate_idx[j]] * self.gate_stride[j]
        slot = self.cfg_offset[i] + cfg
        digit = 0
        for j in range(self.ap_ptr[slot], self.ap_ptr[slot + 1]):
            digit += values[self.ap_data[j]] * self.ap_stride[j]
        return int(self.rowtab[self.row_base[slot] + digit])

    def structural_part(self, values: np.ndarray) -> tuple[int, ...]:
        return tuple(int(values[k]) for k in self.zone_gate_idx)

    def is_cyclic_values(self, values: np.ndarray) -> bool:
        if not self.zone_gate_idx:
            return False
        return self.structural_part(values) in self.cyclic_combos


def _toposort_static(g: DeployedGraph, instances: list[Instance]) -> tuple[bool, list[Instance]]:
    idx = {inst: k for k, inst in enumerate(instances)}
    adj: dict[int, set[int]] = {k: set() for k in range(len(instances))}
    for e in g.edges:
        adj[idx[e.parent]].add(idx[e.child])
        if e.mech_instance is not None:
            adj[idx[e.mech_instance]].add(idx[e.child])
        if e.lag_instance is not None:
            adj[idx[e.lag_instance]].add(idx[e.child])
    indeg = {k: 0 for k in adj}
    for k, outs in adj.items():
        for o in outs:
            indeg[o] += 1
    import heapq
    ready = [(sort_key(instances[k]), k) for k, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order: list[Instance] = []
    while ready:
        _, k = heapq.heappop(ready)
        order.append(instances[k])
        for o in adj[k]:
            indeg[o] -= 1
            if indeg[o] == 0:
                heapq.heappush(ready, (sort_key(instances[o]), o))
    if len(order) != len(instances):
        return False, sorted(instances, key=sort_key)
    return True, order


def compile_model(m: CondensedModel, g: Optional[DeployedGraph] = None) -> CompiledModel:
    if g is None:
        g = deploy_model(m)
    instances = list(g.instances)
    index = {inst: k for k, inst in enumerate(instances)}
    domains = [g.domain(inst) for inst in instances]
    dom_sizes = np.array([len(d) for d in domains], dtype=np.int64)
    is_structural = np.array([0 if inst.kind == "ordinary" else 1 for inst in instances],
                             dtype=np.uint8)
    tables = build_tables(m)

    # Global row table shared by every instance of a variable.
    row_probs_list: list[tuple[float, ...]] = []
    global_row: dict[tuple[str, int], int] = {}
    for var, table in tables.items():
        for k, probs in enumerate(table.probs):
            global_row[(var, k)] = len(row_probs_list)
            row_probs_list.append(probs)
    max_dom = max((len(p) for p in row_probs_list), default=1)
    row_probs = np.zeros((max(len(row_probs_list), 1), max_dom), dtype=np.float64)
    for k, probs in enumerate(row_probs_list):
        row_probs[k, :len(probs)] = probs

    gate_ptr = [0]
    gate_idx: list[int] = []
    gate_stride: list[int] = []
    cfg_offset = [0]
    ap_ptr = [0]
    ap_data: list[int] = []
    ap_stride: list[int] = []
    row_base: list[int] = []
    rowtab: list[int] = []

    for i, inst in enumerate(instances):
        edges = g.edges_into[inst]
        gates: list[Instance] = []
        for e in edges:
            for gate in (e.mech_instance, e.lag_instance):
                if gate is not None and gate not in gates:
                    gates.append(gate)
        gates.sort(key=sort_key)
        radices = [len(g.domain(x)) for x in gates]
        strides = [0] * len(gates)
        acc = 1
        for k in range(len(gates) - 1, -1, -1):
            strides[k] = acc
            acc *= radices[k]
        n_cfg = acc
        gate_idx.extend(index[x] for x in gates)
        gate_stride.extend(strides)
        gate_ptr.append(len(gate_idx))
        cfg_offset.append(cfg_offset[-1] + n_cfg)

        table = tables.get(inst.var)
        for combo in itertools.product(*(range(r) for r in radices)):
            gvals = {gate: g.domain(gate)[d] for gate, d in zip(gates, combo)}
            active: list[Instance] = []
            tag_of = {}
            for e in edges:
                if e.mech_instance is not None and gvals[e.mech_instance] != ACTIVE:
                    continue
                if e.lag_instance is not None and gvals[e.lag_instance] != e.lag_value:
                    continue
                tag_of[e.parent] = e.tag
                if e.parent not in active:
                    active.append(e.parent)
            active.sort(key=lambda p: (p.var, tag_of[p]))
            pstrides = [0] * len(active)
            acc = 1
            for k in range(len(active) - 1, -1, -1):
                pstrides[k] = acc
                acc *= len(g.domain(active[k]))
            ap_data.extend(index[p] for p in active)
            ap_stride.extend(pstrides)
            ap_ptr.append(len(ap_data))
            row_base.append(len(rowtab))
            if not active:
                rid = -1
                if table is not None:
                    k = table.row_index(BOUNDARY)
                    if k is not None:
                        rid = global_row[(inst.var, k)]
                rowtab.append(rid)
                continue
            for vcombo in itertools.product(*(g.domain(p) for p in active)):
                key = context_key((p.var, tag_of[p], v) for p, v in zip(active, vcombo))
                rid = -1
                if table is not None:
                    k = table.row_index(key)
                    if k is not None:
                        rid = global_row[(inst.var, k)]
                rowtab.append(rid)

    static_ok, order_insts = _toposort_static(g, instances)
    order = np.array([index[inst] for inst in order_insts], dtype=np.int64)

    zone_gates, cyclic = certified_cyclic_configs(m, g)
    zone_gate_idx = [index[x] for x in zone_gates]
    cyclic_combos = set()
    for combo in cyclic:
        cyclic_combos.add(tuple(g.domain(x).index(v) for x, v in zip(zone_gates, combo)))

    return CompiledModel(
        model=m, graph=g, instances=instances, domains=domains,
        dom_sizes=dom_sizes, is_structural=is_structural, order=order,
        static_ok=static_ok,
        gate_ptr=np.array(gate_ptr, dtype=np.int64),
        gate_idx=np.array(gate_idx, dtype=np.int64),
        gate_stride=np.array(gate_stride, dtype=np.int64),
        cfg_offset=np.array(cfg_offset, dtype=np.int64),
        ap_ptr=np.array(ap_ptr, dtype=np.int64),
        ap_data=np.array(ap_data, dtype=np.int64),
        ap_stride=np.array(ap_stride, dtype=np.int64),
        row_base=np.array(row_base, dtype=np.int64),
        rowtab=np.array(rowtab, dtype=np.int64),
        row_probs=row_probs,
        free_structural=free_structural_instances(g),
        zone_gate_idx=zone_gate_idx,
        cyclic_combos=cyclic_combos,
    )
