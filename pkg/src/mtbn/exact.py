"""Exact inference by structure-aware enumeration, and BN export.

The joint factorizes per structure as the product of each instance's CPD row
given its realized active parents; marginal queries sum the factorized joint
over every full assignment consistent with the evidence.  No prior over
structures appears anywhere: structural instances carry their own CPD
factors.  Products short-circuit at zero and sums use compensated (Neumaier)
accumulation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .compile import CompiledModel, Ref, compile_model
from .cpd import active_context, build_tables
from .deploy import DeployedGraph, Instance, sort_key
from .errors import CapExceededError, CyclicModelError, MissingRowError, MtbnError
from .model import CondensedModel, Value
from .structure import Structure, check_well_defined

DEFAULT_CAP = 10 ** 8


class KahanSum:
    """Neumaier-compensated accumulator."""

    __slots__ = ("total", "_c")

    def __init__(self) -> None:
        self.total = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self._c += (self.total - t) + x
        else:
            self._c += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self._c


def _certified(cm: CompiledModel) -> bool:
    cached = getattr(cm, "_certified", None)
    if cached is None:
        cached = check_well_defined(cm.model, cm.graph).certified
        cm._certified = cached
    return cached


def _product(cm: CompiledModel, values: np.ndarray) -> float:
    p = 1.0
    for i in range(cm.n_instances):
        rid = cm.row_id(values, i)
        if rid < 0:
            raise MissingRowError(
                f"{cm.instances[i].name} reached a context with no CPD row")
        p *= cm.row_probs[rid, values[i]]
        if p == 0.0:
            return 0.0
    return p


def joint_probability(m: CondensedModel, assignment: Mapping[Ref, Value],
                      compiled: Optional[CompiledModel] = None) -> float:
    """Probability of one full assignment (every instance must be covered)."""
    cm = compiled if compiled is not None else compile_model(m)
    enc = cm.encode(assignment)
    if len(enc) != cm.n_instances:
        missing = [inst.name for k, inst in enumerate(cm.instances) if k not in enc]
        raise MtbnError(f"full assignment must cover every instance, missing: "
                        f"{', '.join(missing[:6])}")
    values = np.zeros(cm.n_instances, dtype=np.int64)
    for k, v in enc.items():
        values[k] = v
    if cm.is_cyclic_values(values):
        if _certified(cm):
            return 0.0
        raise CyclicModelError(
            "assignment realizes a cyclic structure and the model is not certified")
    return _product(cm, values)


def joint_probability_given(g: DeployedGraph, s: Structure,
                            ordinary_values: Mapping[Instance, Value]) -> float:
    """Factorized joint of a structure plus ordinary values, object-level.

    Kept independent of the compiled tables on purpose: it resolves contexts
    through the row-key path, which gives the test suite a second route
    through the same semantics.
    """
    tables = build_tables(g.model)
    values: dict[Instance, Value] = dict(s.assignment)
    values.update(ordinary_values)
    if set(values) != set(g.instances):
        raise MtbnError("assignment must cover every instance")
    p = 1.0
    for inst in g.instances:
        table = tables[inst.var]
        probs = table.lookup(active_context(g, inst, values))
        p *= probs[table.domain.index(values[inst])]
        if p == 0.0:
            return 0.0
    return p


def _enumeration(cm: CompiledModel, pinned: dict[int, int], cap: int):
    free = [i for i in range(cm.n_instances) if i not in pinned]
    count = 1
    for i in free:
        count *= int(cm.dom_sizes[i])
        if count > cap:
            raise CapExceededError(
                f"exact enumeration needs {count}+ assignments (cap {cap}); "
                f"use likelihood weighting (--method lw) instead")
    values = np.zeros(cm.n_instances, dtype=np.int64)
    for k, v in pinned.items():
        values[k] = v
    skip_cycles = bool(cm.zone_gate_idx)
    for combo in itertools.product(*(range(int(cm.dom_sizes[i])) for i in free)):
        for i, v in zip(free, combo):
            values[i] = v
        if skip_cycles and cm.is_cyclic_values(values):
            continue
        yield values


def joint_sum(m: CondensedModel, cap: int = DEFAULT_CAP,
              compiled: Optional[CompiledModel] = None) -> float:
    """Sum of the joint over every full assignment (should be 1)."""
    cm = compiled if compiled is not None else compile_model(m)
    acc = KahanSum()
    for values in _enumeration(cm, {}, cap):
        acc.add(_product(cm, values))
    return acc.value


def exact_query(m: CondensedModel, target: tuple[Ref, Value],
                evidence: Optional[Mapping[Ref, Value]] = None,
                cap: int = DEFAULT_CAP,
                compiled: Optional[CompiledModel] = None) -> float:
    """p(target | evidence) by full enumeration."""
    cm = compiled if compiled is not None else compile_model(m)
    pinned = cm.encode(evidence or {})
    t_idx = cm.resolve(target[0])
    t_val = cm.value_index(t_idx, target[1])
    if t_idx in pinned:
        return 1.0 if pinned[t_idx] == t_val else 0.0
    num = KahanSum()
    den = KahanSum()
    for values in _enumeration(cm, pinned, cap):
        p = _product(cm, values)
        if p == 0.0:
            continue
        den.add(p)
        if values[t_idx] == t_val:
            num.add(p)
    if den.value <= 0.0:
        raise MtbnError("evidence has probability 0; conditional undefined")
    return num.value / den.value


def exact_distribution(m: CondensedModel, target: Ref,
                       evidence: Optional[Mapping[Ref, Value]] = None,
                       cap: int = DEFAULT_CAP,
                       compiled: Optional[CompiledModel] = None) -> dict[Value, float]:
    """Posterior distribution over the target instance's domain."""
    cm = compiled if compiled is not None else compile_model(m)
    pinned = cm.encode(evidence or {})
    t_idx = cm.resolve(target)
    dom = cm.domains[t_idx]
    if t_idx in pinned:
        return {v: (1.0 if k == pinned[t_idx] else 0.0) for k, v in enumerate(dom)}
    sums = [KahanSum() for _ in dom]
    den = KahanSum()
    for values in _enumeration(cm, pinned, cap):
        p = _product(cm, values)
        if p == 0.0:
            continue
        den.add(p)
        sums[values[t_idx]].add(p)
    if den.value <= 0.0:
        raise MtbnError("evidence has probability 0; conditional undefined")
    return {v: sums[k].value / den.value for k, v in enumerate(dom)}


@dataclass
class BnNode:
    name: str
    domain: tuple[Value, ...]
    parents: list[str]
    cpt: list[dict]


@dataclass
class ExportedBn:
    nodes: list[BnNode]

    def to_dict(self) -> dict:
        return {"nodes": [{"name": n.name, "domain": list(n.domain),
                           "parents": n.parents, "cpt": n.cpt} for n in self.nodes]}

    def joint(self, assignment: Mapping[str, Value]) -> float:
        """Product of the node rows selected by a full named assignment."""
        p = 1.0
        for node in self.nodes:
            given = {q: assignment[q] for q in node.parents}
            row = next(r for r in node.cpt if r["given"] == given)
            p *= row["probabilities"][list(node.domain).index(assignment[node.name])]
            if p == 0.0:
                return 0.0
        return p


def export_bn(m: CondensedModel, compiled: Optional[CompiledModel] = None) -> ExportedBn:
    """Equivalent plain Bayesian network over the deployed instances.

    Every instance becomes a node whose parents are its candidate parents
    plus the dynamic structural instances gating them; the node's CPT routes
    each parent-value combination through the same row resolution the MTBN
    uses, so the joint is preserved exactly.  Parent-value combinations that
    no gate configuration can realize get a uniform filler row (they carry
    zero mass).
    """
    cm = compiled if compiled is not None else compile_model(m)
    if not cm.static_ok:
        raise CyclicModelError(
            "BN export requires an acyclic union of candidate and gate edges; "
            "this model's cyclic families are representable only per-structure")
    nodes: list[BnNode] = []
    scratch = np.zeros(cm.n_instances, dtype=np.int64)
    for k in cm.order:
        inst = cm.instances[k]
        parent_set: set[Instance] = set()
        for e in cm.graph.edges_into[inst]:
            parent_set.add(e.parent)
            if e.mech_instance is not None:
                parent_set.add(e.mech_instance)
            if e.lag_instance is not None:
                parent_set.add(e.lag_instance)
        parents = sorted(parent_set, key=sort_key)
        p_idx = [cm.resolve(p) for p in parents]
        cpt: list[dict] = []
        dom = cm.domains[k]
        for combo in itertools.product(*(range(int(cm.dom_sizes[i])) for i in p_idx)):
            for i, v in zip(p_idx, combo):
                scratch[i] = v
            rid = cm.row_id(scratch, int(k))
            if rid >= 0:
                probs = [float(x) for x in cm.row_probs[rid, :len(dom)]]
            else:
                probs = [1.0 / len(dom)] * len(dom)
            given = {p.name: cm.domains[i][v]
                     for p, i, v in zip(parents, p_idx, combo)}
            cpt.append({"given": given, "probabilities": probs})
        nodes.append(BnNode(inst.name, dom, [p.name for p in parents], cpt))
    return ExportedBn(nodes)
