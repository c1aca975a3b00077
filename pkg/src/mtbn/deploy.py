"""Temporal deployment: unroll a condensed model over its temporal range.

Deployment creates one instance per time point for indexed variables and a
single unstamped instance for abstract ones.  Dynamic mechanism and lag
variables deploy too, stamped with their cause's stamp; constant structural
variables are folded into the edges they gate.  A candidate edge records a
potential parent under one lag value; whether it is active depends on the
values of its gating structural instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ModelInvalidError, UnknownInstanceError
from .model import CondensedModel, Value

ORDINARY = "ordinary"
MECHANISM = "mechanism"
LAG = "lag"


@dataclass(frozen=True)
class Instance:
    var: str
    stamp: Optional[int]
    kind: str

    @property
    def name(self) -> str:
        return self.var if self.stamp is None else f"{self.var}@{self.stamp}"

    def __repr__(self) -> str:
        return f"Instance({self.name})"


def sort_key(inst: Instance):
    # Stamp ascending with unstamped instances first, then canonical name.
    return (0, 0, inst.var) if inst.stamp is None else (1, inst.stamp, inst.var)


@dataclass(frozen=True)
class CandidateEdge:
    parent: Instance
    child: Instance
    mechanism: str
    mechanism_label: str
    mech_instance: Optional[Instance]
    lag_value: int
    lag_instance: Optional[Instance]
    tag: int

    def __repr__(self) -> str:
        return f"Edge({self.parent.name} -> {self.child.name} via {self.mechanism_label} lag {self.lag_value})"


@dataclass
class DeployedGraph:
    model: CondensedModel
    instances: list[Instance]
    edges: list[CandidateEdge]

    def __post_init__(self) -> None:
        self.by_name = {i.name: i for i in self.instances}
        self.edges_into: dict[Instance, list[CandidateEdge]] = {i: [] for i in self.instances}
        for e in self.edges:
            self.edges_into[e.child].append(e)

    def instance(self, var: str, stamp: Optional[int] = None) -> Instance:
        name = var if stamp is None else f"{var}@{stamp}"
        try:
            return self.by_name[name]
        except KeyError:
            raise UnknownInstanceError(f"no deployed instance {name!r}") from None

    def resolve(self, ref: str) -> Instance:
        """Resolve 'VAR@T' or 'VAR' to a deployed instance."""
        if "@" in ref:
            var, _, stamp = ref.rpartition("@")
            try:
                return self.instance(var, int(stamp))
            except ValueError:
                raise UnknownInstanceError(f"bad stamp in {ref!r}") from None
        return self.instance(ref)

    def domain(self, inst: Instance) -> tuple[Value, ...]:
        return self.model.variable_domain(inst.var)

    def structural_instances(self) -> list[Instance]:
        return [i for i in self.instances if i.kind != ORDINARY]

    def ordinary_instances(self) -> list[Instance]:
        return [i for i in self.instances if i.kind == ORDINARY]


def _instance_stamps(m: CondensedModel, var: str) -> list[Optional[int]]:
    if m.is_stamped(var):
        return list(m.range.points())
    return [None]


def deploy_model(m: CondensedModel) -> DeployedGraph:
    """Unroll the condensed model into instances and candidate edges."""
    instances: list[Instance] = []
    index: dict[tuple[str, Optional[int]], Instance] = {}

    def add(var: str, stamp: Optional[int], kind: str) -> None:
        inst = Instance(var, stamp, kind)
        index[(var, stamp)] = inst
        instances.append(inst)

    for var in m.variables.values():
        for s in _instance_stamps(m, var.name):
            add(var.name, s, ORDINARY)
    for mech in m.mechanisms.values():
        if mech.dynamic:
            for s in _instance_stamps(m, mech.name):
                add(mech.name, s, MECHANISM)
    for lag in m.lags.values():
        if lag.dynamic:
            for s in _instance_stamps(m, lag.name):
                add(lag.name, s, LAG)

    instances.sort(key=sort_key)

    edges: list[CandidateEdge] = []
    for mech in m.mechanisms.values():
        lag = m.lag_of(mech.name)
        if lag is None:
            raise ModelInvalidError(f"mechanism {mech.name} has no lag variable")
        effect_is_constant = (
            (mech.effect in m.mechanisms and not m.mechanisms[mech.effect].dynamic)
            or (mech.effect in m.lags and not m.lags[mech.effect].dynamic))
        if effect_is_constant:
            continue
        cause_stamped = m.is_stamped(mech.cause)
        effect_stamped = m.is_stamped(mech.effect)
        for cs in _instance_stamps(m, mech.cause):
            parent = index[(mech.cause, cs)]
            mech_inst = index.get((mech.name, cs)) if mech.dynamic else None
            label = mech.name if cs is None else f"{mech.name}@{cs}"
            lag_inst = index.get((lag.name, cs)) if lag.dynamic else None
            for lv in lag.values():
                if cause_stamped and effect_stamped:
                    ts = cs + lv
                    if not (m.range.t1 <= ts <= m.range.tn):
                        continue
                    children = [index[(mech.effect, ts)]]
                    tag = lv
                elif effect_stamped:
                    # Abstract cause feeds every effect instance at relative lag 0.
                    children = [index[(mech.effect, t)] for t in m.range.points()]
                    tag = 0
                else:
                    children = [index[(mech.effect, None)]]
                    tag = cs if cs is not None else 0
                for child in children:
                    edges.append(CandidateEdge(parent, child, mech.name, label,
                                               mech_inst, lv, lag_inst, tag))

    edges.sort(key=lambda e: (sort_key(e.child), sort_key(e.parent), e.tag, e.mechanism))
    return DeployedGraph(m, instances, edges)


def candidate_parents(g: DeployedGraph, inst: Instance) -> list[CandidateEdge]:
    """All candidate parent edges of an instance, one per possible lag value."""
    if inst not in g.edges_into:
        raise UnknownInstanceError(f"instance {inst.name!r} is not part of this deployment")
    return list(g.edges_into[inst])
