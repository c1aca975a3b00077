"""Context-keyed CPD tables and their validation.

A row context identifies the realized set of active parents by (variable,
relative lag tag, value) triples; the distinguished boundary key covers
instances with no in-range active parent.  One table per variable is shared
by all of its deployed instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .deploy import CandidateEdge, DeployedGraph, Instance
from .errors import MissingRowError
from .model import (ACTIVE, BOUNDARY, CondensedModel, Context, ContextEntry, Diagnostic,
                    Value, canonical_context)

NORMALIZATION_TOL = 1e-9


def context_key(entries: Iterable[tuple[str, int, Value]]) -> Context:
    """Canonical key from (parent variable, lag tag, value) triples."""
    uniq = {(p, t): ContextEntry(p, t, v) for p, t, v in entries}
    if not uniq:
        return BOUNDARY
    return canonical_context(uniq.values())


def format_context(ctx: Context) -> str:
    if ctx == BOUNDARY:
        return BOUNDARY
    return "{" + ", ".join(f"{e.parent}(lag {e.lag})={e.value}" for e in ctx) + "}"


@dataclass
class CpdTable:
    variable: str
    domain: tuple[Value, ...]
    keys: list[Context]
    probs: list[tuple[float, ...]]

    def __post_init__(self) -> None:
        self.index = {k: i for i, k in enumerate(self.keys)}

    def row_index(self, key: Context) -> Optional[int]:
        return self.index.get(key)

    def lookup(self, key: Context) -> tuple[float, ...]:
        i = self.index.get(key)
        if i is None:
            raise MissingRowError(
                f"{self.variable} has no row for context {format_context(key)}")
        return self.probs[i]


def build_tables(m: CondensedModel) -> dict[str, CpdTable]:
    tables = {}
    for name, cpd in m.cpds.items():
        tables[name] = CpdTable(name, m.variable_domain(name),
                                [r.context for r in cpd.rows],
                                [r.probabilities for r in cpd.rows])
    return tables


def edge_is_active(e: CandidateEdge, values: Mapping[Instance, Value]) -> bool:
    """Whether a candidate edge is active under the given instance values."""
    if e.mech_instance is not None and values[e.mech_instance] != ACTIVE:
        return False
    if e.lag_instance is not None and values[e.lag_instance] != e.lag_value:
        return False
    return True


def active_context(g: DeployedGraph, inst: Instance,
                   values: Mapping[Instance, Value]) -> Context:
    """Realized context key of an instance given gate and parent values."""
    entries = []
    for e in g.edges_into[inst]:
        if edge_is_active(e, values):
            entries.append((e.parent.var, e.tag, values[e.parent]))
    return context_key(entries)


def lookup_distribution(g: DeployedGraph, inst: Instance,
                        values: Mapping[Instance, Value],
                        tables: Optional[dict[str, CpdTable]] = None) -> tuple[float, ...]:
    """Distribution of an instance given the values of its gates and parents.

    `values` must cover every dynamic gate of the instance's candidate edges
    and every parent that turns out active.
    """
    if tables is None:
        tables = build_tables(g.model)
    if inst.var not in tables:
        raise MissingRowError(f"{inst.var} has no CPD")
    return tables[inst.var].lookup(active_context(g, inst, values))


def _gates_of(edges: list[CandidateEdge]) -> list[Instance]:
    gates: list[Instance] = []
    for e in edges:
        for gate in (e.mech_instance, e.lag_instance):
            if gate is not None and gate not in gates:
                gates.append(gate)
    return gates


def reachable_active_sets(g: DeployedGraph, inst: Instance) -> set[tuple[Instance, ...]]:
    """All parent-instance sets that some gate configuration activates."""
    edges = g.edges_into[inst]
    gates = _gates_of(edges)
    out: set[tuple[Instance, ...]] = set()
    for combo in itertools.product(*(g.domain(gt) for gt in gates)):
        values = dict(zip(gates, combo))
        active = []
        for e in edges:
            if e.mech_instance is not None and values[e.mech_instance] != ACTIVE:
                continue
            if e.lag_instance is not None and values[e.lag_instance] != e.lag_value:
                continue
            if e.parent not in active:
                active.append(e.parent)
        out.add(tuple(active))
    return out


def reachable_context_keys(g: DeployedGraph) -> dict[str, set[Context]]:
    """Reachable context keys per variable, unioned over its instances.

    Reachability is structural: every gate configuration and every value
    combination of the activated parents counts, regardless of probability.
    """
    out: dict[str, set[Context]] = {}
    for inst in g.instances:
        keys = out.setdefault(inst.var, set())
        tag_of = {e.parent: e.tag for e in g.edges_into[inst]}
        for active in reachable_active_sets(g, inst):
            if not active:
                keys.add(BOUNDARY)
                continue
            for values in itertools.product(*(g.domain(p) for p in active)):
                keys.add(context_key(
                    (p.var, tag_of[p], v) for p, v in zip(active, values)))
    return out


def validate_cpds(m: CondensedModel, g: Optional[DeployedGraph] = None) -> list[Diagnostic]:
    """Check coverage and normalization of every required CPD.

    Missing reachable rows and bad normalization are errors; declared rows
    that no deployment context can realize are warnings.
    """
    from .deploy import deploy_model

    if g is None:
        g = deploy_model(m)
    diags: list[Diagnostic] = []
    tables = build_tables(m)
    reachable = reachable_context_keys(g)

    needs_cpd = {i.var for i in g.instances}
    for var in sorted(needs_cpd):
        table = tables.get(var)
        if table is None:
            diags.append(Diagnostic("missing-cpd", "error", f"{var} has no CPD", var))
            continue
        want = reachable.get(var, set())
        declared = set(table.keys)
        for key in sorted(want - declared, key=format_context):
            diags.append(Diagnostic("missing-row", "error",
                                    f"{var} lacks a row for reachable context {format_context(key)}",
                                    var))
        for key in sorted(declared - want, key=format_context):
            diags.append(Diagnostic("unreachable-row", "warning",
                                    f"{var} row {format_context(key)} can never be realized", var))
        for key, probs in zip(table.keys, table.probs):
            total = sum(probs)
            if abs(total - 1.0) > NORMALIZATION_TOL:
                diags.append(Diagnostic("normalization", "error",
                                        f"{var} row {format_context(key)} sums to {total!r}", var))
    for var, table in tables.items():
        if var not in needs_cpd:
            diags.append(Diagnostic("unreachable-cpd", "warning",
                                    f"{var} has a CPD but deploys no instances", var))
    return diags
