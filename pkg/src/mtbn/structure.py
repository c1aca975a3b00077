"""Structure enumeration, acyclicity, ancestral orderings, certification.

A structure assigns a value to every deployed dynamic structural instance.
The per-structure dependency graph contains the active candidate edges plus
an edge from every dynamic gate to the instance it gates; gates are parents
in the exported network and an instance cannot be resolved before its gates,
so they participate in the cycle check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

from .cpd import build_tables, context_key
from .deploy import CandidateEdge, DeployedGraph, Instance, sort_key
from .errors import CyclicModelError
from .model import ACTIVE, CondensedModel, Diagnostic, Value


@dataclass
class Structure:
    index: int
    assignment: dict[Instance, Value]

    def value(self, inst: Instance) -> Value:
        return self.assignment[inst]

    def substructure(self, stamp: Optional[int]) -> dict[Instance, Value]:
        """Restriction to instances with the given stamp (None for unstamped)."""
        return {i: v for i, v in self.assignment.items() if i.stamp == stamp}

    def substructures(self) -> dict[Optional[int], dict[Instance, Value]]:
        out: dict[Optional[int], dict[Instance, Value]] = {}
        for i, v in self.assignment.items():
            out.setdefault(i.stamp, {})[i] = v
        return out


def free_structural_instances(g: DeployedGraph) -> list[Instance]:
    return sorted(g.structural_instances(), key=sort_key)


def structure_count(g: DeployedGraph) -> int:
    n = 1
    for inst in free_structural_instances(g):
        n *= len(g.domain(inst))
    return n


def enumerate_structures(g: DeployedGraph) -> Iterator[Structure]:
    """Lazily enumerate structures in deterministic lexicographic order."""
    free = free_structural_instances(g)
    domains = [g.domain(i) for i in free]
    for idx, combo in enumerate(itertools.product(*domains)):
        yield Structure(idx, dict(zip(free, combo)))


def structure_by_index(g: DeployedGraph, index: int) -> Structure:
    free = free_structural_instances(g)
    domains = [g.domain(i) for i in free]
    assignment: dict[Instance, Value] = {}
    rem = index
    for inst, dom in zip(reversed(free), reversed(domains)):
        rem, digit = divmod(rem, len(dom))
        assignment[inst] = dom[digit]
    if rem:
        raise IndexError(f"structure index {index} out of range")
    return Structure(index, assignment)


def active_parents(g: DeployedGraph, s: Structure, inst: Instance) -> list[Instance]:
    """Deduplicated active parent instances of `inst` under structure `s`."""
    out: list[Instance] = []
    for e in g.edges_into[inst]:
        if e.mech_instance is not None and s.assignment[e.mech_instance] != ACTIVE:
            continue
        if e.lag_instance is not None and s.assignment[e.lag_instance] != e.lag_value:
            continue
        if e.parent not in out:
            out.append(e.parent)
    return out


def _gate_edges(g: DeployedGraph) -> list[tuple[Instance, Instance]]:
    out = []
    for e in g.edges:
        if e.mech_instance is not None:
            out.append((e.mech_instance, e.child))
        if e.lag_instance is not None:
            out.append((e.lag_instance, e.child))
    return sorted(set(out), key=lambda p: (sort_key(p[0]), sort_key(p[1])))


def _static_adjacency(g: DeployedGraph) -> dict[Instance, list[Instance]]:
    adj: dict[Instance, list[Instance]] = {i: [] for i in g.instances}
    seen = set()
    for e in g.edges:
        if (e.parent, e.child) not in seen:
            seen.add((e.parent, e.child))
            adj[e.parent].append(e.child)
    for a, b in _gate_edges(g):
        if (a, b) not in seen:
            seen.add((a, b))
            adj[a].append(b)
    return adj


def _tarjan_sccs(adj: dict[Instance, list[Instance]]) -> list[list[Instance]]:
    index: dict[Instance, int] = {}
    low: dict[Instance, int] = {}
    on_stack: set[Instance] = set()
    stack: list[Instance] = []
    sccs: list[list[Instance]] = []
    counter = itertools.count()

    for root in adj:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = next(counter)
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
    return sccs


@dataclass
class CycleZone:
    """Candidate edges that can participate in a directed cycle."""
    nodes: set[Instance]
    edges: list[CandidateEdge]
    gates: list[Instance]
    # Unconditional cycle edges: gate edges plus candidate edges without free gates.
    fixed_edges: list[tuple[Instance, Instance]]


def cycle_zone(g: DeployedGraph) -> CycleZone:
    adj = _static_adjacency(g)
    scc_of: dict[Instance, int] = {}
    nontrivial: set[int] = set()
    for k, comp in enumerate(_tarjan_sccs(adj)):
        for node in comp:
            scc_of[node] = k
        if len(comp) > 1:
            nontrivial.add(k)
    for e in g.edges:
        # A self-loop makes its node a nontrivial component of its own.
        if e.parent == e.child:
            nontrivial.add(scc_of[e.parent])

    nodes = {n for n, k in scc_of.items() if k in nontrivial}
    edges = [e for e in g.edges
             if e.parent in nodes and e.child in nodes and scc_of[e.parent] == scc_of[e.child]]
    gates: list[Instance] = []
    fixed: list[tuple[Instance, Instance]] = []
    for e in edges:
        egates = [x for x in (e.mech_instance, e.lag_instance) if x is not None]
        for gate in egates:
            if gate not in gates:
                gates.append(gate)
        if not egates:
            fixed.append((e.parent, e.child))
    for a, b in _gate_edges(g):
        if a in nodes and b in nodes and scc_of[a] == scc_of[b]:
            fixed.append((a, b))
    gates.sort(key=sort_key)
    return CycleZone(nodes, edges, gates, fixed)


def _has_cycle(nodes: Iterable[Instance], edges: list[tuple[Instance, Instance]]) -> bool:
    adj: dict[Instance, list[Instance]] = {n: [] for n in nodes}
    indeg = {n: 0 for n in nodes}
    for a, b in edges:
        adj[a].append(b)
        indeg[b] += 1
    ready = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for nxt in adj[n]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    return seen != len(adj)


def config_is_cyclic(zone: CycleZone, values: Mapping[Instance, Value]) -> bool:
    """Cycle test given values for the zone's gates."""
    if not zone.nodes:
        return False
    edges = list(zone.fixed_edges)
    for e in zone.edges:
        if e.mech_instance is None and e.lag_instance is None:
            continue
        if e.mech_instance is not None and values[e.mech_instance] != ACTIVE:
            continue
        if e.lag_instance is not None and values[e.lag_instance] != e.lag_value:
            continue
        edges.append((e.parent, e.child))
    return _has_cycle(zone.nodes, edges)


def is_acyclic(g: DeployedGraph, s: Structure,
               zone: Optional[CycleZone] = None) -> bool:
    """Whether the structure's dependency graph has no directed cycle."""
    if zone is None:
        zone = cycle_zone(g)
    return not config_is_cyclic(zone, s.assignment)


def ancestral_ordering(g: DeployedGraph, s: Structure) -> list[Instance]:
    """Deterministic ordering placing every active parent before its child.

    Repeatedly peels the instances whose remaining active parents are all
    ordered, breaking ties by stamp (unstamped first) then name.
    """
    parents = {inst: set(active_parents(g, s, inst)) for inst in g.instances}
    ordered: list[Instance] = []
    placed: set[Instance] = set()
    remaining = set(g.instances)
    while remaining:
        ready = sorted((i for i in remaining if parents[i] <= placed), key=sort_key)
        if not ready:
            raise CyclicModelError(
                f"structure {s.index} has a dependency cycle among active parents")
        for inst in ready:
            ordered.append(inst)
            placed.add(inst)
            remaining.discard(inst)
    return ordered


def is_ancestral_ordering(g: DeployedGraph, s: Structure,
                          ordering: list[Instance]) -> bool:
    """Validate an ordering against the active-parents-precede rule."""
    if len(ordering) != len(set(ordering)) or set(ordering) != set(g.instances):
        return False
    pos = {inst: k for k, inst in enumerate(ordering)}
    for inst in ordering:
        for p in active_parents(g, s, inst):
            if pos[p] > pos[inst]:
                return False
    return True


@dataclass
class CyclicFamily:
    """One gate configuration that makes structures cyclic."""
    config: tuple[tuple[str, Value], ...]
    witness: Optional[tuple[str, Value]]


@dataclass
class CertificationReport:
    certified: bool
    diagnostics: list[Diagnostic] = field(default_factory=list)
    cyclic_families: list[CyclicFamily] = field(default_factory=list)

    def __str__(self) -> str:
        lines = ["certified" if self.certified else "NOT certified"]
        for fam in self.cyclic_families:
            cfg = ", ".join(f"{n}={v}" for n, v in fam.config)
            if fam.witness:
                lines.append(f"  cyclic family ({cfg}): zero witness {fam.witness[0]}={fam.witness[1]}")
            else:
                lines.append(f"  cyclic family ({cfg}): no zero witness")
        lines.extend(str(d) for d in self.diagnostics)
        return "\n".join(lines)


def _zero_for_all_compatible_rows(g: DeployedGraph, tables, z: Instance, v: Value,
                                  fixed: Mapping[Instance, Value]) -> bool:
    """True when value v of instance z has probability 0 in every CPD row
    consistent with the fixed structural values."""
    table = tables.get(z.var)
    if table is None:
        return False
    vi = table.domain.index(v)
    edges = g.edges_into[z]
    gates = []
    for e in edges:
        for gate in (e.mech_instance, e.lag_instance):
            if gate is not None and gate not in fixed and gate not in gates:
                gates.append(gate)
    for gate_combo in itertools.product(*(g.domain(x) for x in gates)):
        values = dict(fixed)
        values.update(zip(gates, gate_combo))
        active: list[Instance] = []
        for e in edges:
            if e.mech_instance is not None and values[e.mech_instance] != ACTIVE:
                continue
            if e.lag_instance is not None and values[e.lag_instance] != e.lag_value:
                continue
            if e.parent not in active:
                active.append(e.parent)
        tag_of = {e.parent: e.tag for e in edges}
        free_parents = [p for p in active if p not in values]
        for parent_combo in itertools.product(*(g.domain(p) for p in free_parents)):
            pv = dict(values)
            pv.update(zip(free_parents, parent_combo))
            key = context_key((p.var, tag_of[p], pv[p]) for p in active)
            idx = table.row_index(key)
            if idx is None:
                # Unknown row: cannot prove the value impossible.
                return False
            if table.probs[idx][vi] != 0.0:
                return False
    return True


CONFIG_CAP = 1 << 20


def check_well_defined(m: CondensedModel, g: Optional[DeployedGraph] = None,
                       config_cap: int = CONFIG_CAP) -> CertificationReport:
    """Certify that every structure with a dependency cycle has probability 0.

    Fast path: if no candidate edge can sit on a directed cycle, every
    structure is acyclic.  Otherwise the gate configurations of the
    potentially cyclic region are enumerated; each cyclic configuration must
    pin some structural instance to a value whose probability is 0 in every
    CPD row compatible with that configuration.
    """
    from .deploy import deploy_model

    if g is None:
        g = deploy_model(m)
    zone = cycle_zone(g)
    if not zone.nodes:
        return CertificationReport(True)

    if not zone.gates and _has_cycle(zone.nodes, zone.fixed_edges + [
            (e.parent, e.child) for e in zone.edges
            if e.mech_instance is None and e.lag_instance is None]):
        diag = Diagnostic("not-well-defined", "error",
                          "every structure contains an unconditional dependency cycle "
                          "with no zero-probability witness")
        return CertificationReport(False, [diag],
                                   [CyclicFamily((), None)])

    n_configs = 1
    for gate in zone.gates:
        n_configs *= len(g.domain(gate))
    if n_configs > config_cap:
        diag = Diagnostic("certification-cap", "error",
                          f"{n_configs} gate configurations exceed the certification cap "
                          f"{config_cap}")
        return CertificationReport(False, [diag])

    tables = build_tables(m)
    families: list[CyclicFamily] = []
    diags: list[Diagnostic] = []
    certified = True
    for combo in itertools.product(*(g.domain(x) for x in zone.gates)):
        values = dict(zip(zone.gates, combo))
        if not config_is_cyclic(zone, values):
            continue
        witness = None
        for z, v in values.items():
            if _zero_for_all_compatible_rows(g, tables, z, v, values):
                witness = (z.name, v)
                break
        cfg = tuple((i.name, values[i]) for i in zone.gates)
        families.append(CyclicFamily(cfg, witness))
        if witness is None:
            certified = False
            pretty = ", ".join(f"{n}={v}" for n, v in cfg)
            diags.append(Diagnostic("not-well-defined", "error",
                                    f"cyclic structure family ({pretty}) has no "
                                    f"zero-probability witness"))
    return CertificationReport(certified, diags, families)


def certified_cyclic_configs(m: CondensedModel, g: DeployedGraph) -> tuple[
        list[Instance], set[tuple[Value, ...]]]:
    """Gate instances of the cycle zone and the set of their cyclic value
    combinations (certification must already have passed)."""
    zone = cycle_zone(g)
    cyclic: set[tuple[Value, ...]] = set()
    for combo in itertools.product(*(g.domain(x) for x in zone.gates)):
        if config_is_cyclic(zone, dict(zip(zone.gates, combo))):
            cyclic.add(combo)
    return zone.gates, cyclic


def structural_constraint_set(g: DeployedGraph):
    """Lazily yield (structure, joint accessor) pairs.

    The accessor maps a full assignment of the ordinary instances to the
    factorized joint probability under that structure.
    """
    from .exact import joint_probability_given

    for s in enumerate_structures(g):
        def accessor(ordinary_values: Mapping[Instance, Value], _s=s) -> float:
            return joint_probability_given(g, _s, ordinary_values)
        yield s, accessor
