"""Reusable model fragments: intervals, abstractions, manipulation variables,
interventions, and conversion of declared non-causal associations.

Every builder returns a new condensed model; the input model is never
mutated.  Builders only add constant-active, lag-0 arcs, so they never grow
the structure space.
"""

from __future__ import annotations

import itertools

from .cpd import NORMALIZATION_TOL
from .deploy import candidate_parents, deploy_model, sort_key
from .errors import InterventionError, ModelInvalidError
from .model import (ABSTRACT, BOUNDARY, CONSTANT_ACTIVE, CondensedModel,
                    ContextEntry, Cpd, CpdRow, LagVariable, MechanismVariable,
                    OrdinaryVariable, Value, canonical_context, lag_name,
                    mechanism_name)

UNSET = "unset"

RELATIONS = ("before", "meets", "overlaps", "coincides", "is_overlapped_by",
             "follows", "after")

ABSTRACTION_ROW_CAP = 200000


def _copy(m: CondensedModel) -> CondensedModel:
    return CondensedModel(m.range, m.granularity, dict(m.variables),
                          dict(m.mechanisms), dict(m.lags),
                          {k: Cpd(c.variable, list(c.rows)) for k, c in m.cpds.items()},
                          list(m.noncausal))


def _add_fixed_arc(m: CondensedModel, cause: str, effect: str, lag: int = 0) -> None:
    mech = MechanismVariable(cause, effect, CONSTANT_ACTIVE)
    if mech.name in m.mechanisms:
        raise ModelInvalidError(f"{mech.name} already declared")
    m.mechanisms[mech.name] = mech
    m.lags[lag_name(mech.name)] = LagVariable(mech.name, constant=lag)


def _point(domain, value) -> tuple[float, ...]:
    return tuple(1.0 if x == value else 0.0 for x in domain)


def make_interval(m: CondensedModel, name: str, point_domain,
                  start_prior=None) -> CondensedModel:
    """Add abstract START/END/DUR variables for a named episode.

    END is constrained to never precede START; DUR is the deterministic
    difference.  start_prior may be a value (point mass), a dict of
    probabilities over point_domain, or None for uniform.
    """
    pts = tuple(int(p) for p in point_domain)
    if len(pts) < 2 or any(b <= a for a, b in zip(pts, pts[1:])):
        raise ModelInvalidError(
            "interval point domain must be strictly ascending with at least 2 points")
    if pts[0] < m.range.t1 or pts[-1] > m.range.tn:
        raise ModelInvalidError(
            f"interval points must lie within the temporal range "
            f"[{m.range.t1}, {m.range.tn}]")
    start, end, dur = f"{name}_START", f"{name}_END", f"{name}_DUR"
    for v in (start, end, dur):
        if m.has_variable(v):
            raise ModelInvalidError(f"{v} already declared")

    out = _copy(m)
    durs = tuple(range(pts[-1] - pts[0] + 1))
    out.variables[start] = OrdinaryVariable(start, pts, ABSTRACT)
    out.variables[end] = OrdinaryVariable(end, pts, ABSTRACT)
    out.variables[dur] = OrdinaryVariable(dur, durs, ABSTRACT)
    _add_fixed_arc(out, start, end)
    _add_fixed_arc(out, start, dur)
    _add_fixed_arc(out, end, dur)

    if start_prior is None:
        probs = tuple(1.0 / len(pts) for _ in pts)
    elif isinstance(start_prior, dict):
        probs = tuple(float(start_prior.get(p, 0.0)) for p in pts)
        if abs(sum(probs) - 1.0) > NORMALIZATION_TOL:
            raise ModelInvalidError("start prior must sum to 1 over the point domain")
    else:
        if start_prior not in pts:
            raise ModelInvalidError(f"start prior value {start_prior!r} outside point domain")
        probs = _point(pts, start_prior)
    out.cpds[start] = Cpd(start, [CpdRow(BOUNDARY, probs)])

    end_rows = []
    for s in pts:
        width = sum(1 for p in pts if p >= s)
        prob = tuple(1.0 / width if p >= s else 0.0 for p in pts)
        end_rows.append(CpdRow(canonical_context([ContextEntry(start, 0, s)]), prob))
    out.cpds[end] = Cpd(end, end_rows)

    dur_rows = []
    for s in pts:
        for e in pts:
            # contexts with e < s carry zero mass; the filler keeps rows total
            d = e - s if e >= s else 0
            ctx = canonical_context([ContextEntry(start, 0, s), ContextEntry(end, 0, e)])
            dur_rows.append(CpdRow(ctx, _point(durs, d)))
    out.cpds[dur] = Cpd(dur, dur_rows)
    return out


def interval_relation(s1: int, e1: int, s2: int, e2: int) -> str:
    """Classify how [s1,e1] sits relative to [s2,e2].

    Exactly one label comes back for every endpoint combination, and swapping
    the intervals maps before<->after, meets<->follows and
    overlaps<->is_overlapped_by while fixing coincides.
    """
    if e1 < s1 or e2 < s2:
        raise ValueError("interval endpoints must satisfy start <= end")
    if s1 == s2 and e1 == e2:
        return "coincides"
    if e1 < s2:
        return "before"
    if s1 > e2:
        return "after"
    if e1 == s2:
        return "meets"
    if s1 == e2:
        return "follows"
    return "overlaps" if (s1, e1) < (s2, e2) else "is_overlapped_by"


def make_interval_relation(m: CondensedModel, name: str, first, second) -> CondensedModel:
    """Add an abstract variable giving the relation between two intervals.

    first and second are (start, end) pairs of abstract integer variables.
    """
    a_s, a_e = first
    b_s, b_e = second
    for v in (a_s, a_e, b_s, b_e):
        var = m.variables.get(v)
        if var is None or var.indexed:
            raise ModelInvalidError(f"{v} must be an abstract variable")
        if not all(isinstance(x, int) for x in var.domain):
            raise ModelInvalidError(f"{v} needs an integer domain")
    if m.has_variable(name):
        raise ModelInvalidError(f"{name} already declared")

    out = _copy(m)
    out.variables[name] = OrdinaryVariable(name, RELATIONS, ABSTRACT)
    parents: list[str] = []
    for v in (a_s, a_e, b_s, b_e):
        if v not in parents:
            parents.append(v)
            _add_fixed_arc(out, v, name)

    rows = []
    for combo in itertools.product(*(m.variables[p].domain for p in parents)):
        env = dict(zip(parents, combo))
        s1, e1, s2, e2 = env[a_s], env[a_e], env[b_s], env[b_e]
        # endpoint combos with end < start carry zero mass; normalize them
        # so the row set stays total
        if e1 < s1:
            s1, e1 = e1, s1
        if e2 < s2:
            s2, e2 = e2, s2
        rel = interval_relation(s1, e1, s2, e2)
        ctx = canonical_context([ContextEntry(p, 0, env[p]) for p in parents])
        rows.append(CpdRow(ctx, _point(RELATIONS, rel)))
    out.cpds[name] = Cpd(name, rows)
    return out


def make_abstraction(m: CondensedModel, name: str, sources, domain,
                     predicate) -> CondensedModel:
    """Add an abstract variable deterministically computed from named instances.

    sources are instance references ("G@3", or a bare name for abstract
    variables); predicate maps {reference: value} to a label in domain.  The
    new variable gets arcs from every source variable, so its rows range over
    all instances of those variables, not just the ones the predicate reads.
    """
    dom = tuple(domain)
    if len(dom) < 2:
        raise ModelInvalidError("abstraction domain needs at least 2 labels")
    if m.has_variable(name):
        raise ModelInvalidError(f"{name} already declared")

    out = _copy(m)
    out.variables[name] = OrdinaryVariable(name, dom, ABSTRACT)
    source_vars: list[str] = []
    for ref in sources:
        var = ref.rpartition("@")[0] if "@" in ref else ref
        if var not in out.variables:
            raise ModelInvalidError(f"abstraction source {ref!r} is not an ordinary variable")
        if var not in source_vars:
            source_vars.append(var)
            _add_fixed_arc(out, var, name)

    g = deploy_model(out)
    child = g.resolve(name)
    edges = candidate_parents(g, child)
    parent_insts = sorted({(e.parent, e.tag) for e in edges},
                          key=lambda pt: sort_key(pt[0]))
    position = {}
    for ref in sources:
        inst = g.resolve(ref)
        for k, (p, _) in enumerate(parent_insts):
            if p == inst:
                position[ref] = k
                break
        else:
            raise ModelInvalidError(f"source {ref!r} did not deploy as a parent")

    total = 1
    for p, _ in parent_insts:
        total *= len(g.domain(p))
        if total > ABSTRACTION_ROW_CAP:
            raise ModelInvalidError(
                f"abstraction over {len(parent_insts)} instances needs more than "
                f"{ABSTRACTION_ROW_CAP} rows; shorten the temporal range")

    rows = []
    for combo in itertools.product(*(g.domain(p) for p, _ in parent_insts)):
        env = {ref: combo[k] for ref, k in position.items()}
        label = predicate(env)
        if label not in dom:
            raise ModelInvalidError(
                f"predicate returned {label!r}, outside the abstraction domain")
        ctx = canonical_context([ContextEntry(p.var, tag, v)
                                 for (p, tag), v in zip(parent_insts, combo)])
        rows.append(CpdRow(ctx, _point(dom, label)))
    out.cpds[name] = Cpd(name, rows)
    return out


def make_manipulation(m: CondensedModel, target: str,
                      name: str | None = None) -> CondensedModel:
    """Attach a manipulation variable to target.

    The new variable shares target's temporality, ranges over target's domain
    plus "unset", and feeds target through a constant-active lag-0 arc.
    While it stays "unset" target keeps its original rows; any other value
    overrides target deterministically.
    """
    tvar = m.variables.get(target)
    if tvar is None:
        raise ModelInvalidError(f"unknown manipulation target {target!r}")
    if tvar.manipulates is not None:
        raise ModelInvalidError(f"{target} is itself a manipulation variable")
    for v in m.variables.values():
        if v.manipulates == target:
            raise ModelInvalidError(f"{target} already has manipulation variable {v.name}")
    dummy = name or f"{target}_MANIP"
    if m.has_variable(dummy):
        raise ModelInvalidError(f"{dummy} already declared")
    old = m.cpds.get(target)
    if old is None:
        raise ModelInvalidError(f"{target} has no CPD to extend")

    out = _copy(m)
    ddom = tuple(tvar.domain) + (UNSET,)
    out.variables[dummy] = OrdinaryVariable(dummy, ddom, tvar.temporality,
                                            manipulates=target)
    _add_fixed_arc(out, dummy, target)
    out.cpds[dummy] = Cpd(dummy, [CpdRow(BOUNDARY, _point(ddom, UNSET))])

    rows = []
    for row in old.rows:
        base = [] if row.context == BOUNDARY else list(row.context)
        ctx = canonical_context(base + [ContextEntry(dummy, 0, UNSET)])
        rows.append(CpdRow(ctx, row.probabilities))
        for v in tvar.domain:
            ctx = canonical_context(base + [ContextEntry(dummy, 0, v)])
            rows.append(CpdRow(ctx, _point(tvar.domain, v)))
    out.cpds[target] = Cpd(target, rows)
    return out


def apply_intervention(m: CondensedModel, bindings) -> CondensedModel:
    """Fix target variables to chosen values by graph surgery.

    Every other arc into each target is removed (with its lag, and any arcs
    that pointed at the removed structural variables), the manipulation
    variable's prior becomes a point mass on the chosen value, and the
    target's table reduces to the deterministic override.
    """
    out = _copy(m)
    for target, value in bindings.items():
        tvar = out.variables.get(target)
        if tvar is None:
            raise InterventionError(f"unknown intervention target {target!r}")
        dummies = [v.name for v in out.variables.values() if v.manipulates == target]
        if not dummies:
            raise InterventionError(
                f"{target} has no manipulation variable; call make_manipulation first")
        dummy = dummies[0]
        if value not in tvar.domain:
            matches = [x for x in tvar.domain if str(x) == str(value)]
            if len(matches) != 1:
                raise InterventionError(f"{value!r} is not in the domain of {target}")
            value = matches[0]

        doomed = [mech.name for mech in out.mechanisms.values()
                  if mech.effect == target and mech.cause != dummy]
        while doomed:
            nm = doomed.pop()
            if nm not in out.mechanisms:
                continue
            ln = lag_name(nm)
            del out.mechanisms[nm]
            out.cpds.pop(nm, None)
            if ln in out.lags:
                del out.lags[ln]
                out.cpds.pop(ln, None)
            doomed.extend(mk.name for mk in out.mechanisms.values()
                          if mk.effect in (nm, ln))

        ddom = out.variables[dummy].domain
        out.cpds[dummy] = Cpd(dummy, [CpdRow(BOUNDARY, _point(ddom, value))])
        rows = [CpdRow(canonical_context([ContextEntry(dummy, 0, v)]),
                       _point(tvar.domain, v))
                for v in tvar.domain]
        # the unset context is unreachable once the prior is a point mass;
        # the uniform filler keeps the row set total
        rows.append(CpdRow(canonical_context([ContextEntry(dummy, 0, UNSET)]),
                           tuple(1.0 / len(tvar.domain) for _ in tvar.domain)))
        out.cpds[target] = Cpd(target, rows)
    return out


def transform_noncausal(m: CondensedModel) -> CondensedModel:
    """Replace each declared non-causal association with a hidden common parent.

    The hidden variable ranges over joint value labels "va|vb" with the
    declared table as its prior, and each member becomes a deterministic
    projection of it.  Members keeping any causal arc (other than their own
    manipulation variable) are rejected: the association would contradict the
    declared dependency structure.
    """
    out = _copy(m)
    for nc in list(out.noncausal):
        for member in (nc.a, nc.b):
            bad = [mk.name for mk in out.mechanisms.values()
                   if mk.effect == member
                   and not (mk.cause in out.variables
                            and out.variables[mk.cause].manipulates == member)]
            if bad:
                raise ModelInvalidError(
                    f"{member} keeps causal arcs ({', '.join(sorted(bad))}); a "
                    f"declared association requires members without causal parents")
        ta, tb = out.variables[nc.a], out.variables[nc.b]
        if ta.temporality != tb.temporality:
            raise ModelInvalidError(
                f"association members {nc.a} and {nc.b} must share temporality")
        hname = f"H_{nc.a}_{nc.b}"
        if out.has_variable(hname):
            raise ModelInvalidError(f"{hname} already declared")
        da, db = ta.domain, tb.domain
        hdom = tuple(f"{va}|{vb}" for va in da for vb in db)
        out.variables[hname] = OrdinaryVariable(hname, hdom, ta.temporality)
        _add_fixed_arc(out, hname, nc.a)
        _add_fixed_arc(out, hname, nc.b)
        flat = tuple(float(nc.joint_table[i][j])
                     for i in range(len(da)) for j in range(len(db)))
        out.cpds[hname] = Cpd(hname, [CpdRow(BOUNDARY, flat)])

        for member, dm, pick in ((nc.a, da, 0), (nc.b, db, 1)):
            dummies = [v.name for v in out.variables.values()
                       if v.manipulates == member]
            rows = []
            for hi, pair in enumerate(itertools.product(da, db)):
                mv = pair[pick]
                base = [ContextEntry(hname, 0, hdom[hi])]
                if dummies:
                    dummy = dummies[0]
                    ctx = canonical_context(base + [ContextEntry(dummy, 0, UNSET)])
                    rows.append(CpdRow(ctx, _point(dm, mv)))
                    for dv in dm:
                        ctx = canonical_context(base + [ContextEntry(dummy, 0, dv)])
                        rows.append(CpdRow(ctx, _point(dm, dv)))
                else:
                    rows.append(CpdRow(canonical_context(base), _point(dm, mv)))
            out.cpds[member] = Cpd(member, rows)
        out.noncausal.remove(nc)
    return out
