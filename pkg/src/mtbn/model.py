"""Condensed model types, JSON parsing, serialization, and validation.

A condensed model holds ordinary variables, mechanism (arc) variables, lag
variables, a temporal range with a granularity label, context-keyed CPD
tables, and optional declared non-causal associations.  Mechanism and lag
variables are addressed by canonical names built from their endpoints:
``[cause->effect]`` and ``LAG[cause->effect]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import ModelInvalidError, ModelParseError

Value = Union[str, int, bool]

INDEXED = "indexed"
ABSTRACT = "abstract"

CONSTANT_ACTIVE = "constant-active"
DYNAMIC = "dynamic"

ACTIVE = "active"
INACTIVE = "inactive"
MECHANISM_DOMAIN = (ACTIVE, INACTIVE)


def mechanism_name(cause: str, effect: str) -> str:
    return f"[{cause}->{effect}]"


def lag_name(mech: str) -> str:
    return f"LAG{mech}"


@dataclass(frozen=True)
class TemporalRange:
    t1: int
    tn: int

    def points(self) -> range:
        return range(self.t1, self.tn + 1)

    def __len__(self) -> int:
        return self.tn - self.t1 + 1


@dataclass(frozen=True)
class OrdinaryVariable:
    name: str
    domain: tuple[Value, ...]
    temporality: str = INDEXED
    manipulates: Optional[str] = None

    @property
    def indexed(self) -> bool:
        return self.temporality == INDEXED


@dataclass(frozen=True)
class MechanismVariable:
    cause: str
    effect: str
    constancy: str = CONSTANT_ACTIVE

    @property
    def name(self) -> str:
        return mechanism_name(self.cause, self.effect)

    @property
    def dynamic(self) -> bool:
        return self.constancy == DYNAMIC

    @property
    def domain(self) -> tuple[Value, ...]:
        return MECHANISM_DOMAIN


@dataclass(frozen=True)
class LagVariable:
    mechanism: str
    constant: Optional[int] = None
    domain: tuple[int, ...] = ()

    @property
    def name(self) -> str:
        return lag_name(self.mechanism)

    @property
    def dynamic(self) -> bool:
        return self.constant is None

    def values(self) -> tuple[int, ...]:
        if self.constant is not None:
            return (self.constant,)
        return self.domain


@dataclass(frozen=True)
class ContextEntry:
    parent: str
    lag: int
    value: Value


BOUNDARY = "boundary"
# A row context is either the boundary marker or a sorted tuple of entries.
Context = Union[str, tuple[ContextEntry, ...]]


def canonical_context(entries: Iterable[ContextEntry]) -> tuple[ContextEntry, ...]:
    return tuple(sorted(entries, key=lambda e: (e.parent, e.lag, str(e.value))))


@dataclass(frozen=True)
class CpdRow:
    context: Context
    probabilities: tuple[float, ...]


@dataclass
class Cpd:
    variable: str
    rows: list[CpdRow]


@dataclass(frozen=True)
class NoncausalArc:
    a: str
    b: str
    joint_table: tuple[tuple[float, ...], ...]


@dataclass
class CondensedModel:
    range: TemporalRange
    granularity: str
    variables: dict[str, OrdinaryVariable]
    mechanisms: dict[str, MechanismVariable]
    lags: dict[str, LagVariable]
    cpds: dict[str, Cpd]
    noncausal: list[NoncausalArc] = field(default_factory=list)

    def variable_domain(self, name: str) -> tuple[Value, ...]:
        """Domain of any named variable, structural ones included."""
        if name in self.variables:
            return self.variables[name].domain
        if name in self.mechanisms:
            return MECHANISM_DOMAIN
        if name in self.lags:
            return tuple(self.lags[name].values())
        raise KeyError(name)

    def has_variable(self, name: str) -> bool:
        return name in self.variables or name in self.mechanisms or name in self.lags

    def lag_of(self, mech: str) -> Optional[LagVariable]:
        return self.lags.get(lag_name(mech))

    def is_stamped(self, name: str) -> bool:
        """Whether instances of this variable carry time stamps.

        Structural variables inherit stampedness from their cause chain.
        """
        seen = set()
        while True:
            if name in seen:
                raise ModelInvalidError(f"cause chain of {name!r} loops")
            seen.add(name)
            if name in self.variables:
                return self.variables[name].indexed
            if name in self.mechanisms:
                name = self.mechanisms[name].cause
            elif name in self.lags:
                name = self.mechanisms[self.lags[name].mechanism].cause
            else:
                raise KeyError(name)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    message: str
    subject: str = ""

    def __str__(self) -> str:
        where = f" [{self.subject}]" if self.subject else ""
        return f"{self.severity}: {self.code}{where}: {self.message}"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ModelParseError(msg)


def _as_value(v) -> Value:
    _require(isinstance(v, (str, int, bool)), f"domain values must be scalars, got {v!r}")
    return v


def parse_model(text: str) -> CondensedModel:
    """Parse model JSON text into a CondensedModel.

    Raises ModelParseError on syntax errors, duplicate names, and dangling
    name references.  Semantic problems (missing rows, bad normalization,
    ill-defined structures) are left to validate_model.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelParseError(f"syntax error at line {e.lineno} column {e.colno}: {e.msg}") from None
    _require(isinstance(raw, dict), "top level must be a JSON object")

    rng = raw.get("range")
    _require(isinstance(rng, dict) and "t1" in rng and "tn" in rng, "range must give t1 and tn")
    _require(isinstance(rng["t1"], int) and isinstance(rng["tn"], int), "range endpoints must be integers")
    _require(rng["t1"] <= rng["tn"], "range requires t1 <= tn")
    trange = TemporalRange(rng["t1"], rng["tn"])

    granularity = raw.get("granularity", "")
    _require(isinstance(granularity, str), "granularity must be a string label")

    variables: dict[str, OrdinaryVariable] = {}
    for item in raw.get("variables", []):
        _require(isinstance(item, dict) and "name" in item and "domain" in item,
                 "each variable needs name and domain")
        name = item["name"]
        _require(isinstance(name, str) and name, "variable name must be a non-empty string")
        _require(name not in variables, f"duplicate variable name {name!r}")
        domain = tuple(_as_value(v) for v in item["domain"])
        _require(len(domain) == len(set(domain)), f"duplicate domain value in {name!r}")
        temporality = item.get("temporality", INDEXED)
        _require(temporality in (INDEXED, ABSTRACT),
                 f"temporality of {name!r} must be {INDEXED!r} or {ABSTRACT!r}")
        manipulates = item.get("manipulates")
        _require(manipulates is None or isinstance(manipulates, str),
                 f"manipulates flag of {name!r} must name a variable")
        variables[name] = OrdinaryVariable(name, domain, temporality, manipulates)

    mechanisms: dict[str, MechanismVariable] = {}
    for item in raw.get("mechanisms", []):
        _require(isinstance(item, dict) and "cause" in item and "effect" in item,
                 "each mechanism needs cause and effect")
        constancy = item.get("constancy", CONSTANT_ACTIVE)
        _require(constancy in (CONSTANT_ACTIVE, DYNAMIC),
                 f"constancy must be {CONSTANT_ACTIVE!r} or {DYNAMIC!r}")
        mech = MechanismVariable(item["cause"], item["effect"], constancy)
        _require(mech.name not in mechanisms, f"duplicate mechanism {mech.name}")
        mechanisms[mech.name] = mech

    lags: dict[str, LagVariable] = {}
    for item in raw.get("lags", []):
        _require(isinstance(item, dict) and "mechanism" in item, "each lag needs a mechanism")
        mech = item["mechanism"]
        if "constant" in item:
            _require(isinstance(item["constant"], int) and item["constant"] >= 0,
                     f"constant lag of {mech} must be a non-negative integer")
            lag = LagVariable(mech, constant=item["constant"])
        else:
            _require("domain" in item, f"lag of {mech} needs a constant or a domain")
            dom = tuple(item["domain"])
            _require(all(isinstance(v, int) and v >= 0 for v in dom),
                     f"lag domain of {mech} must hold non-negative integers")
            _require(len(dom) == len(set(dom)) and len(dom) >= 1,
                     f"lag domain of {mech} must be non-empty without duplicates")
            lag = LagVariable(mech, domain=dom)
        _require(lag.name not in lags, f"duplicate lag for mechanism {mech}")
        lags[lag.name] = lag

    known = set(variables) | set(mechanisms) | set(lags)

    def check_ref(name: str, role: str) -> None:
        _require(name in known, f"dangling {role} reference {name!r}")

    for mech in mechanisms.values():
        check_ref(mech.cause, "cause")
        check_ref(mech.effect, "effect")
    for lag in lags.values():
        _require(lag.mechanism in mechanisms, f"lag references unknown mechanism {lag.mechanism!r}")
    for var in variables.values():
        if var.manipulates is not None:
            check_ref(var.manipulates, "manipulates")

    cpds: dict[str, Cpd] = {}
    for item in raw.get("cpds", []):
        _require(isinstance(item, dict) and "variable" in item and "rows" in item,
                 "each cpd needs variable and rows")
        name = item["variable"]
        check_ref(name, "cpd variable")
        _require(name not in cpds, f"duplicate cpd for {name!r}")
        rows: list[CpdRow] = []
        seen_contexts = set()
        for r in item["rows"]:
            _require(isinstance(r, dict) and "context" in r and "probabilities" in r,
                     f"each row of {name!r} needs context and probabilities")
            ctx_raw = r["context"]
            if ctx_raw == BOUNDARY:
                ctx: Context = BOUNDARY
            else:
                _require(isinstance(ctx_raw, list) and ctx_raw,
                         f"context of {name!r} must be {BOUNDARY!r} or a non-empty list")
                entries = []
                for e in ctx_raw:
                    _require(isinstance(e, dict) and {"parent", "lag", "value"} <= set(e),
                             f"context entries of {name!r} need parent, lag, value")
                    check_ref(e["parent"], "context parent")
                    _require(isinstance(e["lag"], int), f"context lag in {name!r} must be an integer")
                    entries.append(ContextEntry(e["parent"], e["lag"], _as_value(e["value"])))
                ctx = canonical_context(entries)
                _require(len(ctx) == len({(e.parent, e.lag) for e in ctx}),
                         f"context of {name!r} repeats a parent at the same lag")
            _require(ctx not in seen_contexts, f"duplicate context row for {name!r}")
            seen_contexts.add(ctx)
            probs = tuple(float(p) for p in r["probabilities"])
            rows.append(CpdRow(ctx, probs))
        cpds[name] = Cpd(name, rows)

    noncausal: list[NoncausalArc] = []
    for item in raw.get("noncausal", []):
        _require(isinstance(item, dict) and {"a", "b", "joint_table"} <= set(item),
                 "each noncausal entry needs a, b, joint_table")
        check_ref(item["a"], "noncausal member")
        check_ref(item["b"], "noncausal member")
        table = tuple(tuple(float(p) for p in row) for row in item["joint_table"])
        noncausal.append(NoncausalArc(item["a"], item["b"], table))

    return CondensedModel(trange, granularity, variables, mechanisms, lags, cpds, noncausal)


def parse_model_file(path: str) -> CondensedModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _context_to_json(ctx: Context):
    if ctx == BOUNDARY:
        return BOUNDARY
    return [{"parent": e.parent, "lag": e.lag, "value": e.value} for e in ctx]


def model_to_dict(m: CondensedModel) -> dict:
    out: dict = {
        "range": {"t1": m.range.t1, "tn": m.range.tn},
        "granularity": m.granularity,
        "variables": [],
        "mechanisms": [],
        "lags": [],
        "cpds": [],
    }
    for v in m.variables.values():
        item = {"name": v.name, "domain": list(v.domain), "temporality": v.temporality}
        if v.manipulates is not None:
            item["manipulates"] = v.manipulates
        out["variables"].append(item)
    for mech in m.mechanisms.values():
        out["mechanisms"].append(
            {"cause": mech.cause, "effect": mech.effect, "constancy": mech.constancy})
    for lag in m.lags.values():
        if lag.constant is not None:
            out["lags"].append({"mechanism": lag.mechanism, "constant": lag.constant})
        else:
            out["lags"].append({"mechanism": lag.mechanism, "domain": list(lag.domain)})
    for cpd in m.cpds.values():
        out["cpds"].append({
            "variable": cpd.variable,
            "rows": [{"context": _context_to_json(r.context),
                      "probabilities": list(r.probabilities)} for r in cpd.rows],
        })
    if m.noncausal:
        out["noncausal"] = [{"a": nc.a, "b": nc.b, "joint_table": [list(r) for r in nc.joint_table]}
                            for nc in m.noncausal]
    return out


def serialize_model(m: CondensedModel) -> str:
    return json.dumps(model_to_dict(m), indent=2, ensure_ascii=False) + "\n"


def with_temporal_range(m: CondensedModel, t1: int, tn: int) -> CondensedModel:
    """Copy of the model with a different temporal range, tables unchanged."""
    if t1 > tn:
        raise ModelInvalidError("range requires t1 <= tn")
    return CondensedModel(TemporalRange(t1, tn), m.granularity, dict(m.variables),
                          dict(m.mechanisms), dict(m.lags), dict(m.cpds), list(m.noncausal))


@dataclass(frozen=True)
class StructuralMember:
    name: str
    kind: str  # "mechanism" or "lag"
    constant: bool
    constant_value: Optional[Value] = None


def structural_variable_set(m: CondensedModel) -> list[StructuralMember]:
    """All mechanism and lag variables in declaration order, constants flagged."""
    out: list[StructuralMember] = []
    for mech in m.mechanisms.values():
        if mech.dynamic:
            out.append(StructuralMember(mech.name, "mechanism", False))
        else:
            out.append(StructuralMember(mech.name, "mechanism", True, ACTIVE))
        lag = m.lag_of(mech.name)
        if lag is None:
            continue
        if lag.dynamic:
            out.append(StructuralMember(lag.name, "lag", False))
        else:
            out.append(StructuralMember(lag.name, "lag", True, lag.constant))
    return out


def validate_model(m: CondensedModel, certify: bool = True) -> list[Diagnostic]:
    """Full semantic validation.

    Returns an empty list iff every graph reference resolves, every variable
    that needs a CPD has a complete normalized one, and (when certify is set)
    structure certification passes.  Unreachable rows come back as warnings
    and do not make the model invalid.
    """
    from .cpd import validate_cpds
    from .deploy import deploy_model
    from .structure import check_well_defined

    diags: list[Diagnostic] = []

    for var in m.variables.values():
        if len(var.domain) < 2:
            diags.append(Diagnostic("domain-size", "error",
                                    f"{var.name} needs at least 2 domain values", var.name))
        if var.manipulates is not None:
            target_dom = m.variable_domain(var.manipulates)
            want = tuple(target_dom) + ("unset",)
            if var.domain != want:
                diags.append(Diagnostic("manipulation-domain", "error",
                                        f"{var.name} must have domain {list(want)}", var.name))

    for mech in m.mechanisms.values():
        lag = m.lag_of(mech.name)
        if lag is None:
            diags.append(Diagnostic("missing-lag", "error",
                                    f"mechanism {mech.name} has no lag variable", mech.name))
            continue
        effect_constant = (mech.effect in m.mechanisms and not m.mechanisms[mech.effect].dynamic) or \
                          (mech.effect in m.lags and not m.lags[mech.effect].dynamic)
        if effect_constant:
            diags.append(Diagnostic("constant-effect", "error",
                                    f"mechanism {mech.name} points into a constant structural variable",
                                    mech.name))
        try:
            cause_stamped = m.is_stamped(mech.cause)
            effect_stamped = m.is_stamped(mech.effect)
        except ModelInvalidError as e:
            diags.append(Diagnostic("cause-chain", "error", str(e), mech.name))
            continue
        if not (cause_stamped and effect_stamped):
            # Unstamped endpoints admit no temporal offset.
            if lag.dynamic or lag.constant != 0:
                diags.append(Diagnostic("abstract-lag", "error",
                                        f"{lag.name} must be constant 0 because an endpoint of "
                                        f"{mech.name} is not time-indexed", lag.name))

    for name, cpd in m.cpds.items():
        dom = m.variable_domain(name)
        for row in cpd.rows:
            if len(row.probabilities) != len(dom):
                diags.append(Diagnostic("row-shape", "error",
                                        f"row of {name} has {len(row.probabilities)} entries, "
                                        f"domain has {len(dom)}", name))
            if any(p < 0 or p > 1 for p in row.probabilities):
                diags.append(Diagnostic("probability-range", "error",
                                        f"row of {name} has entries outside [0, 1]", name))
            if row.context != BOUNDARY:
                for e in row.context:
                    pd = m.variable_domain(e.parent)
                    if e.value not in pd:
                        diags.append(Diagnostic("unknown-context-value", "error",
                                                f"row of {name} conditions {e.parent} on {e.value!r} "
                                                f"outside its domain", name))

    for member in structural_variable_set(m):
        if not member.constant and member.name not in m.cpds:
            diags.append(Diagnostic("missing-cpd", "error",
                                    f"dynamic structural variable {member.name} has no CPD",
                                    member.name))
    for var in m.variables.values():
        if var.name not in m.cpds:
            diags.append(Diagnostic("missing-cpd", "error",
                                    f"ordinary variable {var.name} has no CPD", var.name))

    for nc in m.noncausal:
        for member in (nc.a, nc.b):
            if member not in m.variables:
                diags.append(Diagnostic("noncausal-member", "error",
                                        f"noncausal member {member} must be an ordinary variable",
                                        member))
        if nc.a in m.variables and nc.b in m.variables:
            rows, cols = len(m.variables[nc.a].domain), len(m.variables[nc.b].domain)
            shape_ok = len(nc.joint_table) == rows and all(len(r) == cols for r in nc.joint_table)
            if not shape_ok:
                diags.append(Diagnostic("noncausal-shape", "error",
                                        f"joint table of {nc.a}-{nc.b} must be {rows}x{cols}",
                                        f"{nc.a}-{nc.b}"))
            else:
                total = sum(sum(r) for r in nc.joint_table)
                if abs(total - 1.0) > 1e-9 or any(p < 0 for r in nc.joint_table for p in r):
                    diags.append(Diagnostic("noncausal-normalization", "error",
                                            f"joint table of {nc.a}-{nc.b} must be a distribution",
                                            f"{nc.a}-{nc.b}"))

    if any(d.severity == "error" for d in diags):
        return diags

    graph = deploy_model(m)
    diags.extend(validate_cpds(m, graph))
    if certify and not any(d.severity == "error" for d in diags):
        report = check_well_defined(m, graph)
        if not report.certified:
            diags.extend(report.diagnostics)
    return diags


def require_valid(m: CondensedModel, certify: bool = True) -> None:
    problems = [d for d in validate_model(m, certify=certify) if d.severity == "error"]
    if problems:
        summary = "; ".join(str(d) for d in problems[:5])
        raise ModelInvalidError(f"model failed validation: {summary}")
