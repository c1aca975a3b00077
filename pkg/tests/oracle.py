"""Independent chain-rule enumerator used to cross-check the package.

Works directly on the raw fixture JSON and implements its own unrolling and
row matching; it never imports the package under test.  Cyclic value
combinations need no special casing here: in a well-defined model every such
combination hits a zero row, so its product vanishes on its own.
"""

import itertools


def _val(v):
    return v


class Oracle:
    def __init__(self, doc):
        self.t1 = doc["range"]["t1"]
        self.tn = doc["range"]["tn"]
        self.vars = {v["name"]: v for v in doc["variables"]}
        self.mechs = {}
        for item in doc.get("mechanisms", []):
            self.mechs[f"[{item['cause']}->{item['effect']}]"] = item
        self.lag_of = {}
        for item in doc.get("lags", []):
            self.lag_of[item["mechanism"]] = item
        self.rows = {}
        for c in doc.get("cpds", []):
            table = {}
            for r in c["rows"]:
                if r["context"] == "boundary":
                    key = frozenset()
                else:
                    key = frozenset((e["parent"], e["lag"], _val(e["value"]))
                                    for e in r["context"])
                table[key] = list(r["probabilities"])
            self.rows[c["variable"]] = table

        self.names = []
        self.domains = {}
        for name, v in self.vars.items():
            self._add(name, tuple(v["domain"]))
        for name, item in self.mechs.items():
            if item.get("constancy", "constant-active") == "dynamic":
                self._add(name, ("active", "inactive"))
        for mech, item in self.lag_of.items():
            if "constant" not in item:
                self._add("LAG" + mech, tuple(item["domain"]))

        self.templates = {n: [] for n in self.names}
        for mname, item in self.mechs.items():
            effect = item["effect"]
            if effect in self.mechs and self.mechs[effect].get("constancy", "constant-active") != "dynamic":
                continue
            if effect.startswith("LAG") and effect[3:] in self.lag_of and \
                    "constant" in self.lag_of[effect[3:]]:
                continue
            lag = self.lag_of[mname]
            lag_values = [lag["constant"]] if "constant" in lag else list(lag["domain"])
            dynamic = item.get("constancy", "constant-active") == "dynamic"
            lag_dynamic = "constant" not in lag
            for cs in self._stamps(item["cause"]):
                gate_m = self._iname(mname, cs) if dynamic else None
                gate_l = self._iname("LAG" + mname, cs) if lag_dynamic else None
                for lv in lag_values:
                    for child, tag in self._targets(item["cause"], effect, cs, lv):
                        self.templates[child].append(
                            (self._iname(item["cause"], cs), item["cause"],
                             gate_m, gate_l, lv, tag))

    def _add(self, var, domain):
        for s in self._stamps(var):
            self.names.append(self._iname(var, s))
            self.domains[self._iname(var, s)] = domain

    def _iname(self, var, stamp):
        return var if stamp is None else f"{var}@{stamp}"

    def _stamped(self, name):
        while True:
            if name in self.vars:
                return self.vars[name].get("temporality", "indexed") == "indexed"
            if name in self.mechs:
                name = self.mechs[name]["cause"]
            elif name.startswith("LAG") and name[3:] in self.mechs:
                name = self.mechs[name[3:]]["cause"]
            else:
                raise KeyError(name)

    def _stamps(self, var):
        if self._stamped(var):
            return list(range(self.t1, self.tn + 1))
        return [None]

    def _targets(self, cause, effect, cs, lv):
        cause_stamped = cs is not None
        effect_stamped = self._stamped(effect)
        if cause_stamped and effect_stamped:
            ts = cs + lv
            if self.t1 <= ts <= self.tn:
                yield self._iname(effect, ts), lv
        elif effect_stamped:
            for t in range(self.t1, self.tn + 1):
                yield self._iname(effect, t), 0
        else:
            yield effect, cs if cs is not None else 0

    def joint(self, assignment):
        p = 1.0
        for name in self.names:
            var = name.rpartition("@")[0] if "@" in name else name
            ctx = set()
            for parent, pvar, gate_m, gate_l, lv, tag in self.templates[name]:
                if gate_m is not None and assignment[gate_m] != "active":
                    continue
                if gate_l is not None and assignment[gate_l] != lv:
                    continue
                ctx.add((pvar, tag, assignment[parent]))
            probs = self.rows[var].get(frozenset(ctx))
            if probs is None:
                raise KeyError(f"{name}: no row for {sorted(ctx)}")
            p *= probs[self.domains[name].index(assignment[name])]
            if p == 0.0:
                return 0.0
        return p

    def assignments(self, evidence=None):
        evidence = evidence or {}
        free = [n for n in self.names if n not in evidence]
        for combo in itertools.product(*(self.domains[n] for n in free)):
            a = dict(evidence)
            a.update(zip(free, combo))
            yield a

    def query(self, target, evidence=None):
        name, value = target
        num = den = 0.0
        for a in self.assignments(evidence):
            p = self.joint(a)
            den += p
            if a[name] == value:
                num += p
        if den == 0.0:
            raise ZeroDivisionError("evidence has probability 0")
        return num / den

    def distribution(self, name, evidence=None):
        out = {v: 0.0 for v in self.domains[name]}
        den = 0.0
        for a in self.assignments(evidence):
            p = self.joint(a)
            den += p
            out[a[name]] += p
        return {v: x / den for v, x in out.items()}

    def joint_sum(self):
        return sum(self.joint(a) for a in self.assignments())
