"""Regenerate the JSON fixtures under fixtures/.

Every value written here is documented in fixtures/FIXTURE-NOTES.md; run this
script after editing either file so they stay in step.  The two manipulation
fixtures are built through the library's own builders on purpose: their
converted shape is part of what the tests pin down.
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from mtbn.model import model_to_dict, parse_model, validate_model
from mtbn.patterns import make_manipulation

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

G_LEVELS = ["low", "medium", "high"]

# Next-day insulin dose keyed by (previous glucose, previous insulin).
I_ROWS = {
    ("low", "low"): (0.80, 0.15, 0.05),
    ("medium", "low"): (0.45, 0.45, 0.10),
    ("high", "low"): (0.15, 0.45, 0.40),
    ("low", "medium"): (0.45, 0.45, 0.10),
    ("medium", "medium"): (0.15, 0.70, 0.15),
    ("high", "medium"): (0.10, 0.45, 0.45),
    ("low", "high"): (0.40, 0.45, 0.15),
    ("medium", "high"): (0.10, 0.45, 0.45),
    ("high", "high"): (0.05, 0.15, 0.80),
}

# Glucose response keyed by (arriving insulin, previous glucose).
G_ROWS = {
    ("low", "low"): (0.075, 0.075, 0.85),
    ("medium", "low"): (0.30, 0.50, 0.20),
    ("high", "low"): (0.80, 0.15, 0.05),
    ("low", "medium"): (0.10, 0.30, 0.60),
    ("medium", "medium"): (0.15, 0.70, 0.15),
    ("high", "medium"): (0.60, 0.30, 0.10),
    ("low", "high"): (0.05, 0.15, 0.80),
    ("medium", "high"): (0.20, 0.50, 0.30),
    ("high", "high"): (0.65, 0.25, 0.10),
}


def ctx(*entries):
    return [{"parent": p, "lag": lag, "value": v} for p, lag, v in entries]


def row(context, probs):
    return {"context": context, "probabilities": list(probs)}


def glucose_model():
    g_rows = [row("boundary", (0.1, 0.8, 0.1))]
    for g in G_LEVELS:
        # no insulin arrives: neutral response, same as a medium dose
        g_rows.append(row(ctx(("G", 1, g)), G_ROWS[("medium", g)]))
    for lag in (1, 2):
        for g in G_LEVELS:
            for i in G_LEVELS:
                g_rows.append(row(ctx(("G", 1, g), ("I", lag, i)), G_ROWS[(i, g)]))
    for g in G_LEVELS:
        for i1 in G_LEVELS:
            for i2 in G_LEVELS:
                # doses at both lags: the more recent one dominates
                g_rows.append(row(ctx(("G", 1, g), ("I", 1, i1), ("I", 2, i2)),
                                  G_ROWS[(i1, g)]))

    i_rows = [row("boundary", (0.24, 0.52, 0.24))]
    for g in G_LEVELS:
        for i in G_LEVELS:
            i_rows.append(row(ctx(("G", 1, g), ("I", 1, i)), I_ROWS[(g, i)]))

    return {
        "range": {"t1": 1, "tn": 10},
        "granularity": "day",
        "variables": [
            {"name": "DM", "domain": ["yes", "no"], "temporality": "indexed"},
            {"name": "G", "domain": G_LEVELS, "temporality": "indexed"},
            {"name": "I", "domain": G_LEVELS, "temporality": "indexed"},
        ],
        "mechanisms": [
            {"cause": "DM", "effect": "DM", "constancy": "constant-active"},
            {"cause": "G", "effect": "G", "constancy": "constant-active"},
            {"cause": "G", "effect": "I", "constancy": "constant-active"},
            {"cause": "I", "effect": "I", "constancy": "constant-active"},
            {"cause": "I", "effect": "G", "constancy": "dynamic"},
            {"cause": "DM", "effect": "[I->G]", "constancy": "constant-active"},
            {"cause": "DM", "effect": "LAG[I->G]", "constancy": "constant-active"},
        ],
        "lags": [
            {"mechanism": "[DM->DM]", "constant": 1},
            {"mechanism": "[G->G]", "constant": 1},
            {"mechanism": "[G->I]", "constant": 1},
            {"mechanism": "[I->I]", "constant": 1},
            {"mechanism": "[I->G]", "domain": [1, 2]},
            {"mechanism": "[DM->[I->G]]", "constant": 1},
            {"mechanism": "[DM->LAG[I->G]]", "constant": 1},
        ],
        "cpds": [
            {"variable": "DM", "rows": [
                row("boundary", (0.1, 0.9)),
                row(ctx(("DM", 1, "yes")), (1.0, 0.0)),
                row(ctx(("DM", 1, "no")), (0.001, 0.999)),
            ]},
            {"variable": "G", "rows": g_rows},
            {"variable": "I", "rows": i_rows},
            {"variable": "[I->G]", "rows": [
                row("boundary", (0.5, 0.5)),
                row(ctx(("DM", 1, "yes")), (0.9, 0.1)),
                row(ctx(("DM", 1, "no")), (0.05, 0.95)),
            ]},
            {"variable": "LAG[I->G]", "rows": [
                row("boundary", (0.9, 0.1)),
                row(ctx(("DM", 1, "yes")), (0.2, 0.8)),
                row(ctx(("DM", 1, "no")), (0.99, 0.01)),
            ]},
        ],
    }


def fig21_model():
    return {
        "range": {"t1": 1, "tn": 2},
        "granularity": "step",
        "variables": [
            {"name": "A", "domain": ["yes", "no"], "temporality": "indexed"},
            {"name": "B", "domain": ["yes", "no"], "temporality": "indexed"},
        ],
        "mechanisms": [{"cause": "A", "effect": "B", "constancy": "dynamic"}],
        "lags": [{"mechanism": "[A->B]", "constant": 0}],
        "cpds": [
            {"variable": "A", "rows": [row("boundary", (0.6, 0.4))]},
            {"variable": "[A->B]", "rows": [row("boundary", (0.7, 0.3))]},
            {"variable": "B", "rows": [
                row("boundary", (0.5, 0.5)),
                row(ctx(("A", 0, "yes")), (0.9, 0.1)),
                row(ctx(("A", 0, "no")), (0.2, 0.8)),
            ]},
        ],
    }


def fig3_model():
    return {
        "range": {"t1": 1, "tn": 1},
        "granularity": "step",
        "variables": [
            {"name": "A", "domain": ["yes", "no"], "temporality": "indexed"},
            {"name": "B", "domain": ["yes", "no"], "temporality": "indexed"},
            {"name": "C", "domain": ["yes", "no"], "temporality": "indexed"},
        ],
        "mechanisms": [
            {"cause": "A", "effect": "B", "constancy": "dynamic"},
            {"cause": "B", "effect": "C", "constancy": "dynamic"},
        ],
        "lags": [
            {"mechanism": "[A->B]", "constant": 0},
            {"mechanism": "[B->C]", "constant": 0},
        ],
        "cpds": [
            {"variable": "A", "rows": [row("boundary", (0.3, 0.7))]},
            {"variable": "[A->B]", "rows": [row("boundary", (0.8, 0.2))]},
            {"variable": "[B->C]", "rows": [row("boundary", (0.6, 0.4))]},
            {"variable": "B", "rows": [
                row("boundary", (0.5, 0.5)),
                row(ctx(("A", 0, "yes")), (0.9, 0.1)),
                row(ctx(("A", 0, "no")), (0.25, 0.75)),
            ]},
            {"variable": "C", "rows": [
                row("boundary", (0.45, 0.55)),
                row(ctx(("B", 0, "yes")), (0.7, 0.3)),
                row(ctx(("B", 0, "no")), (0.1, 0.9)),
            ]},
        ],
    }


def mutual_exclusion_model():
    return {
        "range": {"t1": 1, "tn": 1},
        "granularity": "step",
        "variables": [
            {"name": "A", "domain": ["yes", "no"], "temporality": "indexed"},
            {"name": "C", "domain": ["yes", "no"], "temporality": "indexed"},
        ],
        "mechanisms": [
            {"cause": "A", "effect": "C", "constancy": "dynamic"},
            {"cause": "C", "effect": "A", "constancy": "dynamic"},
            {"cause": "[A->C]", "effect": "[C->A]", "constancy": "constant-active"},
        ],
        "lags": [
            {"mechanism": "[A->C]", "constant": 0},
            {"mechanism": "[C->A]", "constant": 0},
            {"mechanism": "[[A->C]->[C->A]]", "constant": 0},
        ],
        "cpds": [
            {"variable": "A", "rows": [
                row("boundary", (0.6, 0.4)),
                row(ctx(("C", 0, "yes")), (0.2, 0.8)),
                row(ctx(("C", 0, "no")), (0.7, 0.3)),
            ]},
            {"variable": "C", "rows": [
                row("boundary", (0.5, 0.5)),
                row(ctx(("A", 0, "yes")), (0.9, 0.1)),
                row(ctx(("A", 0, "no")), (0.25, 0.75)),
            ]},
            {"variable": "[A->C]", "rows": [row("boundary", (0.5, 0.5))]},
            {"variable": "[C->A]", "rows": [
                row(ctx(("[A->C]", 0, "active")), (0.0, 1.0)),
                row(ctx(("[A->C]", 0, "inactive")), (0.5, 0.5)),
            ]},
        ],
    }


def reciprocal_bad_model():
    return {
        "range": {"t1": 1, "tn": 1},
        "granularity": "step",
        "variables": [
            {"name": "A", "domain": ["yes", "no"], "temporality": "indexed"},
            {"name": "B", "domain": ["yes", "no"], "temporality": "indexed"},
        ],
        "mechanisms": [
            {"cause": "A", "effect": "B", "constancy": "constant-active"},
            {"cause": "B", "effect": "A", "constancy": "constant-active"},
        ],
        "lags": [
            {"mechanism": "[A->B]", "constant": 0},
            {"mechanism": "[B->A]", "constant": 0},
        ],
        "cpds": [
            {"variable": "A", "rows": [
                row(ctx(("B", 0, "yes")), (0.5, 0.5)),
                row(ctx(("B", 0, "no")), (0.5, 0.5)),
            ]},
            {"variable": "B", "rows": [
                row(ctx(("A", 0, "yes")), (0.5, 0.5)),
                row(ctx(("A", 0, "no")), (0.5, 0.5)),
            ]},
        ],
    }


def bp_cataract_model():
    base = {
        "range": {"t1": 1, "tn": 1},
        "granularity": "encounter",
        "variables": [
            {"name": "Vasodilator", "domain": ["yes", "no"], "temporality": "abstract"},
            {"name": "H", "domain": ["h1", "h2"], "temporality": "abstract"},
            {"name": "Blood_pressure", "domain": ["low", "high"], "temporality": "abstract"},
            {"name": "Cataract", "domain": ["yes", "no"], "temporality": "abstract"},
        ],
        "mechanisms": [
            {"cause": "Vasodilator", "effect": "Blood_pressure", "constancy": "constant-active"},
            {"cause": "H", "effect": "Blood_pressure", "constancy": "constant-active"},
            {"cause": "H", "effect": "Cataract", "constancy": "constant-active"},
        ],
        "lags": [
            {"mechanism": "[Vasodilator->Blood_pressure]", "constant": 0},
            {"mechanism": "[H->Blood_pressure]", "constant": 0},
            {"mechanism": "[H->Cataract]", "constant": 0},
        ],
        "cpds": [
            {"variable": "Vasodilator", "rows": [row("boundary", (0.3, 0.7))]},
            {"variable": "H", "rows": [row("boundary", (0.4, 0.6))]},
            {"variable": "Blood_pressure", "rows": [
                row(ctx(("Vasodilator", 0, "yes"), ("H", 0, "h1")), (0.85, 0.15)),
                row(ctx(("Vasodilator", 0, "yes"), ("H", 0, "h2")), (0.6, 0.4)),
                row(ctx(("Vasodilator", 0, "no"), ("H", 0, "h1")), (0.5, 0.5)),
                row(ctx(("Vasodilator", 0, "no"), ("H", 0, "h2")), (0.15, 0.85)),
            ]},
            {"variable": "Cataract", "rows": [
                row(ctx(("H", 0, "h1")), (0.7, 0.3)),
                row(ctx(("H", 0, "h2")), (0.2, 0.8)),
            ]},
        ],
    }
    m = parse_model(json.dumps(base))
    for target in ("Vasodilator", "Blood_pressure", "Cataract"):
        m = make_manipulation(m, target)
    return model_to_dict(m)


def bp_c_assoc_model():
    base = {
        "range": {"t1": 1, "tn": 1},
        "granularity": "encounter",
        "variables": [
            {"name": "Blood_pressure", "domain": ["low", "high"], "temporality": "abstract"},
            {"name": "Cataract", "domain": ["yes", "no"], "temporality": "abstract"},
        ],
        "mechanisms": [],
        "lags": [],
        "cpds": [
            {"variable": "Blood_pressure", "rows": [row("boundary", (0.45, 0.55))]},
            {"variable": "Cataract", "rows": [row("boundary", (0.4, 0.6))]},
        ],
        "noncausal": [
            {"a": "Blood_pressure", "b": "Cataract",
             "joint_table": [[0.3, 0.15], [0.1, 0.45]]},
        ],
    }
    m = parse_model(json.dumps(base))
    m = make_manipulation(m, "Blood_pressure")
    m = make_manipulation(m, "Cataract")
    return model_to_dict(m)


def main() -> int:
    OUT.mkdir(exist_ok=True)
    glucose = glucose_model()
    glucose_t3 = glucose_model()
    glucose_t3["range"]["tn"] = 3

    files = {
        "glucose.json": (glucose, True),
        "glucose_t3.json": (glucose_t3, True),
        "fig21.json": (fig21_model(), True),
        "fig3.json": (fig3_model(), True),
        "mutual_exclusion.json": (mutual_exclusion_model(), True),
        "reciprocal_bad.json": (reciprocal_bad_model(), False),
        "bp_cataract.json": (bp_cataract_model(), True),
        "bp_c_assoc.json": (bp_c_assoc_model(), True),
    }
    bad = 0
    for name, (doc, expect_clean) in files.items():
        m = parse_model(json.dumps(doc))
        diags = validate_model(m)
        clean = not diags
        if expect_clean and not clean:
            print(f"{name}: UNEXPECTED diagnostics")
            for d in diags:
                print(f"  {d}")
            bad += 1
        if not expect_clean and not any(d.severity == "error" for d in diags):
            print(f"{name}: expected validation errors, found none")
            bad += 1
        path = OUT / name
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path.name}: {len(doc['variables'])} variables, "
              f"{sum(len(c['rows']) for c in doc['cpds'])} rows"
              + ("" if expect_clean else " (intentionally ill-defined)"))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
