import itertools
import json

import pytest

from conftest import load_doc
from mtbn.compile import compile_model
from mtbn.errors import InterventionError, ModelInvalidError
from mtbn.exact import exact_distribution, exact_query, joint_sum
from mtbn.model import parse_model, validate_model
from mtbn.patterns import (RELATIONS, apply_intervention, interval_relation,
                           make_abstraction, make_interval,
                           make_interval_relation, make_manipulation,
                           transform_noncausal)
from mtbn.sample import likelihood_weighting_query

SWAP = {"before": "after", "after": "before", "meets": "follows",
        "follows": "meets", "overlaps": "is_overlapped_by",
        "is_overlapped_by": "overlaps", "coincides": "coincides"}


def test_interval_relation_known_cases():
    assert interval_relation(1, 2, 3, 4) == "before"
    assert interval_relation(3, 4, 1, 2) == "after"
    assert interval_relation(1, 2, 2, 3) == "meets"
    assert interval_relation(2, 3, 1, 2) == "follows"
    assert interval_relation(1, 3, 2, 4) == "overlaps"
    assert interval_relation(2, 4, 1, 3) == "is_overlapped_by"
    assert interval_relation(1, 2, 1, 2) == "coincides"
    assert interval_relation(1, 4, 2, 3) == "overlaps"    # containment
    assert interval_relation(1, 1, 1, 1) == "coincides"   # point intervals
    with pytest.raises(ValueError):
        interval_relation(2, 1, 1, 2)


def test_interval_relation_total_and_antisymmetric():
    pts = range(1, 6)
    for s1, e1, s2, e2 in itertools.product(pts, repeat=4):
        if e1 < s1 or e2 < s2:
            continue
        rel = interval_relation(s1, e1, s2, e2)
        assert rel in RELATIONS
        assert interval_relation(s2, e2, s1, e1) == SWAP[rel]


def test_make_interval(fig21):
    m = make_interval(fig21, "EP", (1, 2))
    assert validate_model(m) == []
    cm = compile_model(m)
    # the end never precedes the start
    assert exact_query(m, ("EP_END", 1), {"EP_START": 2}, compiled=cm) == 0.0
    assert exact_distribution(m, "EP_DUR", {"EP_START": 1}, compiled=cm) == \
        pytest.approx({0: 0.5, 1: 0.5}, abs=1e-12)
    assert exact_query(m, ("EP_DUR", 1), compiled=cm) == pytest.approx(0.25, abs=1e-12)
    assert joint_sum(m, compiled=cm) == pytest.approx(1.0, abs=1e-12)


def test_make_interval_priors(fig21):
    point = make_interval(fig21, "EP", (1, 2), start_prior=2)
    cm = compile_model(point)
    assert exact_query(point, ("EP_START", 2), compiled=cm) == 1.0
    assert exact_query(point, ("EP_END", 2), compiled=cm) == 1.0

    skew = make_interval(fig21, "EQ", (1, 2), start_prior={1: 0.9, 2: 0.1})
    cq = compile_model(skew)
    assert exact_query(skew, ("EQ_START", 1), compiled=cq) == pytest.approx(0.9)
    assert validate_model(skew) == []


def test_make_interval_rejections(fig21):
    with pytest.raises(ModelInvalidError):
        make_interval(fig21, "EP", (2, 1))
    with pytest.raises(ModelInvalidError):
        make_interval(fig21, "EP", (1,))
    with pytest.raises(ModelInvalidError):
        make_interval(fig21, "EP", (0, 2))               # below t1
    with pytest.raises(ModelInvalidError):
        make_interval(fig21, "EP", (1, 3))               # above tn
    with pytest.raises(ModelInvalidError):
        make_interval(fig21, "EP", (1, 2), start_prior=3)
    with pytest.raises(ModelInvalidError):
        make_interval(fig21, "EP", (1, 2), start_prior={1: 0.5})
    once = make_interval(fig21, "EP", (1, 2))
    with pytest.raises(ModelInvalidError):
        make_interval(once, "EP", (1, 2))


def test_make_interval_relation(fig21):
    m = make_interval(make_interval(fig21, "EP1", (1, 2)), "EP2", (1, 2))
    m = make_interval_relation(m, "R", ("EP1_START", "EP1_END"),
                               ("EP2_START", "EP2_END"))
    assert validate_model(m) == []
    cm = compile_model(m)
    # both intervals iid: start uniform, end uniform over points >= start
    assert exact_query(m, ("R", "coincides"), compiled=cm) == pytest.approx(0.375, abs=1e-12)
    assert exact_query(m, ("R", "before"), compiled=cm) == pytest.approx(0.125, abs=1e-12)
    ev = {"EP1_START": 1, "EP1_END": 1, "EP2_START": 2, "EP2_END": 2}
    assert exact_query(m, ("R", "before"), ev, compiled=cm) == 1.0


def test_relation_with_itself_coincides(fig21):
    m = make_interval(fig21, "EP1", (1, 2))
    m = make_interval_relation(m, "RSELF", ("EP1_START", "EP1_END"),
                               ("EP1_START", "EP1_END"))
    assert validate_model(m) == []
    assert exact_query(m, ("RSELF", "coincides")) == 1.0


def test_make_interval_relation_rejections(fig21):
    m = make_interval(fig21, "EP1", (1, 2))
    with pytest.raises(ModelInvalidError, match="abstract"):
        make_interval_relation(m, "R", ("A", "EP1_END"), ("EP1_START", "EP1_END"))
    rel = make_interval_relation(m, "R", ("EP1_START", "EP1_END"),
                                 ("EP1_START", "EP1_END"))
    with pytest.raises(ModelInvalidError, match="integer"):
        make_interval_relation(rel, "R2", ("R", "R"), ("R", "R"))
    with pytest.raises(ModelInvalidError, match="declared"):
        make_interval_relation(rel, "R", ("EP1_START", "EP1_END"),
                               ("EP1_START", "EP1_END"))


def test_abstraction_identity(fig21):
    m = make_abstraction(fig21, "EVER", ("B@1", "B@2"), ("yes", "no"),
                         lambda env: "yes" if "yes" in env.values() else "no")
    assert validate_model(m) == []
    cm = compile_model(fig21)
    p_no1 = exact_query(fig21, ("B@1", "no"), compiled=cm)
    p_no2 = exact_query(fig21, ("B@2", "no"), {"B@1": "no"}, compiled=cm)
    want = 1.0 - p_no1 * p_no2
    got = exact_query(m, ("EVER", "yes"))
    assert got == pytest.approx(want, abs=1e-12)


def test_abstraction_on_longer_history(glucose_t3):
    m = make_abstraction(glucose_t3, "EVER_HIGH", ("G@1", "G@2", "G@3"),
                         ("yes", "no"),
                         lambda env: "yes" if "high" in env.values() else "no")
    assert validate_model(m) == []
    cm = compile_model(m)
    p = exact_query(m, ("EVER_HIGH", "yes"), compiled=cm)
    assert p == pytest.approx(0.4052913534225, abs=1e-10)
    lw = likelihood_weighting_query(cm, ("EVER_HIGH", "yes"), n=30000, seed=0)
    assert lw.estimate == pytest.approx(p, abs=0.01)


def test_abstraction_rejections(fig21):
    with pytest.raises(ModelInvalidError, match="at least 2"):
        make_abstraction(fig21, "X", ("B@1",), ("only",), lambda env: "only")
    with pytest.raises(ModelInvalidError, match="not an ordinary variable"):
        make_abstraction(fig21, "X", ("Q@1",), ("a", "b"), lambda env: "a")
    with pytest.raises(ModelInvalidError, match="outside"):
        make_abstraction(fig21, "X", ("B@1",), ("a", "b"), lambda env: "c")


def test_make_manipulation_preserves_marginal(fig21):
    m = make_manipulation(fig21, "B")
    assert validate_model(m) == []
    assert "B_MANIP" in m.variables
    assert m.variables["B_MANIP"].domain == ("yes", "no", "unset")
    before = exact_query(fig21, ("B@1", "yes"))
    after = exact_query(m, ("B@1", "yes"))
    assert after == pytest.approx(before, abs=1e-12)


def test_make_manipulation_rejections(fig21, bp_cataract):
    with pytest.raises(ModelInvalidError, match="unknown"):
        make_manipulation(fig21, "Q")
    with pytest.raises(ModelInvalidError, match="itself"):
        make_manipulation(bp_cataract, "Cataract_MANIP")
    with pytest.raises(ModelInvalidError, match="already has"):
        make_manipulation(bp_cataract, "Cataract")
    doc = json.loads('{"range": {"t1": 1, "tn": 1}, "granularity": "step", '
                     '"variables": [{"name": "X", "domain": ["a", "b"], '
                     '"temporality": "indexed"}], "mechanisms": [], '
                     '"lags": [], "cpds": []}')
    bare = parse_model(json.dumps(doc))
    with pytest.raises(ModelInvalidError, match="no CPD"):
        make_manipulation(bare, "X")


def test_intervention_severs_causes(bp_cataract):
    cm = compile_model(bp_cataract)
    assert exact_query(bp_cataract, ("Blood_pressure", "low"),
                       compiled=cm) == pytest.approx(0.413, abs=1e-12)
    assert exact_query(bp_cataract, ("Blood_pressure", "low"), {"Cataract": "yes"},
                       compiled=cm) == pytest.approx(0.509, abs=1e-12)

    do_c = apply_intervention(bp_cataract, {"Cataract": "yes"})
    assert validate_model(do_c) == []
    cd = compile_model(do_c)
    assert exact_query(do_c, ("Cataract", "yes"), compiled=cd) == 1.0
    # seeing a cataract is informative, forcing one is not
    assert exact_query(do_c, ("Blood_pressure", "low"),
                       compiled=cd) == pytest.approx(0.413, abs=1e-12)
    assert exact_query(do_c, ("Vasodilator", "yes"),
                       compiled=cd) == pytest.approx(0.3, abs=1e-12)
    assert "[H->Cataract]" not in do_c.mechanisms


def test_intervention_breaks_confounding(bp_cataract):
    do_bp = apply_intervention(bp_cataract, {"Blood_pressure": "low"})
    cd = compile_model(do_bp)
    p_c = exact_query(do_bp, ("Cataract", "yes"), compiled=cd)
    p_c_given_v = exact_query(do_bp, ("Cataract", "yes"), {"Vasodilator": "yes"},
                              compiled=cd)
    assert p_c == pytest.approx(0.4, abs=1e-12)
    assert p_c_given_v == pytest.approx(p_c, abs=1e-12)


def test_intervention_coerces_text_values(fig21):
    m = make_manipulation(make_interval(fig21, "EP", (1, 2)), "EP_START")
    done = apply_intervention(m, {"EP_START": "2"})
    cd = compile_model(done)
    assert exact_query(done, ("EP_START", 2), compiled=cd) == 1.0
    assert exact_query(done, ("EP_END", 2), compiled=cd) == 1.0


def test_intervention_rejections(fig21, bp_cataract):
    with pytest.raises(InterventionError, match="unknown"):
        apply_intervention(bp_cataract, {"Q": "yes"})
    with pytest.raises(InterventionError, match="manipulation"):
        apply_intervention(fig21, {"A": "yes"})
    with pytest.raises(InterventionError, match="domain"):
        apply_intervention(bp_cataract, {"Cataract": "maybe"})


def test_transform_reproduces_declared_joint(bp_c_assoc):
    t = transform_noncausal(bp_c_assoc)
    assert validate_model(t) == []
    assert "H_Blood_pressure_Cataract" in t.variables
    assert t.noncausal == []
    ct = compile_model(t)
    table = {("low", "yes"): 0.3, ("low", "no"): 0.15,
             ("high", "yes"): 0.1, ("high", "no"): 0.45}
    for (bv, cv), want in table.items():
        p = exact_query(t, ("Blood_pressure", bv), {"Cataract": cv}, compiled=ct) \
            * exact_query(t, ("Cataract", cv), compiled=ct)
        assert p == pytest.approx(want, abs=1e-9)
    assert joint_sum(t, compiled=ct) == pytest.approx(1.0, abs=1e-9)


def test_association_is_not_causation(bp_c_assoc):
    t = transform_noncausal(bp_c_assoc)
    ct = compile_model(t)
    seen = exact_query(t, ("Cataract", "yes"), {"Blood_pressure": "low"}, compiled=ct)
    assert seen == pytest.approx(0.3 / 0.45, abs=1e-12)
    do_bp = apply_intervention(t, {"Blood_pressure": "low"})
    forced = exact_query(do_bp, ("Cataract", "yes"))
    assert forced == pytest.approx(0.4, abs=1e-12)      # marginal, unmoved


def test_transform_rejects_causal_members():
    doc = load_doc("bp_cataract.json")
    doc["noncausal"] = [{"a": "Blood_pressure", "b": "Cataract",
                         "joint_table": [[0.3, 0.15], [0.1, 0.45]]}]
    m = parse_model(json.dumps(doc))
    with pytest.raises(ModelInvalidError, match="causal arcs"):
        transform_noncausal(m)


def test_transform_rejects_mixed_temporality():
    doc = {
        "range": {"t1": 1, "tn": 2},
        "granularity": "step",
        "variables": [
            {"name": "P", "domain": ["u", "v"], "temporality": "indexed"},
            {"name": "Q", "domain": ["x", "y"], "temporality": "abstract"},
        ],
        "mechanisms": [], "lags": [],
        "cpds": [
            {"variable": "P", "rows": [{"context": "boundary", "probabilities": [0.5, 0.5]}]},
            {"variable": "Q", "rows": [{"context": "boundary", "probabilities": [0.5, 0.5]}]},
        ],
        "noncausal": [{"a": "P", "b": "Q",
                       "joint_table": [[0.25, 0.25], [0.25, 0.25]]}],
    }
    m = parse_model(json.dumps(doc))
    with pytest.raises(ModelInvalidError, match="temporality"):
        transform_noncausal(m)
