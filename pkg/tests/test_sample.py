import numpy as np
import pytest

from mtbn._kernels import HAS_NUMBA
from mtbn.compile import compile_model
from mtbn.errors import CyclicModelError, InconclusiveRunError, MtbnError
from mtbn.rng import uniform_block, uniform_one
from mtbn.sample import (forward_simulate, likelihood_weighting_query,
                         logic_sampling_query)

needs_numba = pytest.mark.skipif(not HAS_NUMBA, reason="numba not importable")


def test_uniform_block_is_slice_stable():
    full = uniform_block(99, 0, 100, 7)
    tail = uniform_block(99, 50, 100, 7)
    assert np.array_equal(full[50:], tail)
    assert full.min() >= 0.0 and full.max() < 1.0
    assert uniform_one(99, 62, 3) == full[62, 3]


def test_uniform_block_varies_with_seed():
    assert not np.array_equal(uniform_block(1, 0, 10, 4), uniform_block(2, 0, 10, 4))


def test_forward_reproducible(glucose_t2):
    cm = compile_model(glucose_t2)
    a = forward_simulate(cm, 500, seed=11)
    b = forward_simulate(cm, 500, seed=11)
    c = forward_simulate(cm, 500, seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


@needs_numba
def test_backends_bit_identical(glucose_t2):
    cm = compile_model(glucose_t2)
    py = forward_simulate(cm, 1500, seed=3, backend="python")
    nb = forward_simulate(cm, 1500, seed=3, backend="numba")
    assert py.backend == "python" and nb.backend == "numba"
    assert np.array_equal(py.values, nb.values)


def test_workers_do_not_change_results(glucose_t2):
    cm = compile_model(glucose_t2)
    ev = {"DM@1": "yes"}
    runs = [likelihood_weighting_query(cm, ("G@2", "high"), ev, n=4000, seed=5,
                                       workers=w) for w in (1, 4)]
    assert runs[0].estimate == runs[1].estimate
    assert runs[0].weight_sum == runs[1].weight_sum
    sims = [forward_simulate(cm, 4000, seed=5, workers=w) for w in (1, 4)]
    assert np.array_equal(sims[0].values, sims[1].values)


def test_forward_marginal_matches_prior(glucose_t2):
    cm = compile_model(glucose_t2)
    res = forward_simulate(cm, 20000, seed=0)
    dist = res.distribution(cm.resolve, "DM@1")
    assert dist["yes"] == pytest.approx(0.1, abs=0.01)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)


def test_records_shape(glucose_t2):
    res = forward_simulate(glucose_t2, 3, seed=1)
    recs = list(res.records())
    assert len(recs) == 3
    assert set(recs[0]) == set(res.instances)
    assert recs[0]["DM@1"] in ("yes", "no")


def test_ls_lw_converge_to_exact(fig21):
    cm = compile_model(fig21)
    ls = logic_sampling_query(cm, ("B@1", "yes"), n=20000, seed=0)
    lw = likelihood_weighting_query(cm, ("B@1", "yes"), n=20000, seed=0)
    assert ls.estimate == pytest.approx(0.584, abs=0.02)
    assert lw.estimate == pytest.approx(0.584, abs=0.02)
    assert ls.accepted == 20000                 # no evidence, nothing rejected
    assert sum(ls.distribution.values()) == pytest.approx(1.0, abs=1e-12)
    assert sum(lw.distribution.values()) == pytest.approx(1.0, abs=1e-12)


def test_lw_with_evidence(glucose_t2):
    # exact_query gives 0.3324 for this query
    cm = compile_model(glucose_t2)
    ev = {"DM@1": "yes", "G@1": "high"}
    lw = likelihood_weighting_query(cm, ("G@2", "high"), ev, n=30000, seed=0)
    assert lw.estimate == pytest.approx(0.3324, abs=0.01)
    ls = logic_sampling_query(cm, ("G@2", "high"), ev, n=30000, seed=2)
    assert ls.estimate == pytest.approx(0.3324, abs=0.02)
    assert 0 < ls.accepted < 30000


def test_structural_evidence(fig21):
    cm = compile_model(fig21)
    lw = likelihood_weighting_query(cm, ("B@1", "yes"), {"[A->B]@1": "active"},
                                    n=20000, seed=0)
    assert lw.estimate == pytest.approx(0.62, abs=0.02)


def test_impossible_evidence_is_inconclusive(glucose_t2):
    cm = compile_model(glucose_t2)
    ev = {"DM@1": "yes", "DM@2": "no"}       # upstream row gives this pair mass 0
    with pytest.raises(InconclusiveRunError):
        likelihood_weighting_query(cm, ("G@2", "high"), ev, n=500, seed=0)
    with pytest.raises(InconclusiveRunError):
        logic_sampling_query(cm, ("G@2", "high"), ev, n=500, seed=0)


def test_duplicate_evidence_rejected(fig21):
    cm = compile_model(fig21)
    inst = cm.graph.resolve("A@1")           # same instance under two spellings
    with pytest.raises(MtbnError, match="twice"):
        likelihood_weighting_query(cm, ("B@1", "yes"),
                                   {"A@1": "yes", inst: "no"}, n=10)


def test_certified_cycle_zone_never_realized(mutual_exclusion):
    cm = compile_model(mutual_exclusion)
    res = forward_simulate(cm, 5000, seed=0)
    i1, i2 = cm.resolve("[A->C]@1"), cm.resolve("[C->A]@1")
    a1 = cm.domains[i1].index("active")
    a2 = cm.domains[i2].index("active")
    both = np.sum((res.values[:, i1] == a1) & (res.values[:, i2] == a2))
    assert both == 0
    with pytest.raises(InconclusiveRunError):
        logic_sampling_query(cm, ("A@1", cm.domains[cm.resolve("A@1")][0]),
                             {"[A->C]@1": "active", "[C->A]@1": "active"},
                             n=300, seed=0)


def test_uncertified_cycle_raises(reciprocal_bad):
    with pytest.raises(CyclicModelError):
        forward_simulate(reciprocal_bad, 10, seed=0)
