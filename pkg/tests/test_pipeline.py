from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaselect.dataset import ExpressionDataset, scale_features
from gaselect.errors import ConfigError, DegenerateMaskError, StateError
from gaselect.ga import GaConfig
from gaselect.pipeline import (
    FULL,
    NESTED,
    PipelineConfig,
    WrapperFitness,
    derive_seed,
    evaluate_protocol,
    evaluate_run,
    plan_splits,
    run_selection,
    tune_hidden,
    wrapper_fitness,
)
from gaselect.report import dumps
from gaselect.synthetic import make_separable

SMALL_GA = GaConfig(population_size=16, generations=12, init_one_prob=0.2)


def small_cfg(**kw):
    base = dict(ga=SMALL_GA, eval_runs=2, hidden_sweep=(3, 5))
    base.update(kw)
    return PipelineConfig(**base)


def one_hot_mask(n, *on):
    m = np.zeros(n, bool)
    m[list(on)] = True
    return m


def test_fitness_of_separating_gene(separable_scaled):
    cfg = PipelineConfig(parsimony_weight=0.01)
    f = WrapperFitness(separable_scaled, cfg)
    mask = one_hot_mask(10, 0)
    assert f.accuracy(mask) == 1.0
    assert wrapper_fitness(mask, separable_scaled, cfg) == pytest.approx(0.999, abs=1e-15)


def test_zero_penalty_gives_plain_accuracy(separable_scaled):
    cfg = PipelineConfig(parsimony_weight=0.0)
    f = WrapperFitness(separable_scaled, cfg)
    mask = one_hot_mask(10, 2, 5)
    assert f(mask) == f.accuracy(mask)


def test_penalty_prefers_smaller_mask_at_equal_accuracy(separable_scaled):
    X = np.repeat(separable_scaled.values[:, :1], 6, axis=1)
    ds = ExpressionDataset(X, separable_scaled.labels, scaled=True)
    f = WrapperFitness(ds, PipelineConfig())
    single, full = one_hot_mask(6, 0), np.ones(6, bool)
    assert f.accuracy(single) == f.accuracy(full) == 1.0
    assert f(single) > f(full)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.booleans(), min_size=10, max_size=10).filter(any), st.floats(0, 0.5))
def test_fitness_bounds(bits, lam):
    ds = scale_features(make_separable(n_genes=10, seed=7))[0]
    v = wrapper_fitness(np.array(bits), ds, PipelineConfig(parsimony_weight=lam))
    assert -lam <= v <= 1.0


def test_fitness_rejects_bad_input(separable, separable_scaled):
    with pytest.raises(DegenerateMaskError):
        wrapper_fitness(np.zeros(10, bool), separable_scaled, PipelineConfig())
    with pytest.raises(StateError):
        wrapper_fitness(one_hot_mask(10, 0), separable, PipelineConfig())


def test_fitness_deterministic_per_mask(separable_scaled):
    f = WrapperFitness(separable_scaled, PipelineConfig())
    m = one_hot_mask(10, 1, 3, 8)
    assert f(m) == f(m.copy()) == WrapperFitness(separable_scaled, PipelineConfig())(m)


def test_selection_finds_informative_gene():
    hits = 0
    for seed in range(10):
        ds = scale_features(make_separable(n_genes=10, seed=100 + seed))[0]
        res = run_selection(ds, small_cfg(seed=seed))
        hits += bool(res.mask[0])
        assert res.selected_gene_ids == [ds.gene_ids[i] for i in np.flatnonzero(res.mask)]
    assert hits >= 9


def test_minimal_selection_run(separable_scaled):
    ga = GaConfig(population_size=2, generations=1, tournament_size=1)
    res = run_selection(separable_scaled, PipelineConfig(ga=ga))
    assert res.mask.shape == (10,) and res.mask.any()
    assert len(res.trace) == 1
    doc = res.to_dict()
    assert doc["popcount"] == len(doc["selected_gene_ids"])


def test_tune_hidden_rules(separable_scaled):
    mask = one_hot_mask(10, 0)
    assert tune_hidden(separable_scaled, mask, small_cfg(hidden_sweep=(3, 3))) == 3
    assert tune_hidden(separable_scaled, mask, PipelineConfig()) == 3


def test_derive_seed_is_stable():
    assert derive_seed(42, 1, 2) == derive_seed(42, 1, 2)
    assert derive_seed(42, 1, 2) != derive_seed(42, 2, 1)
    assert 0 <= derive_seed(0) < 2**63


def test_config_validation():
    with pytest.raises(ConfigError):
        PipelineConfig(inner_folds=1)
    with pytest.raises(ConfigError):
        PipelineConfig(bias_modes=("sideways",))
    with pytest.raises(ConfigError):
        PipelineConfig(hidden_sweep=(5, 3))


def test_evaluate_single_run_separable(separable):
    report = evaluate_protocol(separable, small_cfg(eval_runs=1, bias_modes=(NESTED,)))
    entry = report["modes"][NESTED]
    assert len(entry["runs"]) == 1
    assert entry["runs"][0]["accuracy"] == 1.0


def test_evaluate_both_modes_and_aggregates(separable):
    report = evaluate_protocol(separable, small_cfg(eval_runs=3))
    assert set(report["modes"]) == {FULL, NESTED}
    for entry in report["modes"].values():
        accs = [r["accuracy"] for r in entry["runs"]]
        assert abs(entry["aggregate"]["mean"] - sum(accs) / len(accs)) <= 1e-12
        for r in entry["runs"]:
            cm = r["confusion"]
            assert cm["tp"] + cm["fn"] + cm["tn"] + cm["fp"] == r["n_test"] == 6
            assert set(r["baselines"]) == {"gnb_mask", "gnb_top", "knn_mask"}
    full_masks = {tuple(r["selected_gene_ids"]) for r in report["modes"][FULL]["runs"]}
    assert len(full_masks) == 1
    assert [row["method"] for row in report["reference"]] == ["SVM", "Naive Bayes", "Proposed GA+MLP"]


def test_evaluate_deterministic(separable):
    cfg = small_cfg(eval_runs=2)
    assert dumps(evaluate_protocol(separable, cfg)) == dumps(evaluate_protocol(separable, cfg))


def test_parallel_runs_match_sequential(separable):
    cfg = small_cfg(eval_runs=2, bias_modes=(NESTED,))
    assert dumps(evaluate_protocol(separable, cfg, jobs=2)) == dumps(evaluate_protocol(separable, cfg))


def test_nested_selection_ignores_test_rows(separable):
    """Scrambling test labels and values must leave the chosen mask unchanged."""
    cfg = small_cfg()
    plans = plan_splits(separable, cfg)
    rng = np.random.default_rng(0)
    for r, plan in enumerate(plans):
        _, mask = evaluate_run(separable, cfg, r, plan, NESTED)
        test = plan[2]
        X = separable.values.copy()
        y = separable.labels.copy()
        y[test] = 1 - y[test]
        X[test] = rng.normal(scale=100.0, size=(test.size, X.shape[1]))
        probe = ExpressionDataset(X, y, separable.gene_ids)
        _, mask2 = evaluate_run(probe, cfg, r, plan, NESTED)
        np.testing.assert_array_equal(mask, mask2)


def test_full_mode_requires_global_selection(separable):
    cfg = small_cfg()
    plan = plan_splits(separable, cfg)[0]
    with pytest.raises(StateError):
        evaluate_run(separable, cfg, 0, plan, FULL)
