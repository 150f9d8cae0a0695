import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdlselect.errors import DomainError, NoClassMap
from mdlselect.fit import Dataset
from mdlselect.ledger import recompute_tdl
from mdlselect.mic import MicSearchConfig, run_mic
from mdlselect.tpc import (TpcCoder, TpcConfig, TpcState, run_per_task, run_tpc,
                           run_tpc_forward_backward, run_tpc_streamwise, scs_total_cost,
                           subset_tdl, tpc_model_bits, tpc_savings, tpc_savings_closed_form,
                           tpc_total_cost)


def classed(x, y, class_map):
    k = int(np.max(class_map)) + 1
    return Dataset(x, y, class_map=np.asarray(class_map), class_names=[f"c{i}" for i in range(k)])


def uniform_state(K, size):
    cmap = np.repeat(np.arange(K), size)
    return TpcState(cmap, np.full(K, size))


def test_first_and_repeat_feature_costs():
    state = uniform_state(40, 25)
    assert tpc_model_bits(state, 0) == pytest.approx(math.log2(40) + math.log2(25) + 2)
    assert tpc_model_bits(state, 0) == pytest.approx(11.966, abs=1e-3)
    state.add(0)
    assert tpc_model_bits(state, 1) == pytest.approx(6.644, abs=1e-3)
    # a second class is new: full log2 K again
    assert tpc_model_bits(state, 30) == pytest.approx(11.966, abs=1e-3)
    state.add(30)
    assert tpc_model_bits(state, 2) == pytest.approx(1 + math.log2(25) + 2)


def test_single_class_matches_ric():
    state = uniform_state(1, 300)
    assert tpc_model_bits(state, 5) == pytest.approx(math.log2(300) + 2)


def test_missing_class_map():
    with pytest.raises(NoClassMap):
        tpc_model_bits(TpcState(None, None), 0)


def test_coder_agrees_with_formula():
    rng = np.random.default_rng(0)
    cmap = rng.integers(0, 7, size=60)
    cmap[:7] = np.arange(7)
    data = classed(rng.standard_normal((10, 60)), rng.standard_normal(10), cmap)
    coder = TpcCoder(data)
    state = TpcState.for_dataset(data)
    for j in rng.permutation(60)[:15]:
        np.testing.assert_allclose(coder.costs(state)[j], tpc_model_bits(state, j))
        state.add(j)


def test_one_class_per_feature_reproduces_ric():
    rng = np.random.default_rng(2)
    n, m = 80, 60
    x = rng.standard_normal((n, m))
    y = x[:, 3] - 0.7 * x[:, 11] + rng.standard_normal(n)
    tpc = run_tpc(classed(x, y, np.arange(m)))
    ric = run_mic(Dataset(x, y), MicSearchConfig("ric"))
    assert [s.feature for s in tpc.steps] == ric.task_features(0)
    assert tpc.total_tdl == pytest.approx(ric.total_tdl, abs=1e-9)


def test_strongest_feature_enters_first():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((60, 30))
    y = 3 * x[:, 7] + rng.standard_normal(60)
    model = run_tpc(classed(x, y, np.arange(30) // 5))
    assert model.steps[0].feature == 7


def test_shared_class_concentrates_selection():
    rng = np.random.default_rng(5)
    n, m, K = 60, 200, 20
    cmap = np.arange(m) // (m // K)
    x = rng.standard_normal((n, m))
    y = x[:, :5] @ np.array([1.0, -1.0, 0.8, -0.8, 0.9]) + 0.5 * rng.standard_normal(n)
    data = classed(x, y, cmap)
    tpc = run_tpc(data)
    assert set(tpc.selected_features) >= {0, 1, 2, 3, 4}
    assert all(cmap[j] == 0 for j in tpc.selected_features)
    with pytest.warns(UserWarning):
        flat = run_tpc(data.without_classes())
    assert tpc.model_bits < flat.model_bits
    q, Q = tpc.n_features, 1
    gap = flat.model_bits - tpc.model_bits
    if set(flat.selected_features) == set(tpc.selected_features):
        assert gap == pytest.approx((q - Q) * math.log2(K / Q), abs=1e-9)


def test_ledger_recompute_and_positive_steps():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((70, 40))
    y = rng.standard_normal((70, 2)) + x[:, [1]] - x[:, [20]]
    data = classed(x, y, np.arange(40) // 8)
    model = run_per_task(data, run_tpc)
    assert model.n_coefficients >= 4
    assert all(s.delta > 0 for s in model.steps)
    assert model.total_tdl == pytest.approx(recompute_tdl(model, data), abs=1e-6)


def test_savings_examples():
    assert tpc_savings(5, 5, 100, 1000) == pytest.approx(0.0, abs=1e-12)
    assert tpc_savings(10, 2, 100, 1000) == pytest.approx(8 * math.log2(50))
    assert tpc_savings(10, 2, 100, 1000) == pytest.approx(45.15, abs=0.01)
    # ten features from one class of five features, m=1000, K=100
    direct = scs_total_cost(10, 1000) - tpc_total_cost(10, 1, 100, [5] * 10)
    assert direct == pytest.approx(10 * math.log2(1000) - math.log2(100) - 10 * math.log2(5) - 0)
    assert tpc_savings(10, 1, 100, 1000, [10] * 99 + [5], [99] * 10) == pytest.approx(direct)
    assert direct == pytest.approx(9 * math.log2(100) + 10, abs=1e-9)
    assert direct == pytest.approx(69.79, abs=0.01)


def test_savings_domain():
    with pytest.raises(DomainError):
        tpc_savings(3, 4, 10, 100)
    with pytest.raises(DomainError):
        tpc_savings(3, 0, 10, 100)
    with pytest.raises(DomainError):
        tpc_savings(12, 11, 10, 100)


@settings(max_examples=300)
@given(st.integers(1, 200), st.data())
def test_savings_closed_form_uniform(K, data):
    q = data.draw(st.integers(1, 60))
    Q = data.draw(st.integers(1, min(q, K)))
    m = K * data.draw(st.integers(1, 50))
    assert tpc_savings(q, Q, K, m) == pytest.approx(tpc_savings_closed_form(q, Q, K, m),
                                                    abs=1e-9)


@settings(max_examples=300)
@given(st.integers(1, 40), st.data())
def test_savings_closed_form_nonuniform(K, data):
    sizes = np.array(data.draw(st.lists(st.integers(1, 40), min_size=K, max_size=K)))
    m = int(sizes.sum())
    q = data.draw(st.integers(1, 30))
    picks = np.array(data.draw(st.lists(st.integers(0, K - 1), min_size=q, max_size=q)))
    Q = len(set(picks.tolist()))
    direct = tpc_savings(q, Q, K, m, sizes, picks)
    assert direct == pytest.approx(tpc_savings_closed_form(q, Q, K, m, sizes[picks]), abs=1e-9)


def test_incremental_ledger_matches_total_when_classes_come_first():
    # a single class: the running log2 Q term is 0 every time
    state = uniform_state(1, 40)
    coder_bits = []
    for j in range(6):
        coder_bits.append(tpc_model_bits(state, j))
        state.add(j)
    assert sum(coder_bits) == pytest.approx(tpc_total_cost(6, 1, 1, [40] * 6))


def test_forward_backward_noop():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((60, 30))
    y = 2 * x[:, 4] - 1.5 * x[:, 17] + rng.standard_normal(60)
    data = classed(x, y, np.arange(30) // 3)
    fwd = run_tpc(data)
    fb = run_tpc_forward_backward(data, TpcConfig(extra_steps=0))
    assert [s.feature for s in fb.steps] == [s.feature for s in fwd.steps]
    assert fb.total_tdl == pytest.approx(fwd.total_tdl)


def _pair_data(seed):
    # two near-collinear features: each alone says little, their difference a lot
    rng = np.random.default_rng(seed)
    n, m = 60, 40
    x = rng.standard_normal((n, m))
    z = rng.standard_normal(n)
    x[:, 0] = z + 0.1 * rng.standard_normal(n)
    x[:, 1] = z + 0.1 * rng.standard_normal(n)
    y = 10 * (x[:, 0] - x[:, 1]) + 0.3 * z + 0.5 * rng.standard_normal(n)
    return classed(x, y, np.arange(m) // 4)


def test_forward_backward_finds_jointly_predictive_pair():
    rescued = 0
    for seed in range(20):
        data = _pair_data(seed)
        fwd = run_tpc(data)
        fb = run_tpc_forward_backward(data, TpcConfig(extra_steps=2))
        assert fb.total_tdl <= fwd.total_tdl + 1e-9
        if not fwd.steps and set(fb.selected_features) == {0, 1}:
            rescued += 1
    assert rescued >= 1


def test_subset_tdl_of_forward_order_matches_search():
    data = _pair_data(4)
    fwd = run_tpc(data)
    order = [s.feature for s in fwd.steps]
    assert subset_tdl(data, order, TpcCoder(data)) == pytest.approx(fwd.total_tdl, abs=1e-8)


def test_streamwise_empty_universe():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = run_tpc_streamwise(Dataset(np.zeros((5, 0)), np.arange(5.0)))
    assert model.steps == []


def test_streamwise_with_signal_first_matches_class_pattern():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        n, m = 80, 60
        x = rng.standard_normal((n, m))
        y = 2 * x[:, 0] - 2 * x[:, 1] + 1.5 * x[:, 6] + rng.standard_normal(n)
        data = classed(x, y, np.arange(m) // 6)
        step = run_tpc(data)
        stream = run_tpc_streamwise(data, feature_order=[0, 1, 6] + list(range(2, 6)) +
                                    list(range(7, m)))
        classes = lambda mod: {int(data.class_map[j]) for j in mod.selected_features}
        assert classes(stream) >= classes(step)


def test_streamwise_adversarial_order_on_noise_prefix():
    spurious = 0
    n, m = 100, 51
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, m))
        y = 2 * x[:, m - 1] + rng.standard_normal(n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = run_tpc_streamwise(Dataset(x, y), feature_order=np.arange(m))
        spurious += any(s.feature != m - 1 for s in model.steps)
        assert m - 1 in model.selected_features
    assert spurious <= 5
