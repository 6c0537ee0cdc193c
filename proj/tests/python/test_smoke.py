import numpy as np
import pytest

import glinkx

FAST = {"stages.epochs": 20, "stages.hidden": 16, "stages.batch": 512}


@pytest.fixture(scope="module")
def hetero():
    return glinkx.planted("heterophilous", n=300, k=10, d=8, seed=3)


def test_planted_shapes(hetero):
    assert hetero.num_nodes == 300
    assert hetero.num_classes == 4
    assert hetero.features.shape == (300, 8)
    assert hetero.edges.shape == (hetero.num_edges, 2)
    roles = np.asarray(hetero.split(0))
    assert set(np.unique(roles)) == {0, 1, 2}
    assert hetero.homophily()["edge"] < 0.2


def test_round_trip_arrays(hetero, tmp_path):
    d = glinkx.Dataset.from_arrays(hetero.edges, hetero.features, hetero.labels, [hetero.split(0)])
    assert d.num_edges == hetero.num_edges
    np.testing.assert_array_equal(d.edges, hetero.edges)
    d.save(tmp_path / "b")
    back = glinkx.Dataset.load(tmp_path / "b")
    np.testing.assert_allclose(back.features, hetero.features, rtol=1e-6, atol=1e-6)
    assert back.labels == hetero.labels


def test_run_beats_chance(hetero):
    recs = glinkx.run(hetero, set=FAST, seeds=[0, 1])
    assert len(recs) == 2
    assert all(r["test_accuracy"] > 0.5 for r in recs)


def test_predict_probs(hetero):
    out = glinkx.predict(hetero, set=FAST)
    probs = out["probs"]
    assert probs.shape == (300, 4)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    assert out["stage2_ran"]
    assert out["edge_passes"] == 2


def test_ablation_names(hetero):
    rec = glinkx.run(hetero, set=FAST, ablate="propagation", scope="stage3")[0]
    assert "propagation" in rec["method"] or "prop" in rec["method"]


def test_kge_then_run(hetero):
    table, losses = glinkx.kge_train(hetero, set={"kge.dim": 8, "kge.epochs": 2, "kge.negatives": 5, "kge.batch": 256})
    assert table.shape == (300, 8) and table.dtype == np.float32
    assert len(losses) == 2
    rec = glinkx.run(hetero, pe="kge", pe_table=table.astype(np.float64), set=FAST)[0]
    assert 0.0 <= rec["test_accuracy"] <= 1.0


def test_label_prop_and_linkx(hetero):
    one = glinkx.label_prop(hetero, hops=1)
    two = glinkx.label_prop(hetero, hops=2)
    assert len(one["predictions"]) == 300
    # paired classes: two-hop neighbours share the label
    assert two["test_accuracy"] > one["test_accuracy"]
    assert glinkx.linkx(hetero, set={"stage3.epochs": 20})["test_accuracy"] > 0.5


def test_counting_slope():
    slope, rows = glinkx.counting_slope(n=1100, trials=2)
    assert len(rows) > 3
    assert -0.7 < slope < -0.3


def test_errors_carry_codes(hetero):
    with pytest.raises(glinkx.GlinkxError) as e:
        glinkx.label_prop(hetero, alpha=2.0)
    assert e.value.code == "invalid_argument"
    with pytest.raises(glinkx.GlinkxError):
        glinkx.run(hetero, set={"nosuch.key": 1})
    with pytest.raises(glinkx.GlinkxError):
        glinkx.run(hetero, pe="kge")
