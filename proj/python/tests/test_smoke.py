import json

import numpy as np
import pytest

import cade


def two_cliques(k=6, f=4, seed=0):
    rng = np.random.default_rng(seed)
    edges = []
    for base in (0, k):
        edges += [(base + i, base + j) for i in range(k) for j in range(i + 1, k)]
    edges.append((k - 1, k))
    features = rng.normal(size=(2 * k, f))
    features[:k, 0] += 2.0
    labels = [[0]] * k + [[1]] * k
    return cade.Graph(2 * k, edges, features), labels


SMALL = {
    "model.d": "8",
    "model.sizes": "3,2",
    "model.K": "3",
    "train.epochs": "2",
    "train.lr": "0.01",
    "train.batch_size": "16",
    "train.negatives": "3",
    "train.pairs_per_epoch": "60",
    "sampling.walks": "3",
    "seed": "5",
}


def test_graph_roundtrip():
    g, _ = two_cliques()
    assert g.num_nodes == 12
    assert g.num_edges == 2 * 15 + 1
    assert g.features.shape == (12, 4)
    assert sorted(g.neighbors(5)) == [0, 1, 2, 3, 4, 6]
    assert len(g.content_hash()) == 16


def test_default_config_has_training_keys():
    cfg = cade.default_config()
    assert cfg["train.lr"] == "0.0001"
    assert cfg["model.K"] == "10"


@pytest.mark.parametrize("mode", ["ms", "ma"])
def test_fit_and_embed(mode, tmp_path):
    g, _ = two_cliques()
    cfg = dict(SMALL, **{"train.mode": mode})
    model, losses = cade.fit(g, cfg)
    assert len(losses) == 2
    assert all(np.isfinite(losses))
    assert model.mode == mode
    vectors, coverage, fallback = cade.embed(g, model, cfg)
    assert vectors.shape == (12, 8)
    assert np.isfinite(vectors).all()
    assert min(coverage) >= 1
    assert not any(fallback)

    # Checkpoints hold 32-bit floats: the first reload rounds, later ones are exact.
    model.save(tmp_path / "a")
    once = cade.load_model(tmp_path / "a")
    once.save(tmp_path / "b")
    assert cade.load_model(tmp_path / "b").hash() == once.hash()
    np.testing.assert_allclose(cade.embed(g, once, cfg)[0], vectors, atol=1e-4)


def test_fit_is_deterministic():
    g, _ = two_cliques()
    a, _ = cade.fit(g, SMALL)
    b, _ = cade.fit(g, SMALL)
    assert a.hash() == b.hash()


def test_unknown_key_raises_config_error():
    g, _ = two_cliques()
    with pytest.raises(cade.ConfigError):
        cade.fit(g, {"model.width": "3"})


def test_metrics():
    assert cade.roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0
    assert cade.roc_auc([0.5, 0.5], [1, 0]) == 0.5
    assert cade.average_precision([0.9, 0.1], [1, 0]) == 1.0
    assert cade.micro_f1([[0], [1]], [[0], [0]]) == 0.5


def test_evaluate_node_classification():
    g, labels = two_cliques(k=10)
    cfg = dict(SMALL, **{"eval.method": "raw", "eval.probe_epochs": "100"})
    report = cade.evaluate(g, labels, cfg)
    assert report["task"] == "nc"
    assert 0.0 <= report["mean"] <= 1.0
    assert len(report["runs"]) == 1


def test_gradcheck_passes():
    report = cade.gradcheck()
    assert report["worst"] < 1e-4
    assert len(report["entries"]) > 20


def test_cli_help_and_eval(tmp_path):
    code, out, _ = cade.run_cli(["--help"])
    assert code == 0
    assert "train" in out

    g, labels = two_cliques(k=10)
    edges = tmp_path / "edges.txt"
    edges.write_text("".join(f"{u} {v}\n" for u, v in g.edges()))
    feats = tmp_path / "features.txt"
    np.savetxt(feats, g.features)
    labs = tmp_path / "labels.txt"
    labs.write_text("".join(f"{i} {c[0]}\n" for i, c in enumerate(labels)))
    report = tmp_path / "report.json"
    args = ["eval", "--edges", str(edges), "--features", str(feats), "--labels", str(labs),
            "--method", "raw", "--report", str(report)]
    code, _, err = cade.run_cli(args)
    assert code == 0, err
    assert json.loads(report.read_text())["method"] == "raw"

    g2, labels2 = cade.load_dataset(edges, feats, labs)
    assert g2.num_nodes == g.num_nodes
    assert labels2 == labels
