import math

import pytest

import gnncl


def make_graph(seed=7, **overrides):
    params = dict(
        num_nodes=160,
        feature_dim=6,
        fraud_ratio=0.2,
        relation_count=2,
        intra_prob=0.05,
        camouflage_rate=0.3,
        seed=seed,
    )
    params.update(overrides)
    return gnncl.generate_synthetic(**params)


def small_config(**overrides):
    cfg = gnncl.TrainConfig()
    cfg.epochs = 3
    cfg.hidden_dim = 8
    cfg.purifier_hidden = 8
    cfg.rnn_hidden = 4
    cfg.chunks = 2
    cfg.batch_size = 64
    cfg.seed = 5
    for key, value in overrides.items():
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


def make_trainer(graph, **overrides):
    cfg = small_config(**overrides)
    split = gnncl.split_stratified(graph, cfg.train_ratio, cfg.seed)
    return gnncl.Trainer(graph, split, cfg)


def test_generate_shapes_and_labels():
    g = make_graph()
    assert g.num_nodes == 160
    assert g.feature_dim == 6
    assert len(g.features) == 160 * 6
    assert len(g.labels) == 160
    assert sum(g.labels) == round(0.2 * 160)
    assert set(g.labels) == {0, 1}
    assert len(g.relations) == 2
    assert g.total_edges() > 0
    g.validate()


def test_generate_is_deterministic():
    a, b = make_graph(seed=3), make_graph(seed=3)
    assert a.features == b.features
    assert a.labels == b.labels
    assert [r.edges for r in a.relations] == [r.edges for r in b.relations]
    assert make_graph(seed=4).features != a.features


def test_split_partitions_nodes():
    g = make_graph()
    split = gnncl.split_stratified(g, 0.4, seed=2)
    train, test = list(split.train), list(split.test)
    assert sorted(train + test) == list(range(g.num_nodes))
    assert train == sorted(set(train))
    frauds = [v for v in train if g.labels[v] == 1]
    assert split.train_pos == frauds
    # Stratified: the train fraud count matches the global ratio within one.
    assert abs(len(frauds) - 0.2 * len(train)) <= 1


def test_training_logs():
    g = make_graph()
    trainer = make_trainer(g)
    logs = trainer.run_all()
    assert [log["epoch"] for log in logs] == [1, 2, 3]
    for log in logs:
        for key in ("loss_total", "loss_head", "loss_gnn", "loss_purifier"):
            assert math.isfinite(log[key]) and log[key] >= 0.0
        composed = log["loss_head"] + log["loss_gnn"] + 2.0 * log["loss_purifier"]
        assert log["loss_total"] == pytest.approx(composed, rel=1e-9)
        assert len(log["p"]) == 1 and len(log["p"][0]) == 2
        assert all(0.05 <= p <= 1.0 for p in log["p"][0])
        assert log["seconds"] >= 0.0
    assert logs[-1]["loss_total"] < logs[0]["loss_total"]


def test_predict_returns_probabilities():
    g = make_graph()
    trainer = make_trainer(g)
    trainer.run_all()
    scores = trainer.predict(trainer.split.test)
    assert len(scores) == len(trainer.split.test)
    assert all(0.0 < s < 1.0 for s in scores)


def test_evaluate_schema():
    g = make_graph()
    trainer = make_trainer(g)
    trainer.run_all()
    report = trainer.evaluate_test()
    n = len(trainer.split.test)
    assert report["tp"] + report["tn"] + report["fp"] + report["fn"] == n
    for key in ("precision", "recall", "f", "accuracy"):
        assert 0.0 <= report[key] <= 1.0
    assert report["auc"] is None or 0.0 <= report["auc"] <= 1.0


def test_same_seed_runs_match():
    g = make_graph()
    logs_a = make_trainer(g).run_all()
    logs_b = make_trainer(g).run_all()
    for a, b in zip(logs_a, logs_b):
        assert a["loss_total"] == b["loss_total"]
        assert a["p"] == b["p"]
        assert a["dbar"] == b["dbar"]


def test_checkpoint_round_trip(tmp_path):
    g = make_graph()
    trainer = make_trainer(g)
    trainer.run_all()
    path = tmp_path / "checkpoint"
    trainer.save_checkpoint(str(path))

    restored = gnncl.load_trainer(str(path), g)
    assert restored.config.epochs == 3
    assert list(restored.split.test) == list(trainer.split.test)
    assert restored.predict(restored.split.test) == trainer.predict(
        trainer.split.test
    )


def test_load_convenience_reapplies_preprocessing(tmp_path):
    g = make_graph()
    data_dir = tmp_path / "data"
    gnncl.save_graph(g, str(data_dir))

    reloaded = gnncl.load_graph(str(data_dir))
    assert reloaded.features == g.features
    fp = gnncl.fingerprint_dataset(str(data_dir))
    assert len(fp) == 16 and fp == gnncl.fingerprint_dataset(str(data_dir))

    gnncl.standardize_features(reloaded)
    trainer = make_trainer(reloaded, standardize_features=True)
    trainer.run_all()
    path = tmp_path / "checkpoint"
    trainer.save_checkpoint(str(path))

    restored = gnncl.load(str(path), str(data_dir))
    assert restored.predict(restored.split.test) == trainer.predict(
        trainer.split.test
    )


def test_gcn_baseline_trains():
    g = make_graph()
    trainer = make_trainer(g, model="gcn")
    logs = trainer.run_all()
    assert all(log["p"] == [] for log in logs)
    assert math.isfinite(logs[-1]["loss_total"])


def test_compute_metrics_fixed_case():
    scores = [0.9, 0.8, 0.2, 0.7, 0.1, 0.2, 0.3, 0.1, 0.05, 0.4]
    labels = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    report = gnncl.compute_metrics(scores, labels)
    assert (report["tp"], report["fp"], report["fn"], report["tn"]) == (2, 1, 1, 6)
    for key in ("precision", "recall", "f"):
        assert report[key] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert report["accuracy"] == pytest.approx(0.8, abs=1e-12)
    single = gnncl.compute_metrics([0.2, 0.7], [1, 1])
    assert single["auc"] is None


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        small_config(epochs=0)
    with pytest.raises(ValueError):
        small_config(train_ratio=1.5)
    with pytest.raises(ValueError):
        small_config(model="transformer")
    with pytest.raises(ValueError):
        gnncl.generate_synthetic(num_nodes=10, fraud_ratio=2.0)
