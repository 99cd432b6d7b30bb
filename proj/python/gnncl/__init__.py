"""Camouflage-resistant fraud detection on multi-relation graphs."""

try:
    from . import _core as core
except ImportError:  # source tree: pick up the module from the build dir
    import os
    import sys

    _build_dir = os.environ.get("GNNCL_CORE_DIR")
    if not _build_dir:
        raise
    sys.path.insert(0, _build_dir)
    import _core as core  # type: ignore[no-redef]

__version__ = core.__version__

Graph = core.Graph
Relation = core.Relation
DataSplit = core.DataSplit
TrainConfig = core.TrainConfig
Trainer = core.Trainer

generate_synthetic = core.generate_synthetic
load_graph = core.load_graph
save_graph = core.save_graph
fingerprint_dataset = core.fingerprint_dataset
standardize_features = core.standardize_features
split_stratified = core.split_stratified
checkpoint_config = core.checkpoint_config
load_trainer = core.load_trainer
compute_metrics = core.compute_metrics


def load(checkpoint_path, data_dir):
    """Restore a trainer from a checkpoint plus the dataset it was trained on.

    Reapplies the stored preprocessing and split, so predictions match the
    training run exactly.
    """
    graph = core.load_graph(data_dir)
    config = core.checkpoint_config(checkpoint_path)
    if config.standardize_features:
        core.standardize_features(graph)
    return core.load_trainer(checkpoint_path, graph)


__all__ = [
    "Graph",
    "Relation",
    "DataSplit",
    "TrainConfig",
    "Trainer",
    "generate_synthetic",
    "load_graph",
    "save_graph",
    "fingerprint_dataset",
    "standardize_features",
    "split_stratified",
    "checkpoint_config",
    "load_trainer",
    "compute_metrics",
    "load",
    "__version__",
]
