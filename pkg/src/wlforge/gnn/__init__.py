"""Dense GNN layers, the hierarchical k-GNN model and its training loop."""
from .layers import (
    Aggregator,
    GnnLayerParams,
    activate,
    basic_merge,
    det_matmul,
    gnn_layer_basic,
    gnn_layer_general,
    hierarchical_init,
    iso_one_hot,
    kgnn_layer,
    one_hot,
    readout,
    sorted_row_sum,
)
from .model import (
    ARCHITECTURES,
    Batch,
    GnnConfig,
    GnnModel,
    backward,
    forward,
    gradients,
    init_model,
    load_model,
    loss_and_gradients,
    make_batch,
    model_from_dict,
    model_to_dict,
    predict,
)
from .train import Adam, EpochRecord, TrainConfig, accuracy, label_count_task, log_to_csv, train

__all__ = [
    "ARCHITECTURES", "Adam", "Aggregator", "Batch", "EpochRecord", "GnnConfig", "GnnLayerParams",
    "GnnModel", "TrainConfig", "accuracy", "activate", "backward", "basic_merge", "det_matmul",
    "forward", "gnn_layer_basic", "gnn_layer_general", "gradients", "hierarchical_init",
    "init_model", "iso_one_hot", "kgnn_layer", "label_count_task", "load_model", "log_to_csv",
    "loss_and_gradients", "make_batch", "model_from_dict", "model_to_dict", "one_hot", "predict",
    "readout", "sorted_row_sum", "train",
]
