"""Three-stage node classification for homophilous and heterophilous graphs."""

from ._glinkx import (
    Dataset,
    GlinkxError,
    config_text,
    counting_slope,
    kge_train,
    label_prop,
    linkx,
    parametric_vs_counting,
    planted,
    predict,
    profiles,
    run,
)

__all__ = [
    "Dataset",
    "GlinkxError",
    "config_text",
    "counting_slope",
    "kge_train",
    "label_prop",
    "linkx",
    "parametric_vs_counting",
    "planted",
    "predict",
    "profiles",
    "run",
]
