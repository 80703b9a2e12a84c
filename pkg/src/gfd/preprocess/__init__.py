from gfd.preprocess.features import FEATURE_NAMES, FeatureVector, extract_features, feature_matrix
from gfd.preprocess.pipeline import FeatureMode, Pipeline, fit_pipeline
from gfd.preprocess.scaling import MinMaxParams, ScalerParams, fit_minmax, fit_scaler, transform
from gfd.preprocess.windows import DEFAULT_WINDOW_SIZE, SplitResult, Window, pad_to_max, split, window, window_count

__all__ = [
    "DEFAULT_WINDOW_SIZE",
    "FEATURE_NAMES",
    "FeatureMode",
    "FeatureVector",
    "MinMaxParams",
    "Pipeline",
    "ScalerParams",
    "SplitResult",
    "Window",
    "extract_features",
    "feature_matrix",
    "fit_minmax",
    "fit_pipeline",
    "fit_scaler",
    "pad_to_max",
    "split",
    "transform",
    "window",
    "window_count",
]
