from gfd.detect.bundle import Bundle, load_bundle, read_bundle, save_bundle, write_bundle
from gfd.detect.judge import TrainResult, Verdict, calibrate_bundle, judge, sequence_scores, train_detector, window_scores
from gfd.detect.threshold import Threshold, ThresholdStability, aggregate, calibrate, threshold_stability

__all__ = [
    "Bundle",
    "Threshold",
    "ThresholdStability",
    "TrainResult",
    "Verdict",
    "aggregate",
    "calibrate",
    "calibrate_bundle",
    "judge",
    "load_bundle",
    "read_bundle",
    "save_bundle",
    "sequence_scores",
    "threshold_stability",
    "train_detector",
    "window_scores",
    "write_bundle",
]
