"""Edge-restoration quality assessment (ERQA) for super-resolved video frames.

The metric detects Canny edges in a ground-truth frame and in the restored
frame, optionally compensating a global integer shift first, and reports the
F1 score of the edge match with tolerance for one-pixel local shifts.
"""

from .baselines import SsimParams, metric_panel, ssim
from .edges import CannyEdgeDetector, CannyParams, detect_edges
from .exceptions import (AlignmentError, ConfigError, CorrelationError, DecodeError,
                         ErqaError, FittingError, GeometryError, ManifestError)
from .image import Region, ShiftVector, crop, load_frame, overlap_pair, save_frame, to_luma
from .matching import (ABLATION_STAGES, ERQA, EdgeMatchResult, ErqaConfig, Label, erqa,
                       f1_score, match_edges, render_classification)
from .shift import (GlobalShiftAligner, ShiftSearchResult, find_global_shift, psnr,
                    score_with_compensation)
from .stats import (BradleyTerry, CorrelationReport, build_correlation_report,
                    fit_bradley_terry, plcc, srcc)

__version__ = "0.1.0"

__all__ = [
    "ABLATION_STAGES", "AlignmentError", "BradleyTerry", "CannyEdgeDetector", "CannyParams",
    "ConfigError", "CorrelationError", "CorrelationReport", "DecodeError", "ERQA",
    "EdgeMatchResult", "ErqaConfig", "ErqaError", "FittingError", "GeometryError",
    "GlobalShiftAligner", "Label", "ManifestError", "Region", "ShiftSearchResult",
    "ShiftVector", "SsimParams", "build_correlation_report", "crop", "detect_edges", "erqa",
    "f1_score", "find_global_shift", "fit_bradley_terry", "load_frame", "match_edges",
    "metric_panel", "overlap_pair", "plcc", "psnr", "render_classification", "save_frame",
    "score_with_compensation", "srcc", "ssim", "to_luma",
]
