"""Sensing metrics, tissue classification and sweep drivers."""
from .classify import CalibrationWarning, Classification, ClassifierModel, calibrate_offset, classify_tissue
from .metrics import (
    FrequencySweep, MetricError, RangeError, SensingMetrics, center_frequency, compute_metrics,
    derive_metrics, matched_bands, matched_interval, phase_at, phase_difference, wrap_deg,
)

__all__ = [
    "CalibrationWarning", "Classification", "ClassifierModel", "FrequencySweep", "MetricError",
    "RangeError", "SensingMetrics", "calibrate_offset", "center_frequency", "classify_tissue",
    "compute_metrics", "derive_metrics", "matched_bands", "matched_interval", "phase_at",
    "phase_difference", "wrap_deg",
]
