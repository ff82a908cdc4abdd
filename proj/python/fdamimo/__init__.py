"""FDA-MIMO range-angle estimation under carrier-frequency offsets."""

from ._core import (
    GridSpec,
    OffsetModel,
    RadarConfig,
    Target,
    covariance_model,
    crlb,
    draw_stack,
    equalized_snr,
    music_2d,
    music_rows,
    omp,
    run_cli,
    steering_vector,
)

__all__ = [
    "GridSpec",
    "OffsetModel",
    "RadarConfig",
    "Target",
    "covariance_model",
    "crlb",
    "draw_stack",
    "equalized_snr",
    "music_2d",
    "music_rows",
    "omp",
    "run_cli",
    "steering_vector",
]
