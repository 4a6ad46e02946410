"""Thin CARLA capture client: spawn, drive, photograph, tear down."""
from .capture import CaptureResult, FrameRecord, run_capture
from .session import (
    CameraParams,
    CaptureError,
    CaptureSession,
    WeatherParams,
    preset_weather,
    weather_presets,
)

__all__ = [
    "CameraParams",
    "CaptureError",
    "CaptureResult",
    "CaptureSession",
    "FrameRecord",
    "WeatherParams",
    "preset_weather",
    "run_capture",
    "weather_presets",
]
