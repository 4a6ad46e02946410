"""Capture configuration: weather, camera, and session parameters."""
import math
from dataclasses import dataclass, field
from pathlib import Path


class CaptureError(RuntimeError):
    """Capture could not run or complete; actors are torn down first."""


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite: {value!r}")


def _check_percent(name: str, value: float) -> None:
    _check_finite(name, value)
    if not 0.0 <= value <= 100.0:
        raise ValueError(f"{name} out of range [0, 100]: {value}")


@dataclass(frozen=True)
class WeatherParams:
    """Server weather state, the subset this tool controls.

    Angles in degrees; density, precipitation, and wetness are
    percentages. Defaults describe a clear noon.
    """

    sun_altitude: float = 90.0
    sun_azimuth: float = 0.0
    fog_density: float = 0.0
    precipitation: float = 0.0
    wetness: float = 0.0

    def __post_init__(self):
        _check_finite("sun_altitude", self.sun_altitude)
        if not -90.0 <= self.sun_altitude <= 90.0:
            raise ValueError(f"sun_altitude out of range [-90, 90]: {self.sun_altitude}")
        _check_finite("sun_azimuth", self.sun_azimuth)
        if not 0.0 <= self.sun_azimuth <= 360.0:
            raise ValueError(f"sun_azimuth out of range [0, 360]: {self.sun_azimuth}")
        _check_percent("fog_density", self.fog_density)
        _check_percent("precipitation", self.precipitation)
        _check_percent("wetness", self.wetness)

    def to_dict(self) -> dict:
        return {
            "sun_altitude": self.sun_altitude,
            "sun_azimuth": self.sun_azimuth,
            "fog_density": self.fog_density,
            "precipitation": self.precipitation,
            "wetness": self.wetness,
        }


@dataclass(frozen=True)
class CameraParams:
    """Front RGB camera: resolution, field of view, mount offset.

    The mount offset is relative to the vehicle origin, meters forward
    along x and up along z (roughly hood height by default).
    """

    width: int = 640
    height: int = 640
    fov: float = 90.0
    mount_forward: float = 1.5
    mount_up: float = 2.4

    def __post_init__(self):
        for name in ("width", "height"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer: {v!r}")
        _check_finite("fov", self.fov)
        if not 0.0 < self.fov < 180.0:
            raise ValueError(f"fov out of range (0, 180): {self.fov}")
        _check_finite("mount_forward", self.mount_forward)
        _check_finite("mount_up", self.mount_up)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "fov": self.fov,
            "mount_forward": self.mount_forward,
            "mount_up": self.mount_up,
        }


@dataclass(frozen=True)
class CaptureSession:
    """Everything one capture run needs besides the server address.

    ``capture_period`` counts simulator ticks between saved frames; at
    the default 0.05 s fixed delta, the default period of 20 saves one
    frame per simulated second. ``map_name`` empty means whatever map
    the server currently runs.
    """

    out_dir: Path
    frame_count: int = 10
    capture_period: int = 20
    map_name: str = ""
    weather: WeatherParams = field(default_factory=WeatherParams)
    camera: CameraParams = field(default_factory=CameraParams)
    fixed_delta: float = 0.05
    seed: int = 0
    autopilot: bool = False

    def __post_init__(self):
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if not isinstance(self.frame_count, int) or self.frame_count < 0:
            raise ValueError(f"frame_count must be a non-negative integer: {self.frame_count!r}")
        if not isinstance(self.capture_period, int) or self.capture_period < 1:
            raise ValueError(f"capture_period must be a positive integer: {self.capture_period!r}")
        _check_finite("fixed_delta", self.fixed_delta)
        if self.fixed_delta <= 0.0:
            raise ValueError(f"fixed_delta must be positive: {self.fixed_delta}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer: {self.seed!r}")

    def to_dict(self) -> dict:
        return {
            "out_dir": str(self.out_dir),
            "frame_count": self.frame_count,
            "capture_period": self.capture_period,
            "map_name": self.map_name,
            "weather": self.weather.to_dict(),
            "camera": self.camera.to_dict(),
            "fixed_delta": self.fixed_delta,
            "seed": self.seed,
            "autopilot": self.autopilot,
        }


# Sun altitude 90 puts the sun at zenith; 8 degrees is just above the
# horizon. Density and wetness values picked to be visibly drastic.
_PRESETS = {
    "clear_noon": WeatherParams(),
    "low_sun": WeatherParams(sun_altitude=8.0, sun_azimuth=270.0),
    "fog": WeatherParams(sun_altitude=45.0, fog_density=60.0),
    "heavy_fog": WeatherParams(sun_altitude=45.0, fog_density=80.0),
    "rain_wet": WeatherParams(sun_altitude=45.0, precipitation=80.0, wetness=100.0),
}


def weather_presets() -> dict[str, WeatherParams]:
    """Named weather presets; a fresh copy each call."""
    return dict(_PRESETS)


def preset_weather(name: str) -> WeatherParams:
    try:
        return _PRESETS[name]
    except KeyError:
        valid = ", ".join(sorted(_PRESETS))
        raise ValueError(f"unknown weather preset {name!r}; valid: {valid}") from None
