"""Command line front end; flags mirror CaptureSession one to one."""
import argparse
import sys
from pathlib import Path

from .capture import run_capture
from .session import (
    CameraParams,
    CaptureError,
    CaptureSession,
    WeatherParams,
    preset_weather,
    weather_presets,
)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="carla-capture",
        description="Capture front-camera frames with metadata from a CARLA server.",
    )
    p.add_argument("out", nargs="?", help="output directory")
    p.add_argument("--frames", type=int, default=10, help="frames to save (default 10)")
    p.add_argument("--period", type=int, default=20,
                   help="ticks between saves; 20 at the default delta is one frame "
                        "per simulated second")
    p.add_argument("--map", default="", help="map to load (default: whatever is running)")
    p.add_argument("--fixed-delta", type=float, default=0.05,
                   help="simulation step in seconds (default 0.05)")
    p.add_argument("--seed", type=int, default=0, help="spawn-point selection seed")
    p.add_argument("--autopilot", action="store_true",
                   help="let the traffic manager drive (default: parked)")

    w = p.add_argument_group("weather (preset first, individual flags override)")
    w.add_argument("--preset", default=None, help="named weather preset")
    w.add_argument("--sun-altitude", type=float, default=None)
    w.add_argument("--sun-azimuth", type=float, default=None)
    w.add_argument("--fog", type=float, default=None, help="fog density percent")
    w.add_argument("--precipitation", type=float, default=None)
    w.add_argument("--wetness", type=float, default=None)
    w.add_argument("--list-presets", action="store_true",
                   help="print the preset table and exit")

    c = p.add_argument_group("camera")
    c.add_argument("--width", type=int, default=640)
    c.add_argument("--height", type=int, default=640)
    c.add_argument("--fov", type=float, default=90.0)
    c.add_argument("--mount-forward", type=float, default=1.5, help="meters ahead of origin")
    c.add_argument("--mount-up", type=float, default=2.4, help="meters above origin")

    s = p.add_argument_group("server")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=2000)
    s.add_argument("--timeout", type=float, default=10.0,
                   help="RPC and per-frame wait, seconds")
    return p


def _weather_from(args) -> WeatherParams:
    base = preset_weather(args.preset) if args.preset else WeatherParams()
    overrides = {
        "sun_altitude": args.sun_altitude,
        "sun_azimuth": args.sun_azimuth,
        "fog_density": args.fog,
        "precipitation": args.precipitation,
        "wetness": args.wetness,
    }
    fields = {k: v for k, v in overrides.items() if v is not None}
    if not fields:
        return base
    return WeatherParams(**{**base.to_dict(), **fields})


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.list_presets:
        for name, w in sorted(weather_presets().items()):
            print(f"{name}: sun {w.sun_altitude:g}/{w.sun_azimuth:g} deg, "
                  f"fog {w.fog_density:g}%, rain {w.precipitation:g}%, "
                  f"wet {w.wetness:g}%")
        return 0
    if args.out is None:
        print("error: an output directory is required", file=sys.stderr)
        return 1

    try:
        session = CaptureSession(
            out_dir=Path(args.out),
            frame_count=args.frames,
            capture_period=args.period,
            map_name=args.map,
            weather=_weather_from(args),
            camera=CameraParams(
                width=args.width,
                height=args.height,
                fov=args.fov,
                mount_forward=args.mount_forward,
                mount_up=args.mount_up,
            ),
            fixed_delta=args.fixed_delta,
            seed=args.seed,
            autopilot=args.autopilot,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        result = run_capture(
            session, host=args.host, port=args.port, timeout=args.timeout
        )
    except CaptureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(f"map {result.map_name}, server {result.server_version}")
    print(f"{len(result.frames)} frames -> {result.out_dir}")
    print(f"metadata -> {result.metadata_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
