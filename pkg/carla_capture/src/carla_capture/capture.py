"""Synchronous frame capture against a running CARLA server.

One vehicle, one front RGB camera, fixed-delta stepping. Every
``capture_period``-th tick is saved as ``frame_NNNNN.png`` with a
stem-matched ``frame_NNNNN.json`` sidecar; ``capture.jsonl`` aggregates
the session header plus one line per frame. Everything the session
spawns is destroyed on the way out, error or not, and the world
settings are restored.
"""
import json
import queue
import random
from dataclasses import dataclass, field
from pathlib import Path

from .session import CaptureError, CaptureSession


@dataclass(frozen=True)
class FrameRecord:
    stem: str
    image_path: Path
    meta_path: Path
    sim_frame: int
    sim_seconds: float


@dataclass
class CaptureResult:
    out_dir: Path
    metadata_path: Path
    map_name: str
    server_version: str
    frames: list[FrameRecord] = field(default_factory=list)
    spawned_actor_ids: list[int] = field(default_factory=list)


def _import_carla():
    try:
        import carla
    except ImportError:
        raise CaptureError(
            "the carla client library is not installed; install the "
            "'client' extra (pip install 'carla-capture[client]') with a "
            "version matching your server"
        ) from None
    return carla


def _short_map(name: str) -> str:
    return name.rsplit("/", 1)[-1]


def _ensure_map(client, world, wanted: str):
    current = _short_map(world.get_map().name)
    if not wanted or wanted == current:
        return world, current
    available = sorted({_short_map(m) for m in client.get_available_maps()})
    if wanted not in available:
        raise CaptureError(
            f"map {wanted!r} is not on this server; available: {', '.join(available)}"
        )
    try:
        world = client.load_world(wanted)
    except RuntimeError as exc:
        raise CaptureError(f"loading map {wanted!r} failed: {exc}") from exc
    return world, _short_map(world.get_map().name)


def _to_api_weather(api, w):
    return api.WeatherParameters(
        sun_altitude_angle=w.sun_altitude,
        sun_azimuth_angle=w.sun_azimuth,
        fog_density=w.fog_density,
        precipitation=w.precipitation,
        wetness=w.wetness,
    )


def _spawn_vehicle(world, seed: int, spawned: list):
    lib = world.get_blueprint_library()
    try:
        bp = lib.find("vehicle.tesla.model3")
    except Exception:
        bp = None
    if bp is None:
        candidates = sorted(lib.filter("vehicle.*"), key=lambda b: b.id)
        if not candidates:
            raise CaptureError("no vehicle blueprints on this server")
        bp = candidates[0]
    points = world.get_map().get_spawn_points()
    if not points:
        raise CaptureError("map has no spawn points")
    order = list(range(len(points)))
    random.Random(seed).shuffle(order)
    for i in order:
        vehicle = world.try_spawn_actor(bp, points[i])
        if vehicle is not None:
            spawned.append(vehicle)
            return vehicle
    raise CaptureError(f"all {len(points)} spawn points are blocked")


def _spawn_camera(api, world, vehicle, cam, spawned: list):
    bp = world.get_blueprint_library().find("sensor.camera.rgb")
    bp.set_attribute("image_size_x", str(cam.width))
    bp.set_attribute("image_size_y", str(cam.height))
    bp.set_attribute("fov", str(cam.fov))
    mount = api.Transform(api.Location(x=cam.mount_forward, z=cam.mount_up))
    try:
        camera = world.spawn_actor(bp, mount, attach_to=vehicle)
    except RuntimeError as exc:
        raise CaptureError(f"camera spawn failed: {exc}") from exc
    spawned.append(camera)
    return camera


def _teardown(world, spawned: list, original_settings, tm) -> tuple[list[str], list[int]]:
    """Best-effort destruction of session actors; returns (failures, leaked ids)."""
    failures = []
    for actor in reversed(spawned):
        aid = getattr(actor, "id", "?")
        stop = getattr(actor, "stop", None)
        if callable(stop):
            try:
                stop()
            except Exception as exc:
                failures.append(f"stop actor {aid}: {exc}")
        try:
            if not actor.destroy():
                failures.append(f"destroy refused for actor {aid}")
        except Exception as exc:
            failures.append(f"destroy actor {aid}: {exc}")
    if tm is not None:
        try:
            tm.set_synchronous_mode(False)
        except Exception as exc:
            failures.append(f"traffic manager reset: {exc}")
    try:
        world.apply_settings(original_settings)
    except Exception as exc:
        failures.append(f"restore settings: {exc}")
    leaked: list[int] = []
    try:
        alive = {a.id for a in world.get_actors()}
        leaked = [a.id for a in spawned if a.id in alive]
    except Exception as exc:
        failures.append(f"leak audit: {exc}")
    return failures, leaked


def _vehicle_state(vehicle) -> dict:
    t = vehicle.get_transform()
    return {
        "x": t.location.x,
        "y": t.location.y,
        "z": t.location.z,
        "pitch": t.rotation.pitch,
        "yaw": t.rotation.yaw,
        "roll": t.rotation.roll,
    }


def _capture_loop(world, camera, vehicle, session, map_name, timeout):
    frames = []
    records = []
    q = queue.Queue()
    camera.listen(q.put)
    ticks = 0
    while len(frames) < session.frame_count:
        world.tick()
        ticks += 1
        try:
            image = q.get(timeout=timeout)
        except queue.Empty:
            raise CaptureError(
                f"camera produced no frame within {timeout}s (tick {ticks})"
            ) from None
        if ticks % session.capture_period:
            continue
        index = len(frames)
        stem = f"frame_{index:05d}"
        image_path = session.out_dir / f"{stem}.png"
        image.save_to_disk(str(image_path))
        snap = world.get_snapshot()
        record = {
            "type": "frame",
            "stem": stem,
            "index": index,
            "sim_frame": int(image.frame),
            "sim_seconds": float(snap.timestamp.elapsed_seconds),
            "map": map_name,
            "weather": session.weather.to_dict(),
            "vehicle": _vehicle_state(vehicle),
        }
        meta_path = session.out_dir / f"{stem}.json"
        meta_path.write_text(
            json.dumps(record, sort_keys=True) + "\n", encoding="utf-8"
        )
        frames.append(
            FrameRecord(stem, image_path, meta_path, record["sim_frame"],
                        record["sim_seconds"])
        )
        records.append(record)
    return frames, records


def run_capture(
    session: CaptureSession,
    *,
    host: str = "127.0.0.1",
    port: int = 2000,
    timeout: float = 10.0,
    api=None,
) -> CaptureResult:
    """Run one capture session; returns paths and an actor audit.

    ``timeout`` is both the client RPC timeout and the per-frame wait.
    ``api`` defaults to the installed carla module; tests substitute a
    double. Raises CaptureError when the server is unreachable, the map
    is missing, spawning fails, or an actor survives teardown.
    """
    api = api if api is not None else _import_carla()
    client = api.Client(host, port)
    client.set_timeout(timeout)
    try:
        version = client.get_server_version()
    except RuntimeError as exc:
        raise CaptureError(f"no CARLA server at {host}:{port} ({exc})") from exc

    session.out_dir.mkdir(parents=True, exist_ok=True)
    metadata_path = session.out_dir / "capture.jsonl"

    try:
        world = client.get_world()
    except RuntimeError as exc:
        raise CaptureError(f"could not fetch the world: {exc}") from exc
    if session.frame_count == 0:
        # metadata only; the server is left completely untouched
        map_name = _short_map(world.get_map().name)
        header = _header(session, version, map_name)
        metadata_path.write_text(json.dumps(header, sort_keys=True) + "\n",
                                 encoding="utf-8")
        return CaptureResult(session.out_dir, metadata_path, map_name, version)

    world, map_name = _ensure_map(client, world, session.map_name)
    original_settings = world.get_settings()
    spawned: list = []
    tm = None
    try:
        try:
            settings = world.get_settings()
            settings.synchronous_mode = True
            settings.fixed_delta_seconds = session.fixed_delta
            world.apply_settings(settings)
            world.set_weather(_to_api_weather(api, session.weather))
            vehicle = _spawn_vehicle(world, session.seed, spawned)
            camera = _spawn_camera(api, world, vehicle, session.camera, spawned)
            if session.autopilot:
                tm = client.get_trafficmanager()
                tm.set_synchronous_mode(True)
                vehicle.set_autopilot(True, tm.get_port())
            frames, records = _capture_loop(
                world, camera, vehicle, session, map_name, timeout
            )
        except CaptureError:
            raise
        except RuntimeError as exc:
            raise CaptureError(f"capture failed: {exc}") from exc
    finally:
        failures, leaked = _teardown(world, spawned, original_settings, tm)

    lines = [_header(session, version, map_name)] + records
    metadata_path.write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in lines),
        encoding="utf-8",
    )
    if failures or leaked:
        raise CaptureError(
            "teardown incomplete: " + "; ".join(failures + [f"leaked actor {i}" for i in leaked])
        )
    return CaptureResult(
        session.out_dir,
        metadata_path,
        map_name,
        version,
        frames=frames,
        spawned_actor_ids=[a.id for a in spawned],
    )


def _header(session: CaptureSession, version: str, map_name: str) -> dict:
    return {
        "type": "session",
        "server_version": version,
        "map": map_name,
        "map_requested": session.map_name or None,
        **{k: v for k, v in session.to_dict().items() if k != "map_name"},
    }
