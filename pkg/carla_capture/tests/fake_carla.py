"""Scripted stand-in for the carla client module.

Implements exactly the surface capture.py touches, with knobs for the
failure modes worth testing: unreachable server, blocked spawn points,
camera spawn collision, a sensor that never produces, and an actor
that refuses destruction.
"""
import struct
import zlib
from types import SimpleNamespace


def tiny_png() -> bytes:
    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(
            ">I", zlib.crc32(body) & 0xFFFFFFFF
        )

    ihdr = struct.pack(">IIBBBBB", 1, 1, 8, 2, 0, 0, 0)
    idat = zlib.compress(b"\x00\x00\x00\x00")
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", idat)
        + chunk(b"IEND", b"")
    )


class FakeWeatherParameters:
    def __init__(self, **kwargs):
        self.values = dict(kwargs)


class FakeLocation:
    def __init__(self, x=0.0, y=0.0, z=0.0):
        self.x, self.y, self.z = x, y, z


class FakeTransform:
    def __init__(self, location=None):
        self.location = location or FakeLocation()


class FakeSettings:
    def __init__(self, synchronous_mode=False, fixed_delta_seconds=None):
        self.synchronous_mode = synchronous_mode
        self.fixed_delta_seconds = fixed_delta_seconds

    def copy(self):
        return FakeSettings(self.synchronous_mode, self.fixed_delta_seconds)


class FakeBlueprint:
    def __init__(self, bp_id):
        self.id = bp_id
        self.attributes = {}

    def set_attribute(self, key, value):
        self.attributes[key] = value


class FakeLibrary:
    def __init__(self, ids):
        self._ids = list(ids)

    def find(self, bp_id):
        if bp_id not in self._ids:
            raise IndexError(f"blueprint {bp_id} not found")
        return FakeBlueprint(bp_id)

    def filter(self, pattern):
        prefix = pattern.rstrip("*")
        return [FakeBlueprint(i) for i in self._ids if i.startswith(prefix)]


class FakeActor:
    def __init__(self, world, actor_id, blueprint):
        self.world = world
        self.id = actor_id
        self.blueprint = blueprint
        self.autopilot_calls = []

    def destroy(self):
        if self.id in self.world.refuse_destroy_ids:
            return False
        self.world.alive.pop(self.id, None)
        return True

    def get_transform(self):
        return SimpleNamespace(
            location=SimpleNamespace(x=1.0, y=2.0, z=0.3),
            rotation=SimpleNamespace(pitch=0.0, yaw=90.0, roll=0.0),
        )

    def set_autopilot(self, enabled, port=None):
        self.autopilot_calls.append((enabled, port))


class FakeSensor(FakeActor):
    def __init__(self, world, actor_id, blueprint):
        super().__init__(world, actor_id, blueprint)
        self.callback = None

    def listen(self, callback):
        self.callback = callback

    def stop(self):
        self.callback = None


class FakeImage:
    def __init__(self, frame):
        self.frame = frame

    def save_to_disk(self, path):
        with open(path, "wb") as fh:
            fh.write(tiny_png())


class FakeTrafficManager:
    def __init__(self):
        self.sync_calls = []

    def set_synchronous_mode(self, enabled):
        self.sync_calls.append(enabled)

    def get_port(self):
        return 8000


class FakeWorld:
    def __init__(self, api, map_name):
        self.api = api
        self.map_name = map_name
        self.settings = FakeSettings()
        self.applied_settings = []
        self.weather = None
        self.alive = {}
        self.spawn_attempts = []
        self.frame = 0
        self._next_id = 1
        self.refuse_destroy_ids = set()

    def get_map(self):
        spawn_points = [FakeTransform() for _ in range(5)]
        return SimpleNamespace(
            name=f"Carla/Maps/{self.map_name}",
            get_spawn_points=lambda: spawn_points,
        )

    def get_settings(self):
        return self.settings.copy()

    def apply_settings(self, settings):
        self.settings = settings.copy()
        self.applied_settings.append(settings.copy())

    def set_weather(self, weather):
        self.weather = weather

    def get_blueprint_library(self):
        return FakeLibrary(
            ["vehicle.tesla.model3", "vehicle.audi.tt", "sensor.camera.rgb"]
        )

    def try_spawn_actor(self, blueprint, transform):
        self.spawn_attempts.append(blueprint.id)
        if self.api.blocked_spawn_points:
            return None
        return self._register(blueprint)

    def spawn_actor(self, blueprint, transform, attach_to=None):
        self.spawn_attempts.append(blueprint.id)
        if self.api.camera_spawn_error and blueprint.id.startswith("sensor."):
            raise RuntimeError("collision at spawn position")
        return self._register(blueprint)

    def _register(self, blueprint):
        cls = FakeSensor if blueprint.id.startswith("sensor.") else FakeActor
        actor = cls(self, self._next_id, blueprint)
        self._next_id += 1
        self.alive[actor.id] = actor
        return actor

    def tick(self):
        self.frame += 1
        if not self.api.silent_camera:
            for actor in list(self.alive.values()):
                if isinstance(actor, FakeSensor) and actor.callback:
                    actor.callback(FakeImage(self.frame))
        return self.frame

    def get_snapshot(self):
        delta = self.settings.fixed_delta_seconds or 0.05
        return SimpleNamespace(
            frame=self.frame,
            timestamp=SimpleNamespace(elapsed_seconds=self.frame * delta),
        )

    def get_actors(self):
        return list(self.alive.values())


class FakeClient:
    def __init__(self, api, host, port):
        self.api = api
        self.host, self.port = host, port
        self.timeout = None

    def set_timeout(self, timeout):
        self.timeout = timeout

    def get_server_version(self):
        if self.api.unreachable:
            raise RuntimeError("time-out while waiting for the simulator")
        return "0.9.fake"

    def get_world(self):
        return self.api.world

    def get_available_maps(self):
        return [f"/Game/Carla/Maps/{m}" for m in self.api.available_maps]

    def load_world(self, name):
        self.api.world.map_name = name
        self.api.loaded_maps.append(name)
        return self.api.world

    def get_trafficmanager(self):
        return self.api.traffic_manager


class FakeApi:
    """Drop-in for the carla module; one world per instance."""

    WeatherParameters = FakeWeatherParameters
    Transform = FakeTransform
    Location = FakeLocation

    def __init__(
        self,
        map_name="Town01",
        available_maps=("Town01", "Town02"),
        unreachable=False,
        blocked_spawn_points=False,
        camera_spawn_error=False,
        silent_camera=False,
    ):
        self.unreachable = unreachable
        self.blocked_spawn_points = blocked_spawn_points
        self.camera_spawn_error = camera_spawn_error
        self.silent_camera = silent_camera
        self.available_maps = list(available_maps)
        self.loaded_maps = []
        self.world = FakeWorld(self, map_name)
        self.traffic_manager = FakeTrafficManager()

    def Client(self, host, port):
        return FakeClient(self, host, port)
