"""Live teleoperation service around one simulation.

One background thread owns the mutable world and advances it; websocket
handlers talk to it only through a lock-guarded command queue and immutable
snapshots, so any number of viewers can watch while a single driver holds
command authority (first-come, transferred on disconnect).

At speed > 0 the sim is paced to wall-clock so the operator experiences the
real actuator rates; at speed = 0 it runs pending commands as fast as
possible and pauses when idle, which makes an interactive session replay
byte-identically against the batch runner.
"""

from __future__ import annotations

import asyncio
import json
import math
import threading
import time
from contextlib import asynccontextmanager
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, PlainTextResponse

from .gait import Command, CommandError, CommandKind, expand_command, static_stability_margin
from .recording import trajectory_text
from .scenario import ScenarioSpec, _parse_command
from .sim import PenetrationError, SimSnapshot, World

BROADCAST_PERIOD_S = 0.05   # 20 Hz


def safety_gate(cmd: Command, world: World) -> tuple[bool, str | None]:
    """Check a command against the live snapshot before it is queued.

    Rejections name the violated check: over-travel, servo range,
    stability margin, or buckling headroom.
    """
    try:
        primitives = expand_command(cmd, world, world.gait_cfg)
    except CommandError as exc:
        text = str(exc)
        if "extension target" in text or "height" in text:
            return False, f"over-travel: {text}"
        if "tilt" in text or "angle" in text:
            return False, f"servo range: {text}"
        return False, text

    # only the first lift happens from the current stance; later lifts in a
    # long expansion are re-guarded by the sequencer as the stance evolves
    first_lift_checked = False
    for prim in primitives:
        if prim.lift is not None and not first_lift_checked and world.legs[prim.lift].in_contact:
            first_lift_checked = True
            remaining = [i for i in world.pins if i != prim.lift]
            if len(remaining) < 3:
                return False, "stability margin: fewer than 3 supporting feet would remain"
            com_body, _ = _world_com(world)
            com_w = world.pose.transform(com_body)
            margin = static_stability_margin(
                [world.pins[i][:2] for i in remaining], com_w[:2]
            )
            if margin < 0:
                return False, f"stability margin: lifting leg {prim.lift} leaves margin {margin:.4f} m"
        for module, target in prim.extension_targets:
            state = world.legs[module].module
            if target > state.extension_l and state.axial_load > 0:
                spec = world.assembly.modules[module]
                from .beam import euler_buckling_load, PINNED_PINNED

                limit = euler_buckling_load(spec.beam, PINNED_PINNED, target) * spec.knockdown.factor(target)
                if limit < state.axial_load:
                    return False, (
                        f"buckling headroom: leg {module} carries {state.axial_load:.2f} N, "
                        f"limit at {target:.3f} m is {limit:.2f} N"
                    )
    return True, None


def _world_com(world: World):
    from .assembly import center_of_mass_body

    return center_of_mass_body(world.assembly, world.legs)


class TeleopService:
    """Owns the sim thread, the recorder, and the command queue."""

    def __init__(self, spec: ScenarioSpec, speed: float = 1.0):
        self.spec = spec
        self.speed = speed
        self.world = spec.build_world()
        self.snapshots: list[SimSnapshot] = [self.world.snapshot]
        self.epoch = 0
        self._lock = threading.Lock()
        self._running = False
        self._thread: threading.Thread | None = None

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            return
        self._running = True
        self._thread = threading.Thread(target=self._loop, name="zipfold-sim", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._running = False
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None

    def _loop(self) -> None:
        dt = self.world.config.dt
        next_deadline = time.monotonic()
        while self._running:
            stepped = False
            with self._lock:
                if not self.world.halted and not self.world.idle:
                    try:
                        snap = self.world.step()
                        self.snapshots.append(snap)
                    except PenetrationError as exc:
                        self.world._record_failure(f"penetration:{exc}")
                        self.world.halted = True
                    stepped = True
            if self.speed > 0:
                next_deadline += dt / self.speed
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    next_deadline = time.monotonic()
            elif not stepped:
                time.sleep(0.001)

    # -- operations ----------------------------------------------------------

    def submit(self, cmd: Command) -> tuple[bool, str | None]:
        with self._lock:
            allowed, reason = safety_gate(cmd, self.world)
            if allowed:
                self.world.enqueue(cmd)
            return allowed, reason

    def reset(self) -> None:
        with self._lock:
            self.world = self.spec.build_world()
            self.snapshots = [self.world.snapshot]
            self.epoch += 1

    def latest(self) -> tuple[int, SimSnapshot]:
        with self._lock:
            return self.epoch, self.world.snapshot

    def trajectory_csv(self) -> str:
        with self._lock:
            return trajectory_text(self.snapshots)

    def run_pending(self, timeout_s: float = 30.0) -> None:
        """Block until the queue drains (used by tests at speed 0)."""
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            with self._lock:
                if self.world.idle or self.world.halted:
                    return
            time.sleep(0.002)
        raise TimeoutError("sim did not drain its command queue in time")


def state_message(snap: SimSnapshot) -> dict:
    margin = None if math.isinf(snap.margin) else snap.margin
    return {
        "type": "state",
        "t_s": snap.t,
        "pose": {
            "x_m": snap.pose.position[0],
            "y_m": snap.pose.position[1],
            "z_m": snap.pose.position[2],
            "roll_rad": snap.pose.roll,
            "pitch_rad": snap.pose.pitch,
            "yaw_rad": snap.pose.yaw,
        },
        "ext_m": [leg.module.extension_l for leg in snap.legs],
        "tilt_deg": [leg.tilt_deg for leg in snap.legs],
        "contact": list(snap.contacts),
        "load_n": list(snap.leg_loads),
        "limit_n": [None if math.isinf(v) else v for v in snap.leg_limits],
        "margin_m": margin,
        "power_w": snap.total_power,
        "energy_j": snap.cumulative_energy,
        "standing_height_m": snap.standing_height,
        "ceiling_breach": snap.ceiling_breach,
        "failures": list(snap.failures),
    }


class _Connection:
    def __init__(self, socket: WebSocket):
        self.socket = socket
        self.send_lock = asyncio.Lock()
        self.last_key: tuple[int, float] | None = None

    async def send(self, payload: dict) -> None:
        async with self.send_lock:
            await self.socket.send_text(json.dumps(payload))


def create_app(spec: ScenarioSpec, speed: float = 1.0, ui_dir: str | None = None) -> FastAPI:
    service = TeleopService(spec, speed=speed)
    connections: list[_Connection] = []
    driver: list[_Connection | None] = [None]
    broadcast_task: list[asyncio.Task | None] = [None]

    async def _broadcast_loop() -> None:
        while True:
            await asyncio.sleep(BROADCAST_PERIOD_S)
            epoch, snap = service.latest()
            payload = None
            for conn in list(connections):
                key = (epoch, snap.t)
                if conn.last_key is not None and key <= conn.last_key:
                    continue
                if payload is None:
                    payload = state_message(snap)
                try:
                    await conn.send(payload)
                    conn.last_key = key
                except Exception:
                    continue

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        service.start()
        broadcast_task[0] = asyncio.create_task(_broadcast_loop())
        yield
        if broadcast_task[0] is not None:
            broadcast_task[0].cancel()
        service.stop()

    app = FastAPI(lifespan=lifespan)
    app.state.service = service

    def _ui_index() -> str:
        if ui_dir is not None:
            index = Path(ui_dir) / "index.html"
            if index.is_file():
                return index.read_text()
        return resources.files("zipfold").joinpath("web/index.html").read_text()

    @app.get("/")
    async def index() -> HTMLResponse:
        return HTMLResponse(_ui_index())

    @app.get("/trajectory")
    async def trajectory() -> PlainTextResponse:
        return PlainTextResponse(service.trajectory_csv(), media_type="text/csv")

    @app.get("/environment")
    async def environment() -> dict:
        env = spec.env
        return {
            "boxes": [
                {"min_m": list(b.min_corner), "size_m": list(b.size)} for b in env.boxes
            ],
            "ceiling_m": env.ceiling,
        }

    if ui_dir is not None:
        assets = Path(ui_dir) / "assets"

        @app.get("/assets/{name:path}")
        async def asset(name: str):
            target = (assets / name).resolve()
            if not str(target).startswith(str(assets.resolve())) or not target.is_file():
                return PlainTextResponse("not found", status_code=404)
            media = "text/javascript" if target.suffix == ".js" else "text/plain"
            if target.suffix == ".css":
                media = "text/css"
            return PlainTextResponse(target.read_text(), media_type=media)

    @app.websocket("/ws")
    async def websocket_endpoint(socket: WebSocket) -> None:
        await socket.accept()
        conn = _Connection(socket)
        connections.append(conn)
        if driver[0] is None:
            driver[0] = conn
        await conn.send(
            {"type": "ack", "id": "connect", "role": "driver" if driver[0] is conn else "viewer"}
        )
        epoch, snap = service.latest()
        await conn.send(state_message(snap))
        conn.last_key = (epoch, snap.t)
        try:
            while True:
                raw = await socket.receive_text()
                await _handle_message(conn, raw)
        except WebSocketDisconnect:
            pass
        finally:
            if conn in connections:
                connections.remove(conn)
            if driver[0] is conn:
                driver[0] = connections[0] if connections else None
                if driver[0] is not None:
                    try:
                        await driver[0].send({"type": "ack", "id": "role", "role": "driver"})
                    except Exception:
                        pass

    async def _handle_message(conn: _Connection, raw: str) -> None:
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError:
            await conn.send({"type": "error", "id": None, "reason": "malformed JSON frame"})
            return
        if not isinstance(doc, dict) or "type" not in doc:
            await conn.send({"type": "error", "id": None, "reason": "frame must carry a type"})
            return
        msg_id = doc.get("id")
        kind = doc["type"]

        if kind == "reset":
            if driver[0] is not conn:
                await conn.send({"type": "error", "id": msg_id, "reason": "not driver"})
                return
            service.reset()
            conn.last_key = None
            await conn.send({"type": "ack", "id": msg_id})
            return

        if kind != "command":
            await conn.send({"type": "error", "id": msg_id, "reason": f"unsupported type {kind!r}"})
            return
        if driver[0] is not conn:
            await conn.send({"type": "error", "id": msg_id, "reason": "not driver"})
            return
        try:
            cmd = _parse_command(doc.get("command"), "command")
        except ValueError as exc:
            await conn.send({"type": "error", "id": msg_id, "reason": str(exc)})
            return
        allowed, reason = await asyncio.to_thread(service.submit, cmd)
        if allowed:
            await conn.send({"type": "ack", "id": msg_id})
        else:
            await conn.send({"type": "error", "id": msg_id, "reason": reason})

    return app


def serve(spec: ScenarioSpec, port: int = 8700, speed: float = 1.0, ui_dir: str | None = None) -> None:
    """Run the service until interrupted (the `serve` CLI subcommand)."""
    import uvicorn

    app = create_app(spec, speed=speed, ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
