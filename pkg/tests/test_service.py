import json
import time

import pytest
from fastapi.testclient import TestClient

from zipfold.assembly import RobotAssembly
from zipfold.calibration import default_calibration
from zipfold.gait import Command, CommandKind
from zipfold.recording import trajectory_text
from zipfold.scenario import load_bundled
from zipfold.service import create_app, safety_gate, state_message
from zipfold.sim import Environment, SimConfig, World, run_scenario


def drain_until(ws, wanted_type, msg_id=None, limit=200):
    for _ in range(limit):
        msg = ws.receive_json()
        if msg.get("type") == wanted_type and (msg_id is None or msg.get("id") == msg_id):
            return msg
        if msg.get("type") in ("ack", "error") and msg_id is not None and msg.get("id") == msg_id:
            return msg
    raise AssertionError(f"never received {wanted_type}")


def send_command(ws, msg_id, command):
    ws.send_text(json.dumps({"type": "command", "id": msg_id, "command": command}))


class TestSafetyGate:
    def make_world(self, extensions=(0.1, 0.1, 0.1, 0.1)):
        assembly = RobotAssembly(modules=tuple(default_calibration().module for _ in range(4)))
        return World(assembly, Environment(), config=SimConfig(dt=0.01), initial_extensions=extensions)

    def test_normal_crawl_step_allowed(self):
        world = self.make_world()
        allowed, reason = safety_gate(Command(CommandKind.STEP, module=2), world)
        assert allowed, reason

    def test_over_travel_rejected(self):
        world = self.make_world(extensions=(0.28, 0.1, 0.1, 0.1))
        allowed, reason = safety_gate(
            Command(CommandKind.EXTEND, module=0, target_m=0.3), world
        )
        assert not allowed
        assert "over-travel" in reason

    def test_lift_with_two_contacts_rejected(self):
        world = self.make_world()
        world._unpin(0)
        world._unpin(1)
        allowed, reason = safety_gate(Command(CommandKind.STEP, module=2), world)
        assert not allowed
        assert "stability margin" in reason

    def test_buckling_headroom_rejected(self):
        from zipfold.assembly import ChassisSpec

        heavy = RobotAssembly(
            chassis=ChassisSpec(chassis_mass=5.2),
            modules=tuple(default_calibration().module for _ in range(4)),
        )
        world = World(heavy, Environment(), config=SimConfig(dt=0.01), initial_extensions=(0.1,) * 4)
        world.step()   # populate leg loads
        allowed, reason = safety_gate(
            Command(CommandKind.EXTEND, module=0, target_m=0.28), world
        )
        assert not allowed
        assert "buckling headroom" in reason


@pytest.fixture()
def walk_app():
    spec = load_bundled("walk")
    app = create_app(spec, speed=0.0)
    with TestClient(app) as client:
        yield client, app


class TestProtocol:
    def test_driver_then_viewer_roles(self, walk_app):
        client, app = walk_app
        with client.websocket_connect("/ws") as ws1:
            hello1 = ws1.receive_json()
            assert hello1["role"] == "driver"
            with client.websocket_connect("/ws") as ws2:
                hello2 = ws2.receive_json()
                assert hello2["role"] == "viewer"
                send_command(ws2, "v1", {"kind": "stand_to", "height_m": 0.2})
                reply = drain_until(ws2, "error", "v1")
                assert reply["reason"] == "not driver"

    def test_driver_transfers_on_disconnect(self, walk_app):
        client, app = walk_app
        with client.websocket_connect("/ws") as ws1:
            assert ws1.receive_json()["role"] == "driver"
            with client.websocket_connect("/ws") as ws2:
                assert ws2.receive_json()["role"] == "viewer"
                ws2.receive_json()   # initial state
                ws1.close()
                promo = drain_until(ws2, "ack", "role")
                assert promo["role"] == "driver"

    def test_command_ack_round_trip_under_100ms(self, walk_app):
        client, app = walk_app
        with client.websocket_connect("/ws") as ws:
            ws.receive_json(); ws.receive_json()
            t0 = time.monotonic()
            send_command(ws, "rt", {"kind": "stand_to", "height_m": 0.32})
            reply = drain_until(ws, "ack", "rt")
            elapsed = time.monotonic() - t0
            assert reply == {"type": "ack", "id": "rt"}
            assert elapsed < 0.1

    def test_malformed_frames_keep_connection(self, walk_app):
        client, app = walk_app
        with client.websocket_connect("/ws") as ws:
            ws.receive_json(); ws.receive_json()
            ws.send_text("{nope")
            err = drain_until(ws, "error")
            assert "malformed" in err["reason"]
            ws.send_text(json.dumps({"type": "wiggle"}))
            err = drain_until(ws, "error")
            assert "unsupported" in err["reason"]
            send_command(ws, "ok", {"kind": "crouch_to", "height_m": 0.11})
            assert drain_until(ws, "ack", "ok")["id"] == "ok"

    def test_rejected_command_reports_reason(self, walk_app):
        client, app = walk_app
        with client.websocket_connect("/ws") as ws:
            ws.receive_json(); ws.receive_json()
            send_command(ws, "bad", {"kind": "extend", "module": 0, "target_m": 0.5})
            reply = drain_until(ws, "error", "bad")
            assert "over-travel" in reply["reason"]

    def test_reset_returns_to_initial(self, walk_app):
        client, app = walk_app
        with client.websocket_connect("/ws") as ws:
            ws.receive_json(); ws.receive_json()
            send_command(ws, "c1", {"kind": "stand_to", "height_m": 0.2})
            drain_until(ws, "ack", "c1")
            app.state.service.run_pending()
            ws.send_text(json.dumps({"type": "reset", "id": "r1"}))
            drain_until(ws, "ack", "r1")
            epoch, snap = app.state.service.latest()
            assert snap.t == 0.0
            assert epoch == 1

    def test_state_messages_time_ordered(self, walk_app):
        client, app = walk_app
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            send_command(ws, "go", {"kind": "stand_to", "height_m": 0.32})
            times = []
            for _ in range(40):
                msg = ws.receive_json()
                if msg["type"] == "state":
                    times.append(msg["t_s"])
                if len(times) >= 5:
                    break
            assert times == sorted(times)
            assert len(set(times)) == len(times)

    def test_state_payload_carries_log_columns(self, walk_app):
        client, app = walk_app
        _, snap = app.state.service.latest()
        msg = state_message(snap)
        for key in ("t_s", "pose", "ext_m", "tilt_deg", "contact", "load_n",
                    "margin_m", "power_w", "energy_j", "failures"):
            assert key in msg
        assert len(msg["ext_m"]) == 4
        assert msg["pose"].keys() == {"x_m", "y_m", "z_m", "roll_rad", "pitch_rad", "yaw_rad"}


class TestBatchParity:
    def test_interactive_matches_batch_byte_identical(self):
        spec = load_bundled("expand")
        world = spec.build_world()
        snaps, _ = run_scenario(world, [Command(CommandKind.STAND_TO, target_m=0.32)])
        batch_csv = trajectory_text(snaps)

        app = create_app(spec, speed=0.0)
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws:
                ws.receive_json(); ws.receive_json()
                send_command(ws, "a", {"kind": "stand_to", "height_m": 0.32})
                drain_until(ws, "ack", "a")
                app.state.service.run_pending(timeout_s=60)
            service_csv = client.get("/trajectory").text
        assert service_csv == batch_csv

    def test_index_page_served(self):
        spec = load_bundled("walk")
        app = create_app(spec, speed=0.0)
        with TestClient(app) as client:
            page = client.get("/")
            assert page.status_code == 200
            assert "console" in page.text


class TestSafetyGateGaitExpansion:
    def test_gait_gates_only_the_immediate_lift(self):
        # later lifts in the cycle are only stable because earlier phases
        # reshape the stance; the gate must not evaluate them prematurely
        assembly = RobotAssembly(modules=tuple(default_calibration().module for _ in range(4)))
        world = World(assembly, Environment(), config=SimConfig(dt=0.01),
                      initial_extensions=(0.1,) * 4)
        allowed, reason = safety_gate(Command(CommandKind.GAIT, cycles=1), world)
        assert allowed, reason

    def test_environment_endpoint(self):
        spec = load_bundled("obstacle")
        app = create_app(spec, speed=0.0)
        with TestClient(app) as client:
            doc = client.get("/environment").json()
            assert doc["boxes"] == [{"min_m": [0.10, -0.02, 0.0], "size_m": [0.06, 0.04, 0.05]}]
            assert doc["ceiling_m"] is None
            pipe_doc = None
        app2 = create_app(load_bundled("pipe"), speed=0.0)
        with TestClient(app2) as client:
            pipe_doc = client.get("/environment").json()
        assert pipe_doc["ceiling_m"] == 0.15


class TestBroadcastCadence:
    def test_states_arrive_at_roughly_20hz_while_sim_runs(self):
        # generous bounds: this is a smoke check on the 20 Hz broadcast loop,
        # not a hard real-time assertion (CI wall clocks jitter)
        spec = load_bundled("walk")
        app = create_app(spec, speed=5.0)
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws:
                ws.receive_json()
                send_command(ws, "c", {"kind": "stand_to", "height_m": 0.32})
                arrivals = []
                deadline = time.monotonic() + 3.0
                while len(arrivals) < 12 and time.monotonic() < deadline:
                    msg = ws.receive_json()
                    if msg.get("type") == "state":
                        arrivals.append(time.monotonic())
        assert len(arrivals) >= 8
        periods = [b - a for a, b in zip(arrivals[1:], arrivals[2:])]
        mean = sum(periods) / len(periods)
        assert 0.02 < mean < 0.15
