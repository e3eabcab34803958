import base64
import io

import numpy as np
import pytest
from starlette.testclient import TestClient

from advoverlay.attack import AttackConfig
from advoverlay.image import ImageTensor, save_png
from advoverlay.server.app import create_app
from advoverlay.server.protocol import canonical_json, make_message
from advoverlay.server.session import SessionCore

from conftest import tiny_detector


def png_b64(arr) -> str:
    buf = io.BytesIO()
    save_png(ImageTensor(arr), buf)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def frame_msg(arr, seq, session="s"):
    return make_message("frame", session, seq, {
        "width": arr.shape[1],
        "height": arr.shape[0],
        "encoding": "png-base64",
        "data": png_b64(arr),
    })


def quantized_image(side=16, seed=0):
    rng = np.random.default_rng(seed)
    return np.rint(rng.uniform(0.2, 0.8, (side, side, 3)) * 255) / 255


class FakeClock:
    def __init__(self, tick=0.001):
        self.now = 0.0
        self.tick = tick

    def __call__(self):
        self.now += self.tick
        return self.now


def make_test_app(**kwargs):
    det = kwargs.pop("detector", tiny_detector())
    kwargs.setdefault("clock", FakeClock())
    kwargs.setdefault("default_config", AttackConfig(xi=8, alpha=2))
    return create_app(det, **kwargs)


def recv(ws):
    return ws.receive_json()


def test_frame_with_zero_mask_matches_benign():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s&adv=1") as ws:
        arr = quantized_image()
        ws.send_text(canonical_json(frame_msg(arr, 1)))
        det_msg = recv(ws)
        adv_msg = recv(ws)
        stats = recv(ws)
        assert det_msg["type"] == "detections"
        assert det_msg["payload"]["frame_seq"] == 1
        assert len(det_msg["payload"]["boxes"]) == det_msg["payload"]["benign_count"]
        assert adv_msg["type"] == "adv_frame"
        decoded = base64.b64decode(adv_msg["payload"]["data"])
        from PIL import Image

        back = np.asarray(Image.open(io.BytesIO(decoded)).convert("RGB")) / 255.0
        assert np.allclose(back, arr, atol=1e-9)  # mask empty -> pixel-identical
        assert stats["type"] == "stats"
        assert stats["payload"]["iterations_total"] == 4  # default iters_per_frame
        assert not stats["payload"]["success"]


def test_warm_start_accumulates_iterations():
    app = make_test_app(iters_per_frame=3)
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        arr = quantized_image()
        ws.send_text(canonical_json(frame_msg(arr, 1)))
        recv(ws)  # detections
        s1 = recv(ws)
        ws.send_text(canonical_json(frame_msg(arr, 2)))
        recv(ws)
        s2 = recv(ws)
        assert s1["payload"]["iterations_total"] == 3
        assert s2["payload"]["iterations_total"] == 6


def test_mask_update_ack_and_locality():
    app = make_test_app()
    client = TestClient(app)
    with client.websocket_connect("/attack?session=s&adv=1") as ws:
        ws.send_text(canonical_json(make_message("mask_update", "s", 1, {
            "rects": [{"x": 4, "y": 4, "w": 8, "h": 8}],
        })))
        ack = recv(ws)
        assert ack["type"] == "mask_update"
        assert ack["payload"]["rects"] == [{"x": 4, "y": 4, "w": 8, "h": 8}]

        arr = quantized_image()
        ws.send_text(canonical_json(frame_msg(arr, 2)))
        recv(ws)
        adv_msg = recv(ws)
        recv(ws)
        from PIL import Image

        back = np.asarray(
            Image.open(io.BytesIO(base64.b64decode(adv_msg["payload"]["data"]))).convert("RGB")
        ) / 255.0
        outside = np.ones((16, 16), dtype=bool)
        outside[4:12, 4:12] = False
        assert np.allclose(back[outside], arr[outside], atol=1e-9)


def test_mask_shrink_zeroes_delta():
    app = make_test_app()
    client = TestClient(app)
    with client.websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(make_message("mask_update", "s", 1, {
            "rects": [{"x": 0, "y": 0, "w": 16, "h": 16}],
        })))
        recv(ws)
        ws.send_text(canonical_json(frame_msg(quantized_image(), 2)))
        recv(ws)
        recv(ws)
        core = app.state.sessions["s"].core
        assert float(np.abs(core.state.delta).max()) > 0
        ws.send_text(canonical_json(make_message("mask_update", "s", 3, {
            "rects": [{"x": 0, "y": 0, "w": 4, "h": 4}],
        })))
        recv(ws)
        delta = core.state.delta
        assert np.array_equal(delta[:, 4:], np.zeros_like(delta[:, 4:]))
        assert np.array_equal(delta[4:, :], np.zeros_like(delta[4:, :]))


def test_empty_mask_update_is_not_an_error():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(make_message("mask_update", "s", 1, {"rects": []})))
        ack = recv(ws)
        assert ack["type"] == "mask_update"
        assert ack["payload"]["rects"] == []


def test_config_update_validation_preserves_state():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(make_message("config_update", "s", 1, {
            "target_class": 99, "mode": "multi-targeted",
        })))
        err = recv(ws)
        assert err["type"] == "error"
        assert err["payload"]["code"] == "invalid_config"
        core = app.state.sessions["s"].core
        assert core.config.mode == "multi-untargeted"  # unchanged

        ws.send_text(canonical_json(make_message("config_update", "s", 2, {
            "bogus_field": 1,
        })))
        err = recv(ws)
        assert err["payload"]["code"] == "invalid_config"
        assert "bogus_field" in err["payload"]["message"]


def test_config_update_reclips_delta():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(make_message("mask_update", "s", 1, {
            "rects": [{"x": 0, "y": 0, "w": 16, "h": 16}],
        })))
        recv(ws)
        for seq in (2, 3):
            ws.send_text(canonical_json(frame_msg(quantized_image(), seq)))
            recv(ws)
            recv(ws)
        core = app.state.sessions["s"].core
        assert float(np.abs(core.state.delta).max()) == pytest.approx(8 / 255)
        ws.send_text(canonical_json(make_message("config_update", "s", 4, {"xi": 4.0})))
        ack = recv(ws)
        assert ack["type"] == "config_update"
        assert ack["payload"]["xi"] == 4.0
        assert float(np.abs(core.state.delta).max()) <= 4 / 255 + 1e-12


def test_loss_mode_switch_retains_delta_monochrome_switch_resets():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(make_message("mask_update", "s", 1, {
            "rects": [{"x": 0, "y": 0, "w": 16, "h": 16}],
        })))
        recv(ws)
        ws.send_text(canonical_json(frame_msg(quantized_image(), 2)))
        recv(ws)
        recv(ws)
        core = app.state.sessions["s"].core
        before = core.state.delta.copy()
        assert float(np.abs(before).max()) > 0

        ws.send_text(canonical_json(make_message("config_update", "s", 3, {
            "mode": "multi-targeted", "target_class": 1,
        })))
        recv(ws)
        assert np.array_equal(core.state.delta, before)  # retained

        ws.send_text(canonical_json(make_message("config_update", "s", 4, {
            "monochrome": True,
        })))
        recv(ws)
        assert core.state.delta.ndim == 2
        assert not core.state.delta.any()  # reset


def test_undecodable_frame_keeps_session_alive():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        bad = make_message("frame", "s", 1, {
            "width": 4, "height": 4, "encoding": "png-base64",
            "data": base64.b64encode(b"junk").decode(),
        })
        ws.send_text(canonical_json(bad))
        err = recv(ws)
        assert err["type"] == "error"
        assert err["payload"]["code"] == "bad_frame"
        ws.send_text(canonical_json(frame_msg(quantized_image(), 2)))
        assert recv(ws)["type"] == "detections"


def test_oversize_frame_rejected():
    app = make_test_app(max_frame_bytes=100)
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(frame_msg(quantized_image(), 1)))
        err = recv(ws)
        assert err["payload"]["code"] == "frame_too_large"
        assert "100" in err["payload"]["message"]


def test_malformed_message_terminates_session():
    app = make_test_app()
    client = TestClient(app)
    with client.websocket_connect("/attack?session=s") as ws:
        ws.send_text("this is not json")
        err = recv(ws)
        assert err["payload"]["code"] == "malformed"
        with pytest.raises(Exception):
            ws.send_text(canonical_json(frame_msg(quantized_image(), 1)))
            recv(ws)
    assert "s" not in app.state.sessions


def test_sequence_must_increase():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(make_message("mask_update", "s", 5, {"rects": []})))
        recv(ws)
        ws.send_text(canonical_json(make_message("mask_update", "s", 5, {"rects": []})))
        err = recv(ws)
        assert err["payload"]["code"] == "malformed"


def test_session_id_mismatch_is_malformed():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s") as ws:
        ws.send_text(canonical_json(make_message("mask_update", "other", 1, {"rects": []})))
        err = recv(ws)
        assert err["payload"]["code"] == "malformed"


def test_second_writer_is_rejected():
    app = make_test_app()
    client = TestClient(app)
    with client.websocket_connect("/attack?session=s&role=panel") as w1:
        with client.websocket_connect("/attack?session=s&role=panel") as w2:
            w1.send_text(canonical_json(make_message("mask_update", "s", 1, {"rects": []})))
            ack1 = recv(w1)
            assert ack1["type"] == "mask_update"
            ack2 = recv(w2)  # broadcast ack reaches observers too
            assert ack2["type"] == "mask_update"
            w2.send_text(canonical_json(make_message("mask_update", "s", 1, {
                "rects": [{"x": 0, "y": 0, "w": 2, "h": 2}],
            })))
            err = recv(w2)
            assert err["payload"]["code"] == "not_authorized"


def test_sessions_are_isolated():
    app = make_test_app()
    client = TestClient(app)
    with client.websocket_connect("/attack?session=a") as wa:
        with client.websocket_connect("/attack?session=b") as wb:
            wa.send_text(canonical_json(make_message("mask_update", "a", 1, {
                "rects": [{"x": 0, "y": 0, "w": 4, "h": 4}],
            })))
            recv(wa)
            wb.send_text("garbage")  # kills session b only
            err = recv(wb)
            assert err["payload"]["code"] == "malformed"
            wa.send_text(canonical_json(frame_msg(quantized_image(), 2, session="a")))
            assert recv(wa)["type"] == "detections"


def test_server_sequence_strictly_increases():
    app = make_test_app()
    with TestClient(app).websocket_connect("/attack?session=s&adv=1") as ws:
        seqs = []
        ws.send_text(canonical_json(make_message("mask_update", "s", 1, {"rects": []})))
        seqs.append(recv(ws)["sequence"])
        ws.send_text(canonical_json(frame_msg(quantized_image(), 2)))
        for _ in range(3):  # detections, adv_frame, stats
            seqs.append(recv(ws)["sequence"])
        assert seqs == sorted(seqs)
        assert len(set(seqs)) == len(seqs)


def test_frame_queue_drop_oldest():
    from advoverlay.server.app import _Session

    core = SessionCore("s", tiny_detector(), clock=FakeClock())
    sess = _Session(core)  # worker not started: messages stay queued
    msg1 = frame_msg(quantized_image(seed=1), 1)
    msg2 = frame_msg(quantized_image(seed=2), 2)
    mask = make_message("mask_update", "s", 3, {"rects": []})
    assert sess.enqueue(None, msg1) is None
    assert sess.enqueue(None, mask) is None
    dropped = sess.enqueue(None, msg2)
    assert dropped is not None
    assert dropped["type"] == "error"
    assert dropped["payload"]["code"] == "frame_dropped"
    assert dropped["payload"]["frame_seq"] == 1
    kinds = [m["type"] for _, m in sess.queue]
    assert kinds == ["frame", "mask_update"]
    assert sess.queue[0][1]["sequence"] == 2  # newest frame took the slot
