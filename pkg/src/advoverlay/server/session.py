"""Transport-free session logic: warm-started attack state per stream.

SessionCore turns one inbound message into a list of (audience, message)
pairs; the websocket layer decides which connections each audience maps to.
Audiences: "sender", "all", "adv" (adv_frame subscribers).
"""

from __future__ import annotations

import base64
import io
import time

import numpy as np
from PIL import Image

from ..attack.config import AttackConfig
from ..attack.loop import AttackState, attack_step
from ..attack.mask import Rect, build_mask
from ..detector.decode import DEFAULT_CONF_THRESHOLD, DEFAULT_IOU_THRESHOLD
from ..errors import ConfigurationError
from ..image import ImageTensor, letterbox, save_png
from .protocol import CONFIG_FIELDS, FRAME_ENCODING, make_message

DEFAULT_ITERS_PER_FRAME = 4
DEFAULT_MAX_FRAME_BYTES = 2 * 1024 * 1024


def _encode_png_base64(image: ImageTensor) -> str:
    buf = io.BytesIO()
    save_png(image, buf)
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _decode_png_base64(data: str) -> ImageTensor:
    raw = base64.b64decode(data, validate=True)
    with Image.open(io.BytesIO(raw)) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return ImageTensor(arr)


class SessionCore:
    """Owns the persistent perturbation, mask and config of one session."""

    def __init__(self, session_id: str, detector, config: AttackConfig | None = None,
                 iters_per_frame: int = DEFAULT_ITERS_PER_FRAME,
                 clock=time.perf_counter,
                 conf_threshold: float = DEFAULT_CONF_THRESHOLD,
                 iou_threshold: float = DEFAULT_IOU_THRESHOLD,
                 max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES):
        side = detector.input_side
        self.session_id = session_id
        self.detector = detector
        self.config = config or AttackConfig()
        self.iters_per_frame = iters_per_frame
        self.clock = clock
        self.conf_threshold = conf_threshold
        self.iou_threshold = iou_threshold
        self.max_frame_bytes = max_frame_bytes
        self.side = side
        self.mask = build_mask([], side, side)
        self.rects: list[Rect] = []
        self.state = AttackState.fresh(side, side, 3, self.config.monochrome)
        self.frame_counter = 0
        self._out_seq = 0

    def _next_seq(self) -> int:
        self._out_seq += 1
        return self._out_seq

    def _msg(self, msg_type: str, payload: dict) -> dict:
        return make_message(msg_type, self.session_id, self._next_seq(), payload)

    def _error(self, code: str, message: str, frame_seq: int | None = None) -> dict:
        payload = {"code": code, "message": message}
        if frame_seq is not None:
            payload["frame_seq"] = frame_seq
        return self._msg("error", payload)

    def frame_dropped(self, frame_seq: int) -> dict:
        return self._error(
            "frame_dropped",
            "frame superseded by a newer one before processing",
            frame_seq,
        )

    def process_frame(self, payload: dict, frame_seq: int) -> list[tuple[str, dict]]:
        """Warm-started attack iterations on one frame. CPU-heavy."""
        data = payload.get("data", "")
        if len(data) > self.max_frame_bytes * 4 // 3 + 4:
            return [("sender", self._error(
                "frame_too_large",
                f"frame exceeds the {self.max_frame_bytes} byte limit",
                frame_seq,
            ))]
        try:
            decoded = _decode_png_base64(data)
        except Exception as exc:
            return [("sender", self._error(
                "bad_frame", f"could not decode frame: {exc}", frame_seq
            ))]

        t0 = self.clock()
        image = letterbox(decoded, self.side) \
            if (decoded.height, decoded.width) != (self.side, self.side) else decoded
        benign_dets = self.detector.detect(image, self.conf_threshold, self.iou_threshold)
        adv = image
        for _ in range(self.iters_per_frame):
            self.state, adv = attack_step(self.state, image, self.mask,
                                          self.config, self.detector)
        adv_dets = self.detector.detect(adv, self.conf_threshold, self.iou_threshold)
        attack_ms = (self.clock() - t0) * 1000.0

        self.frame_counter += 1
        boxes = [
            {"class_id": d.class_id, "score": d.score,
             "x": d.b_x, "y": d.b_y, "w": d.b_w, "h": d.b_h}
            for d in adv_dets
        ]
        out = [("all", self._msg("detections", {
            "benign_count": len(benign_dets),
            "boxes": boxes,
            "attack_ms": attack_ms,
            "frame_seq": frame_seq,
        }))]
        out.append(("adv", self._msg("adv_frame", {
            "width": adv.width,
            "height": adv.height,
            "encoding": FRAME_ENCODING,
            "data": _encode_png_base64(adv),
            "frame_seq": frame_seq,
        })))
        out.append(("all", self._msg("stats", {
            "loss": self.state.loss_history[-1] if self.state.loss_history else 0.0,
            "iterations_total": self.state.iterations_done,
            "success": len(adv_dets) > len(benign_dets),
            "frame_seq": frame_seq,
        })))
        return out

    def process_mask_update(self, payload: dict, frame_seq: int) -> list[tuple[str, dict]]:
        """Rebuild the mask; delta outside the new mask is zeroed."""
        try:
            rects = [Rect(int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"]))
                     for r in payload.get("rects", [])]
        except (KeyError, TypeError, ValueError) as exc:
            return [("sender", self._error("invalid_mask", f"bad rect list: {exc}", frame_seq))]
        self.rects = rects
        self.mask = build_mask(rects, self.side, self.side)
        self.state.zero_outside(self.mask)
        ack = self._msg("mask_update", {
            "rects": [{"x": r.x, "y": r.y, "w": r.w, "h": r.h} for r in rects],
        })
        return [("all", ack)]

    def process_config_update(self, payload: dict, frame_seq: int) -> list[tuple[str, dict]]:
        """Replace attack parameters; delta survives unless its shape or
        semantics changed (monochrome flag or application mode)."""
        unknown = set(payload) - set(CONFIG_FIELDS)
        if unknown:
            return [("sender", self._error(
                "invalid_config", f"unknown config field {sorted(unknown)[0]!r}", frame_seq
            ))]
        updates = {k: v for k, v in payload.items() if k != "iters_per_frame"}
        iters_per_frame = payload.get("iters_per_frame", self.iters_per_frame)
        if not isinstance(iters_per_frame, int) or iters_per_frame < 1:
            return [("sender", self._error(
                "invalid_config", "iters_per_frame must be a positive integer", frame_seq
            ))]
        try:
            new_config = self.config.with_updates(**updates)
            new_config.check_target_for(self.detector.num_classes)
        except ConfigurationError as exc:
            return [("sender", self._error("invalid_config", str(exc), frame_seq))]

        reset = (new_config.monochrome != self.config.monochrome
                 or new_config.application != self.config.application)
        self.config = new_config
        self.iters_per_frame = iters_per_frame
        if reset:
            self.state = AttackState.fresh(self.side, self.side, 3, new_config.monochrome)
        else:
            self.state.clip_to(new_config.xi)
        ack = self._msg("config_update", self.config_snapshot())
        return [("all", ack)]

    def config_snapshot(self) -> dict:
        c = self.config
        return {
            "mode": c.mode,
            "target_class": c.target_class,
            "xi": c.xi,
            "alpha": c.alpha,
            "iterations": c.iterations,
            "monochrome": c.monochrome,
            "channel_source": c.channel_source,
            "application": c.application,
            "monochrome_signed": c.monochrome_signed,
            "iters_per_frame": self.iters_per_frame,
        }
