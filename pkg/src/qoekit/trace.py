"""Packet-trace impairment metrics and a seeded trace generator.

A trace is a sequence-numbered list of send/receive timestamps; a missing
receive timestamp means the packet was lost.  From it this module
measures loss rate, mean one-way delay and interarrival jitter (the
smoothed RFC 3550 estimator by default, a mean-absolute-difference
variant for transparency), both whole-trace and per window.

Lost packets contribute to loss only, never to delay or jitter; no
imputation.  The generator produces traces at a fixed send cadence with
independent loss and configurable jitter, deterministic for a given seed.
"""
from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .composite import QosSample

TRACE_HEADER = ("seq", "send_ts_ms", "recv_ts_ms")

JITTER_ESTIMATORS = ("rfc3550", "mean-abs")

#: Gain of the smoothed jitter recursion, J += (|D| - J)/16.
RFC3550_GAIN = 16.0

JITTER_MODELS = ("none", "uniform", "pareto")

PARETO_SHAPE_MIN = 0.55
PARETO_SHAPE_MAX = 0.9


@dataclass(frozen=True)
class PacketRecord:
    """One packet: sequence number, send time, receive time (None = lost)."""

    seq: int
    send_ts_ms: float
    recv_ts_ms: float | None = None

    def __post_init__(self) -> None:
        if self.seq < 0:
            raise ValueError(f"seq must be nonnegative, got {self.seq}")
        if self.recv_ts_ms is not None and self.recv_ts_ms < self.send_ts_ms:
            raise ValueError(
                f"seq {self.seq}: recv_ts_ms {self.recv_ts_ms} precedes "
                f"send_ts_ms {self.send_ts_ms}"
            )

    @property
    def received(self) -> bool:
        return self.recv_ts_ms is not None

    @property
    def delay_ms(self) -> float:
        if self.recv_ts_ms is None:
            raise ValueError(f"seq {self.seq} was lost; no delay")
        return self.recv_ts_ms - self.send_ts_ms


@dataclass(frozen=True)
class Trace:
    """Nonempty packet sequence ordered by strictly increasing seq."""

    packets: tuple[PacketRecord, ...]
    source: str = ""
    interval_ms: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "packets", tuple(self.packets))
        if not self.packets:
            raise ValueError("trace must contain at least one packet")
        for prev, cur in zip(self.packets, self.packets[1:]):
            if cur.seq <= prev.seq:
                raise ValueError(
                    f"seq must be strictly increasing, got {prev.seq} then {cur.seq}"
                )


@dataclass(frozen=True)
class WindowMetrics:
    """Per-window measurement: loss/delay/jitter sample plus packet counts.

    ``packet_count`` is the expected count from the window's seq span;
    unavailable delay/jitter (too few received packets) appear as None in
    the sample.  The trailing partial window is flagged.
    """

    window_id: int
    sample: QosSample
    packet_count: int
    lost_count: int
    received_count: int
    start_ms: float
    end_ms: float
    partial: bool = False


@dataclass(frozen=True)
class ImpairmentSpec:
    """Generator settings: loss probability, base delay, jitter model,
    duration, cadence and a mandatory RNG seed."""

    loss_prob: float
    base_delay_ms: float
    duration_s: float
    packet_interval_ms: float
    rng_seed: int
    jitter_model: str = "none"
    jitter_amplitude_ms: float = 0.0
    pareto_shape: float = 0.6
    pareto_scale_ms: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError(f"loss_prob must be within [0, 1], got {self.loss_prob}")
        if self.base_delay_ms < 0:
            raise ValueError(
                f"base_delay_ms must be >= 0, got {self.base_delay_ms}"
            )
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be > 0, got {self.duration_s}")
        if self.packet_interval_ms <= 0:
            raise ValueError(
                f"packet_interval_ms must be > 0, got {self.packet_interval_ms}"
            )
        if not isinstance(self.rng_seed, int):
            raise ValueError(f"rng_seed must be an integer, got {self.rng_seed!r}")
        if self.jitter_model not in JITTER_MODELS:
            raise ValueError(
                f"jitter_model must be one of {JITTER_MODELS}, "
                f"got {self.jitter_model!r}"
            )
        if self.jitter_amplitude_ms < 0:
            raise ValueError(
                f"jitter_amplitude_ms must be >= 0, got {self.jitter_amplitude_ms}"
            )
        if not PARETO_SHAPE_MIN <= self.pareto_shape <= PARETO_SHAPE_MAX:
            raise ValueError(
                f"pareto_shape must be within [{PARETO_SHAPE_MIN}, "
                f"{PARETO_SHAPE_MAX}], got {self.pareto_shape}"
            )
        if self.pareto_scale_ms < 0:
            raise ValueError(
                f"pareto_scale_ms must be >= 0, got {self.pareto_scale_ms}"
            )


def _in_window(
    trace: Trace, window: tuple[float, float] | None
) -> list[PacketRecord]:
    if window is None:
        return list(trace.packets)
    start, end = window
    return [p for p in trace.packets if start <= p.send_ts_ms < end]


def loss_rate(trace: Trace, window: tuple[float, float] | None = None) -> float:
    """Packet loss percentage over a [start, end) send-time window.

    Expected count is the seq span within the window; a packet counts as
    lost if its record lacks a receive timestamp or its seq is absent from
    the span entirely.
    """
    packets = _in_window(trace, window)
    if not packets:
        raise ValueError(f"window {window} contains no packets")
    expected = packets[-1].seq - packets[0].seq + 1
    received = sum(1 for p in packets if p.received)
    return 100.0 * (expected - received) / expected


def mean_delay(trace: Trace, window: tuple[float, float] | None = None) -> float:
    """Mean one-way delay in ms over received packets in the window."""
    delays = [p.delay_ms for p in _in_window(trace, window) if p.received]
    if not delays:
        raise ValueError(f"window {window} has no received packets")
    return sum(delays) / len(delays)


def jitter_rfc3550(
    trace: Trace, window: tuple[float, float] | None = None
) -> float:
    """Smoothed interarrival jitter over consecutive received packets.

    For each consecutive received pair, D is the difference of transit
    times; the estimate follows J += (|D| - J)/16 from J = 0 and the final
    J in ms is returned.
    """
    received = [p for p in _in_window(trace, window) if p.received]
    if len(received) < 2:
        raise ValueError("jitter needs at least 2 received packets")
    j = 0.0
    for prev, cur in zip(received, received[1:]):
        d = (cur.recv_ts_ms - prev.recv_ts_ms) - (cur.send_ts_ms - prev.send_ts_ms)
        j += (abs(d) - j) / RFC3550_GAIN
    return j


def jitter_mean_abs(
    trace: Trace, window: tuple[float, float] | None = None
) -> float:
    """Mean absolute transit-time difference over consecutive received pairs."""
    received = [p for p in _in_window(trace, window) if p.received]
    if len(received) < 2:
        raise ValueError("jitter needs at least 2 received packets")
    diffs = [
        abs(cur.delay_ms - prev.delay_ms)
        for prev, cur in zip(received, received[1:])
    ]
    return sum(diffs) / len(diffs)


_JITTER_FUNCS = {"rfc3550": jitter_rfc3550, "mean-abs": jitter_mean_abs}


def windows(
    trace: Trace, window_len_s: float, jitter_estimator: str = "rfc3550"
) -> list[WindowMetrics]:
    """Partition a trace by send time into half-open windows and measure each.

    Windows start at the first send timestamp.  The jitter recursion
    restarts per window.  A window with no received packets reports 100%
    loss and unavailable (None) delay/jitter; the trailing window is
    flagged partial when the trace does not cover its full length (trace
    coverage ends at the last send plus the nominal interval, when known).
    """
    if window_len_s <= 0:
        raise ValueError(f"window_len_s must be > 0, got {window_len_s}")
    if jitter_estimator not in JITTER_ESTIMATORS:
        raise ValueError(
            f"jitter_estimator must be one of {JITTER_ESTIMATORS}, "
            f"got {jitter_estimator!r}"
        )
    jitter_func = _JITTER_FUNCS[jitter_estimator]
    win_ms = window_len_s * 1000.0
    t0 = trace.packets[0].send_ts_ms
    coverage_end = trace.packets[-1].send_ts_ms + (trace.interval_ms or 0.0)

    buckets: dict[int, list[PacketRecord]] = {}
    for p in trace.packets:
        buckets.setdefault(int((p.send_ts_ms - t0) // win_ms), []).append(p)
    last = max(buckets)

    out: list[WindowMetrics] = []
    for idx in range(last + 1):
        start = t0 + idx * win_ms
        end = start + win_ms
        packets = buckets.get(idx, [])
        received = [p for p in packets if p.received]
        if packets:
            expected = packets[-1].seq - packets[0].seq + 1
            loss = 100.0 * (expected - len(received)) / expected
        else:
            # No packets were even sent in this span: treat as full outage.
            expected = 0
            loss = 100.0
        delay = (
            sum(p.delay_ms for p in received) / len(received) if received else None
        )
        # compute over the bucket itself so boundary packets cannot land in
        # one window for counting and another for jitter
        jitter = (
            jitter_func(Trace(tuple(packets), interval_ms=trace.interval_ms))
            if len(received) >= 2
            else None
        )
        out.append(
            WindowMetrics(
                window_id=idx,
                sample=QosSample(loss, delay, jitter, window_id=str(idx)),
                packet_count=expected,
                lost_count=expected - len(received),
                received_count=len(received),
                start_ms=start,
                end_ms=end,
                partial=(idx == last and coverage_end < end),
            )
        )
    return out


def _jitter_draw(spec: ImpairmentSpec, rng: random.Random) -> float:
    if spec.jitter_model == "uniform":
        return rng.uniform(-spec.jitter_amplitude_ms, spec.jitter_amplitude_ms)
    if spec.jitter_model == "pareto":
        u = 1.0 - rng.random()  # (0, 1]; guards against u = 0
        return spec.pareto_scale_ms * (u ** (-1.0 / spec.pareto_shape) - 1.0)
    return 0.0


def generate(spec: ImpairmentSpec) -> Trace:
    """Generate a trace at fixed cadence with independent loss and jitter.

    Deterministic for a given seed.  Per-packet delay is base plus the
    jitter draw, truncated at zero so receive never precedes send.
    """
    count = int(round(spec.duration_s * 1000.0 / spec.packet_interval_ms))
    if count < 1:
        raise ValueError("duration_s and packet_interval_ms yield an empty trace")
    rng = random.Random(spec.rng_seed)
    packets = []
    for i in range(count):
        seq = i + 1
        send = i * spec.packet_interval_ms
        if rng.random() < spec.loss_prob:
            packets.append(PacketRecord(seq, send, None))
            continue
        delay = max(spec.base_delay_ms + _jitter_draw(spec, rng), 0.0)
        packets.append(PacketRecord(seq, send, send + delay))
    return Trace(
        tuple(packets),
        source=f"generated(seed={spec.rng_seed})",
        interval_ms=spec.packet_interval_ms,
    )


# ---------------------------------------------------------------------------
# File formats: traces as CSV, generator specs as JSON.

def trace_to_csv_text(trace: Trace) -> str:
    """Render a trace as CSV text; an empty recv field marks a lost packet."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(TRACE_HEADER)
    for p in trace.packets:
        writer.writerow(
            [
                p.seq,
                repr(float(p.send_ts_ms)),
                "" if p.recv_ts_ms is None else repr(float(p.recv_ts_ms)),
            ]
        )
    return buf.getvalue()


def write_trace(trace: Trace, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trace_to_csv_text(trace))


def read_trace(path: str | Path, interval_ms: float | None = None) -> Trace:
    """Read a CSV trace, reporting malformed rows with their line number.

    The CSV carries no cadence metadata, so unless ``interval_ms`` is
    given the nominal inter-packet interval is inferred as the median
    send-time delta (None for single-packet traces).
    """
    packets = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty trace file") from None
        if tuple(h.strip() for h in header) != TRACE_HEADER:
            raise ValueError(
                f"{path}: line 1: expected header {','.join(TRACE_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 columns")
            try:
                seq = int(row[0])
                send = float(row[1])
                recv = float(row[2]) if row[2].strip() else None
                packets.append(PacketRecord(seq, send, recv))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    if not packets:
        raise ValueError(f"{path}: trace contains no packets")
    if interval_ms is None and len(packets) > 1:
        deltas = sorted(
            b.send_ts_ms - a.send_ts_ms for a, b in zip(packets, packets[1:])
        )
        interval_ms = deltas[len(deltas) // 2]
    return Trace(tuple(packets), source=str(path), interval_ms=interval_ms)


def spec_from_dict(data: dict) -> ImpairmentSpec:
    """Build a generator spec from its JSON layout.

    Jitter settings nest under "jitter": {"model": "none" | "uniform" |
    "pareto", "amplitude_ms": ..., "shape": ..., "scale_ms": ...}.
    """
    if "rng_seed" not in data:
        raise ValueError("spec is missing required field 'rng_seed'")
    jitter = data.get("jitter", {"model": "none"})
    if not isinstance(jitter, dict) or "model" not in jitter:
        raise ValueError("spec field 'jitter' must be an object with a 'model'")
    try:
        return ImpairmentSpec(
            loss_prob=float(data["loss_prob"]),
            base_delay_ms=float(data["base_delay_ms"]),
            duration_s=float(data["duration_s"]),
            packet_interval_ms=float(data["packet_interval_ms"]),
            rng_seed=int(data["rng_seed"]),
            jitter_model=str(jitter["model"]),
            jitter_amplitude_ms=float(jitter.get("amplitude_ms", 0.0)),
            pareto_shape=float(jitter.get("shape", 0.6)),
            pareto_scale_ms=float(jitter.get("scale_ms", 0.0)),
        )
    except KeyError as exc:
        raise ValueError(f"spec is missing required field {exc}") from exc


def load_impairment_spec(path: str | Path) -> ImpairmentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid spec JSON: {exc}") from exc
    return spec_from_dict(data)
