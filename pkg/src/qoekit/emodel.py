"""Simplified E-model: impairment factors and the R-to-MOS conversion.

A transmission rating R on the 100-point scale starts at a codec baseline
and is reduced by independent impairment terms for one-way delay, packet
loss and jitter.  R is then mapped to the 5-point MOS scale; objective
models cap at 4.5 and floor at 1.0.

All functions here are pure and reentrant.  Codec constants live in a
:class:`CodecProfile`; a G.729 profile ships as the default.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

MOS_MIN = 1.0
MOS_MAX = 4.5

# One-way delay beyond this point incurs an extra 0.11/ms rating penalty.
DELAY_KNEE_MS = 177.3

PARETO_H_MIN = 0.55
PARETO_H_MAX = 0.9


@dataclass(frozen=True)
class CodecProfile:
    """Constant set specializing the rating model to one codec.

    ``loss_a``/``loss_b``/``loss_c`` parameterize the loss term,
    ``jitter_c1``..``jitter_c4`` the jitter polynomial, ``pareto_h`` the
    heavy-tail shape of the jitter distribution (valid range 0.55-0.9),
    ``jitter_t_ms`` the de-jitter buffer size and ``jitter_k`` the decay
    constant of the buffer term.
    """

    name: str
    r0: float
    loss_a: float
    loss_b: float
    loss_c: float
    jitter_c1: float
    jitter_c2: float
    jitter_c3: float
    jitter_c4: float
    pareto_h: float = 0.6
    jitter_t_ms: float = 40.0
    jitter_k: float = 30.0

    def __post_init__(self) -> None:
        if not 0.0 < self.r0 <= 100.0:
            raise ValueError(f"r0 must be within (0, 100], got {self.r0}")
        if not PARETO_H_MIN <= self.pareto_h <= PARETO_H_MAX:
            raise ValueError(
                f"pareto_h must be within [{PARETO_H_MIN}, {PARETO_H_MAX}], "
                f"got {self.pareto_h}"
            )
        if self.jitter_t_ms < 0:
            raise ValueError(f"jitter_t_ms must be >= 0, got {self.jitter_t_ms}")
        if self.jitter_k <= 0:
            raise ValueError(f"jitter_k must be > 0, got {self.jitter_k}")


#: Built-in narrowband G.729 profile, the library default.
G729 = CodecProfile(
    name="G.729",
    r0=93.2,
    loss_a=11.0,
    loss_b=40.0,
    loss_c=10.0,
    jitter_c1=-15.5,
    jitter_c2=33.5,
    jitter_c3=4.4,
    jitter_c4=13.6,
    pareto_h=0.6,
    jitter_t_ms=40.0,
    jitter_k=30.0,
)


def heaviside(x: float) -> float:
    """Unit step: 1 for x > 0, else 0.

    The value at exactly 0 is immaterial for the delay term because the
    step is multiplied by a factor that vanishes at the knee.
    """
    return 1.0 if x > 0 else 0.0


def delay_impairment(delay_ms: float) -> float:
    """Rating penalty for one-way delay in milliseconds.

    Linear at 0.024/ms, with an extra 0.11/ms beyond the 177.3 ms knee.
    """
    if delay_ms < 0:
        raise ValueError(f"delay_ms must be >= 0, got {delay_ms}")
    excess = delay_ms - DELAY_KNEE_MS
    return 0.024 * delay_ms + 0.11 * excess * heaviside(excess)


def loss_impairment(loss_pct: float, profile: CodecProfile = G729) -> float:
    """Combined codec and packet-loss penalty for a loss percentage.

    Equals ``loss_a`` at zero loss (the codec's intrinsic penalty) and
    grows logarithmically with the loss fraction.
    """
    if not 0.0 <= loss_pct <= 100.0:
        raise ValueError(f"loss_pct must be within [0, 100], got {loss_pct}")
    return profile.loss_a + profile.loss_b * math.log(
        1.0 + profile.loss_c * loss_pct / 100.0
    )


def jitter_impairment(profile: CodecProfile = G729) -> float:
    """Jitter penalty for a profile's heavy-tail shape and buffer settings.

    Quadratic in ``pareto_h`` plus an exponentially decaying buffer term;
    a larger buffer (``jitter_t_ms``) absorbs more jitter and lowers the
    penalty.
    """
    h = profile.pareto_h
    return (
        profile.jitter_c1 * h * h
        + profile.jitter_c2 * h
        + profile.jitter_c3
        + profile.jitter_c4 * math.exp(-profile.jitter_t_ms / profile.jitter_k)
    )


def r_simplified(
    delay_ms: float, loss_pct: float, profile: CodecProfile = G729
) -> float:
    """Transmission rating: baseline minus delay, loss and jitter penalties.

    The result may be negative or exceed 100; :func:`mos_from_r` clamps.
    """
    return (
        profile.r0
        - delay_impairment(delay_ms)
        - loss_impairment(loss_pct, profile)
        - jitter_impairment(profile)
    )


def mos_from_r(r: float) -> float:
    """Convert a 100-point transmission rating to the 5-point MOS scale.

    Ratings at or above 100 map to 4.5, at or below 0 to 1.0.  In between
    a cubic interpolation applies, clamped to [1.0, 4.5]; the clamp also
    floors a small dip of the raw cubic below 1.0 near R = 3.
    """
    if r >= 100.0:
        return MOS_MAX
    if r <= 0.0:
        return MOS_MIN
    raw = 1.0 + 0.035 * r + r * (r - 60.0) * (100.0 - r) * 7e-6
    return min(MOS_MAX, max(MOS_MIN, raw))


def profile_from_dict(data: dict) -> CodecProfile:
    """Build a profile from the JSON layout {name, r0, loss:{...}, jitter:{...}}."""
    try:
        loss = data["loss"]
        jitter = data["jitter"]
        return CodecProfile(
            name=str(data["name"]),
            r0=float(data["r0"]),
            loss_a=float(loss["a"]),
            loss_b=float(loss["b"]),
            loss_c=float(loss["c"]),
            jitter_c1=float(jitter["c1"]),
            jitter_c2=float(jitter["c2"]),
            jitter_c3=float(jitter["c3"]),
            jitter_c4=float(jitter["c4"]),
            pareto_h=float(jitter.get("h", G729.pareto_h)),
            jitter_t_ms=float(jitter.get("t_ms", G729.jitter_t_ms)),
            jitter_k=float(jitter.get("k", G729.jitter_k)),
        )
    except KeyError as exc:
        raise ValueError(f"profile is missing required field {exc}") from exc


def profile_to_dict(profile: CodecProfile) -> dict:
    """Inverse of :func:`profile_from_dict`."""
    d = asdict(profile)
    return {
        "name": d["name"],
        "r0": d["r0"],
        "loss": {"a": d["loss_a"], "b": d["loss_b"], "c": d["loss_c"]},
        "jitter": {
            "c1": d["jitter_c1"],
            "c2": d["jitter_c2"],
            "c3": d["jitter_c3"],
            "c4": d["jitter_c4"],
            "h": d["pareto_h"],
            "t_ms": d["jitter_t_ms"],
            "k": d["jitter_k"],
        },
    }


def load_profile(path: str | Path) -> CodecProfile:
    """Load a codec profile from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid profile JSON: {exc}") from exc
    return profile_from_dict(data)
