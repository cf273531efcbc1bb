"""Random circular-shift augmentation for 3D tensors.

One call rolls the tensor along a uniformly chosen axis and direction by a
uniformly chosen count s in {0, ..., floor(p * dim_size)}. Without padding
the result is a pure permutation of the input; with padding the slab of
wrapped-around entries is overwritten with a constant. Every draw is
returned as a replayable ShiftEvent.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigError, InputError


@dataclass(frozen=True)
class Shift3DConfig:
    max_shift_fraction: float = 0.2
    padding: bool = False
    padding_value: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.max_shift_fraction <= 1.0:
            raise ConfigError(
                f"max shift fraction must be in [0, 1], got {self.max_shift_fraction}"
            )


@dataclass(frozen=True)
class ShiftEvent:
    axis: int
    direction: int
    count: int

    def __post_init__(self):
        if self.axis not in (0, 1, 2):
            raise InputError(f"axis must be 0, 1 or 2, got {self.axis}")
        if self.direction not in (-1, 1):
            raise InputError(f"direction must be -1 or +1, got {self.direction}")
        if self.count < 0:
            raise InputError(f"shift count must be non-negative, got {self.count}")

    def reverse(self) -> "ShiftEvent":
        return ShiftEvent(self.axis, -self.direction, self.count)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "ShiftEvent":
        return cls(axis=int(obj["axis"]), direction=int(obj["direction"]), count=int(obj["count"]))


def max_shift(size: int, fraction: float) -> int:
    """Largest admissible shift count for an axis of the given size."""
    return int(np.floor(fraction * size))


def apply_shift(t: np.ndarray, event: ShiftEvent, cfg: Shift3DConfig | None = None) -> np.ndarray:
    """Deterministic replay of a recorded shift event."""
    t = np.asarray(t)
    if t.ndim != 3 or t.size == 0:
        raise InputError(f"expected a non-empty 3D tensor, got shape {t.shape}")
    size = t.shape[event.axis]
    if event.count > size:
        raise InputError(
            f"shift count {event.count} exceeds axis {event.axis} size {size}"
        )
    out = np.roll(t, shift=event.direction * event.count, axis=event.axis)
    if cfg is not None and cfg.padding and event.count > 0:
        sl = [slice(None)] * 3
        if event.direction > 0:
            # wrapped entries re-enter at the leading face
            sl[event.axis] = slice(0, event.count)
        else:
            sl[event.axis] = slice(size - event.count, size)
        out[tuple(sl)] = cfg.padding_value
    return out


def shift3d(
    t: np.ndarray, cfg: Shift3DConfig, rng: np.random.Generator
) -> tuple[np.ndarray, ShiftEvent]:
    """Sample a shift event and apply it; returns (shifted tensor, event)."""
    t = np.asarray(t)
    if t.ndim != 3 or t.size == 0:
        raise InputError(f"expected a non-empty 3D tensor, got shape {t.shape}")
    axis = int(rng.integers(0, 3))
    direction = -1 if int(rng.integers(0, 2)) > 0 else 1
    upper = max_shift(t.shape[axis], cfg.max_shift_fraction)
    count = int(rng.integers(0, upper + 1))
    event = ShiftEvent(axis=axis, direction=direction, count=count)
    return apply_shift(t, event, cfg), event
