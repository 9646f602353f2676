"""Spike encoding of symbol sequences.

Every symbol of the input stream activates one state variable. The activation
then decays as ``exp(-0.1 * (t - ta))`` and is forgotten once it is older than
``m * tstep`` simulation steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

DECAY_RATE = 0.1
NEVER = np.iinfo(np.int64).min


@dataclass(frozen=True)
class SequenceConfig:
    """Sizes of the encoded stream.

    n is the number of distinct states, tau the number of state transitions,
    tstep the simulation steps per transition and m the memory window counted
    in transitions.
    """

    n: int
    tau: int = 300_000
    tstep: int = 10
    m: int = 10

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.tstep < 1:
            raise ValueError(f"tstep must be >= 1, got {self.tstep}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    @property
    def window(self) -> int:
        return self.m * self.tstep


@dataclass
class ActivationState:
    """Most recent activation step per state and the decayed activation vector."""

    last_activation: np.ndarray
    x: np.ndarray
    t: int | None = None
    window: int = field(default=100)

    @classmethod
    def empty(cls, n: int, window: int = 100) -> "ActivationState":
        return cls(
            last_activation=np.full(n, NEVER, dtype=np.int64),
            x=np.zeros(n),
            window=window,
        )

    @property
    def n(self) -> int:
        return self.x.shape[0]


def activation_values(last_activation: np.ndarray, t: int, window: int) -> np.ndarray:
    """Evaluate the decaying activation of every state at step ``t``."""
    x = np.zeros(last_activation.shape[0])
    seen = last_activation != NEVER
    age = np.where(seen, t - last_activation, window)
    live = seen & (age < window)
    x[live] = np.exp(-DECAY_RATE * age[live])
    return x


def encode_step(state: ActivationState, t: int, activated: int | None = None) -> ActivationState:
    """Advance the encoder to step ``t``, optionally activating one state."""
    if state.t is not None and t <= state.t:
        raise ValueError(f"steps must strictly increase: got {t} after {state.t}")
    last = state.last_activation.copy()
    if activated is not None:
        if not 0 <= activated < last.shape[0]:
            raise ValueError(f"state id {activated} out of range [0, {last.shape[0]})")
        last[activated] = t
    x = activation_values(last, t, state.window)
    return ActivationState(last_activation=last, x=x, t=t, window=state.window)


def encode_sequence(seq, cfg: SequenceConfig) -> Iterator[ActivationState]:
    """Yield one activation state per simulation step.

    Symbol ``k`` is injected at step ``k * cfg.tstep``; the stream has
    ``len(seq) * cfg.tstep`` steps in total.
    """
    seq = np.asarray(seq)
    if seq.size == 0:
        raise ValueError("cannot encode an empty sequence")
    if seq.min() < 0 or seq.max() >= cfg.n:
        raise ValueError(f"symbols must lie in [0, {cfg.n})")

    state = ActivationState.empty(cfg.n, cfg.window)
    for k, symbol in enumerate(seq):
        base = k * cfg.tstep
        state = encode_step(state, base, int(symbol))
        yield state
        for offset in range(1, cfg.tstep):
            state = encode_step(state, base + offset)
            yield state


def read_sequence(path) -> np.ndarray:
    """Read a newline-delimited file of non-negative integer symbols."""
    path = Path(path)
    values = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                value = int(line)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer: {line!r}") from None
            if value < 0:
                raise ValueError(f"{path}:{lineno}: negative symbol {value}")
            values.append(value)
    if not values:
        raise ValueError(f"{path}: empty sequence file")
    return np.asarray(values, dtype=np.int64)


def write_sequence(path, seq) -> None:
    seq = np.asarray(seq, dtype=np.int64)
    Path(path).write_text("".join(f"{int(s)}\n" for s in seq), encoding="utf-8")
