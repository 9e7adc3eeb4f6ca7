"""Drive-signal construction: pulse trains, sample-and-hold, random inputs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .medium import DriveSignal

__all__ = [
    "PulseTrainSpec",
    "InputSeries",
    "encode_bits",
    "encode_rows",
    "mnist_to_rows",
    "random_input",
    "hold_encode",
]


@dataclass(frozen=True)
class PulseTrainSpec:
    """Binary pulse-train encoding parameters.

    Each bit of a symbol is held at ``amplitude_high`` or
    ``amplitude_low`` for ``pulse_width`` time units; symbols within a
    sequence stream back to back, and ``inter_sequence_gap`` time units
    of silence (zero drive) separate whole sequences.  ``sample_period``
    is the sampling grid of the emitted drive and should equal the
    medium time step.
    """

    bits_per_symbol: int = 4
    pulse_width: float = 0.4
    amplitude_high: float = 1.0
    amplitude_low: float = 0.0
    inter_sequence_gap: float = 0.0
    sample_period: float = 0.05

    def __post_init__(self):
        if self.bits_per_symbol < 1:
            raise ValueError("bits_per_symbol must be at least 1")
        if self.pulse_width <= 0:
            raise ValueError("pulse_width must be positive")
        if self.amplitude_high == self.amplitude_low:
            raise ValueError("amplitude_high must differ from amplitude_low")
        if self.sample_period <= 0:
            raise ValueError("sample_period must be positive")
        if self.inter_sequence_gap < 0:
            raise ValueError("inter_sequence_gap must be non-negative")
        for name, width in (("pulse_width", self.pulse_width),
                            ("inter_sequence_gap", self.inter_sequence_gap)):
            n = width / self.sample_period
            if abs(n - round(n)) > 1e-9 * max(1.0, n):
                raise ValueError(f"{name} must be a multiple of sample_period")

    @property
    def samples_per_bit(self) -> int:
        return int(round(self.pulse_width / self.sample_period))

    @property
    def gap_samples(self) -> int:
        return int(round(self.inter_sequence_gap / self.sample_period))


def encode_bits(bits, spec: PulseTrainSpec, port: int = 0) -> DriveSignal:
    """Encode one symbol of ``spec.bits_per_symbol`` bits as a pulse train.

    Each bit maps to its amplitude level held for ``pulse_width``; the
    inter-sequence gap (zeros) is appended after the symbol.
    """
    bits = np.asarray(bits)
    if bits.shape != (spec.bits_per_symbol,):
        raise ValueError(
            f"expected {spec.bits_per_symbol} bits, got shape {bits.shape}"
        )
    if not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0 or 1")
    levels = np.where(bits > 0, spec.amplitude_high, spec.amplitude_low)
    samples = np.repeat(levels, spec.samples_per_bit)
    if spec.gap_samples:
        samples = np.concatenate([samples, np.zeros(spec.gap_samples)])
    return DriveSignal(samples=samples, sample_period=spec.sample_period, port=port)


def encode_rows(rows: np.ndarray, spec: PulseTrainSpec, port: int = 0) -> DriveSignal:
    """Stream many symbols back to back into one continuous drive.

    Rows stream without gaps so that the medium's fading memory carries
    row-to-row context; the inter-sequence gap belongs between whole
    images, which the pipeline realises by restarting from the rest
    state instead of simulating the silence.
    """
    rows = np.asarray(rows)
    if rows.ndim != 2 or rows.shape[1] != spec.bits_per_symbol:
        raise ValueError(
            f"rows must have shape (n, {spec.bits_per_symbol}), got {rows.shape}"
        )
    levels = np.where(rows > 0, spec.amplitude_high, spec.amplitude_low)
    samples = np.repeat(levels.reshape(-1), spec.samples_per_bit)
    return DriveSignal(samples=samples, sample_period=spec.sample_period, port=port)


def mnist_to_rows(image: np.ndarray, threshold: int = 128) -> np.ndarray:
    """Binarise a 28x28 grayscale image and reshape to 196 rows of 4 bits.

    Pixels >= ``threshold`` become 1.  The 784 binary pixels are grouped
    row-major into 196 consecutive 4-pixel rows.
    """
    image = np.asarray(image)
    if image.shape != (28, 28):
        raise ValueError(f"expected a 28x28 image, got shape {image.shape}")
    bits = (image >= threshold).astype(np.uint8)
    return bits.reshape(196, 4)


@dataclass(frozen=True)
class InputSeries:
    """Random task input u(k), uniform over [0, 0.5]."""

    values: np.ndarray
    seed: int
    low: float = 0.0
    high: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        v = self.values
        if v.size and (v.min() < self.low or v.max() > self.high):
            raise ValueError(
                f"input values outside declared range [{self.low}, {self.high}]"
            )

    def __len__(self) -> int:
        return self.values.size


def random_input(length: int, seed: int) -> InputSeries:
    """I.i.d. uniform input series on [0, 0.5], reproducible from ``seed``."""
    if length <= 0:
        raise ValueError("length must be positive")
    rng = np.random.default_rng(seed)
    return InputSeries(values=rng.uniform(0.0, 0.5, length), seed=seed)


def hold_encode(u: InputSeries | np.ndarray, interval: float, dt: float,
                port: int = 0) -> DriveSignal:
    """Zero-order hold: each u(k) held for ``interval`` time units.

    ``interval`` must be an integer multiple of the medium time step
    ``dt``; the resulting drive has len(u) * interval / dt samples on
    the dt grid.
    """
    values = u.values if isinstance(u, InputSeries) else np.asarray(u, dtype=float)
    ratio = interval / dt
    hold = int(round(ratio))
    if hold < 1 or abs(ratio - hold) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"interval {interval} is not an integer multiple of dt {dt}")
    samples = np.repeat(values, hold)
    return DriveSignal(samples=samples, sample_period=dt, port=port)
