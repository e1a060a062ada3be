"""Range-constrained scalar maps used as controller output stages and as
plant output maps.

Every map is continuously differentiable with open range exactly
(lower, upper); the bounded kinds never attain their bounds, which is
what enforces hard transient limits on flows and inputs.  The `linear`
kind with zero slope is allowed only for the nondecreasing maps of the
compartmental term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Saturation", "identity", "linear", "tanh_box", "arctan_box", "RangeError"]

KINDS = ("identity", "linear", "scaled_tanh", "affine_tanh", "scaled_arctan")

# canonical bounded form: lower + a*(tanh(gain*z)+1), a = (upper-lower)/2
_TANH_KINDS = ("scaled_tanh", "affine_tanh")


class RangeError(ValueError):
    """Requested output value lies outside the open range of the map."""


def _require_finite(z) -> np.ndarray:
    z = np.asarray(z)
    if not np.issubdtype(z.dtype, np.floating):
        z = z.astype(float)  # keep extended precision when given, else float64
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite input")
    return z


@dataclass(frozen=True)
class Saturation:
    kind: str
    lower: float = -math.inf
    upper: float = math.inf
    gain: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown saturation kind {self.kind!r}")
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        object.__setattr__(self, "gain", float(self.gain))
        if math.isnan(self.lower) or math.isnan(self.upper) or not math.isfinite(self.gain):
            raise ValueError("bounds must not be NaN and gain must be finite")
        if self.kind in ("identity", "linear"):
            if math.isfinite(self.lower) or math.isfinite(self.upper):
                raise ValueError(f"{self.kind} map has range (-inf, inf); finite bounds not allowed")
            if self.kind == "identity" and self.gain != 1.0:
                raise ValueError("identity map must have gain 1")
            if self.kind == "linear" and self.gain < 0:
                raise ValueError("linear map needs slope >= 0")
        else:
            if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
                raise ValueError(f"{self.kind} map needs finite bounds")
            if not self.lower < self.upper:
                raise ValueError(f"need lower < upper, got ({self.lower}, {self.upper})")
            if not self.gain > 0:
                raise ValueError(f"{self.kind} map needs gain > 0")

    # -- basic properties -------------------------------------------------
    @property
    def is_strictly_increasing(self) -> bool:
        return not (self.kind == "linear" and self.gain == 0.0)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    @property
    def midpoint(self) -> float:
        """Mid-range output; 0 for the unbounded kinds."""
        return 0.5 * (self.lower + self.upper) if self.bounded else 0.0

    # -- evaluation --------------------------------------------------------
    def __call__(self, z):
        z = _require_finite(z)
        if self.kind == "identity":
            out = z.copy()
        elif self.kind == "linear":
            out = self.gain * z
        elif self.kind in _TANH_KINDS:
            a = 0.5 * (self.upper - self.lower)
            out = self.lower + a * (np.tanh(self.gain * z) + 1.0)
        else:  # scaled_arctan
            out = self.lower + (self.upper - self.lower) * (np.arctan(self.gain * z) / np.pi + 0.5)
        if self.bounded:
            # rounding in the saturated tails can land exactly on a bound;
            # the range is open, so clamp to the nearest interior value
            out = np.clip(out, np.nextafter(self.lower, self.upper), np.nextafter(self.upper, self.lower))
        return float(out) if out.ndim == 0 else out

    def derivative(self, z):
        z = _require_finite(z)
        if self.kind == "identity":
            out = np.ones_like(z)
        elif self.kind == "linear":
            out = np.full_like(z, self.gain)
        elif self.kind in _TANH_KINDS:
            a = 0.5 * (self.upper - self.lower)
            t = np.tanh(self.gain * z)
            out = a * self.gain * (1.0 - t * t)
        else:
            out = (self.upper - self.lower) * self.gain / (np.pi * (1.0 + (self.gain * z) ** 2))
        return float(out) if out.ndim == 0 else out

    def inverse(self, y):
        """Preimage of y; raises RangeError unless lower < y < upper."""
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise ValueError("non-finite input")
        if np.any(y <= self.lower) or np.any(y >= self.upper):
            raise RangeError(f"value outside open range ({self.lower}, {self.upper})")
        if self.kind == "identity":
            out = y.copy()
        elif self.kind == "linear":
            if self.gain == 0.0:
                raise RangeError("constant map has no inverse")
            out = y / self.gain
        elif self.kind in _TANH_KINDS:
            a = 0.5 * (self.upper - self.lower)
            out = np.arctanh((y - self.lower) / a - 1.0) / self.gain
        else:
            out = np.tan(np.pi * ((y - self.lower) / (self.upper - self.lower) - 0.5)) / self.gain
        return float(out) if out.ndim == 0 else out

    # -- storage-function building block ------------------------------------
    def antiderivative(self, z):
        z = _require_finite(z)
        if self.kind == "identity":
            out = 0.5 * z * z
        elif self.kind == "linear":
            out = 0.5 * self.gain * z * z
        elif self.kind in _TANH_KINDS:
            a = 0.5 * (self.upper - self.lower)
            # log cosh written to stay finite for large |gain*z|
            gz = np.abs(self.gain * z)
            logcosh = gz + np.log1p(np.exp(-2.0 * gz)) - np.log(2.0)
            out = (self.lower + a) * z + a * logcosh / self.gain
        else:
            d = self.upper - self.lower
            gz = self.gain * z
            out = (self.lower + 0.5 * d) * z + d / np.pi * (
                z * np.arctan(gz) - np.log1p(gz * gz) / (2.0 * self.gain)
            )
        return float(out) if np.ndim(out) == 0 else out

    def bregman(self, z, zref):
        """Integral of (f(s) - f(zref)) ds from zref to z; nonnegative for
        nondecreasing f and zero at z = zref.  Rounding can push the exact
        closed form a few ulp negative, so the result is floored at 0."""
        z = _require_finite(z)
        zref = _require_finite(zref)
        if self.kind in ("identity", "linear"):
            # direct quadratic form: the antiderivative route cancels
            # catastrophically when |z| is large against |z - zref|
            gain = 1.0 if self.kind == "identity" else self.gain
            val = 0.5 * gain * (z - zref) ** 2
        else:
            val = self.antiderivative(z) - self.antiderivative(zref) - self(zref) * (z - zref)
            val = np.maximum(val, 0.0)
        return float(val) if np.ndim(val) == 0 else val

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.bounded:
            d["lower"] = self.lower
            d["upper"] = self.upper
        if self.kind != "identity":
            d["gain"] = self.gain
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Saturation":
        allowed = {"kind", "lower", "upper", "gain"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown saturation fields {sorted(unknown)}")
        lower = d.get("lower", -math.inf)
        upper = d.get("upper", math.inf)
        lower = -math.inf if lower in (None, "-inf") else float(lower)
        upper = math.inf if upper in (None, "inf") else float(upper)
        return cls(d["kind"], lower, upper, float(d.get("gain", 1.0)))


def identity() -> Saturation:
    return Saturation("identity")


def linear(slope: float) -> Saturation:
    return Saturation("linear", gain=slope)


def tanh_box(lower: float, upper: float, gain: float = 1.0) -> Saturation:
    """lower + (upper-lower)/2 * (tanh(gain*z) + 1); range (lower, upper)."""
    return Saturation("scaled_tanh", lower, upper, gain)


def arctan_box(lower: float, upper: float, gain: float = 1.0) -> Saturation:
    return Saturation("scaled_arctan", lower, upper, gain)
