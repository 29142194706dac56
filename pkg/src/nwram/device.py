"""Behavioral FET model calibrated to terminal Ion/Ioff endpoints.

The channel current uses a smoothed overdrive

    Vov = n*Vt*ln(1 + exp((Vgs - Vth)/(n*Vt)))

with a square-law triode/saturation body on top of it.  Two coefficients
(k, n) are fitted so that the model reproduces a preset's on-current at
(Vgs, Vds) = (Vdd, Vdd) and its off-current at (0, Vdd).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace

from scipy import optimize

THERMAL_VOLTAGE = 0.02585
N_BRACKET = (1.0, 10.0)

# 16 nm x 16 nm reference gate that the default capacitances describe.
REF_LENGTH = 16e-9
REF_WIDTH = 16e-9

# Ion scale applied when mirroring an N-type preset into its P-type partner.
PMOS_ION_RATIO = 0.5


class CalibrationError(ValueError):
    """No (k, n) pair reproduces the requested endpoints."""


class DeviceKind(str, enum.Enum):
    XNWFET_2C = "XNWFET_2C"
    PTM_HP_N = "PTM_HP_N"
    PTM_LP_N = "PTM_LP_N"
    PTM_HP_P = "PTM_HP_P"
    PTM_LP_P = "PTM_LP_P"

    @property
    def is_p(self) -> bool:
        return self in (DeviceKind.PTM_HP_P, DeviceKind.PTM_LP_P)


@dataclass(frozen=True)
class DeviceParams:
    kind: DeviceKind
    ion: float
    ioff: float
    vdd_nominal: float
    vth: float
    length: float
    width: float

    def check(self) -> None:
        if not (self.ion > 0 and self.ioff > 0):
            raise CalibrationError(f"{self.kind.value}: currents must be positive")
        if self.ioff >= self.ion:
            raise CalibrationError(
                f"{self.kind.value}: ioff ({self.ioff:g}) must be below ion ({self.ion:g})"
            )
        if not 0 < self.vth < self.vdd_nominal:
            raise CalibrationError(f"{self.kind.value}: need 0 < vth < vdd_nominal")
        if self.length <= 0 or self.width <= 0:
            raise CalibrationError(f"{self.kind.value}: geometry must be positive")


def _nmos_presets() -> dict[DeviceKind, DeviceParams]:
    return {
        DeviceKind.XNWFET_2C: DeviceParams(
            DeviceKind.XNWFET_2C, 4.08e-5, 1.56e-9, 0.8, 0.27, 16e-9, 16e-9
        ),
        DeviceKind.PTM_HP_N: DeviceParams(
            DeviceKind.PTM_HP_N, 3.68e-5, 1.05e-8, 0.7, 0.47, 16e-9, 32e-9
        ),
        DeviceKind.PTM_LP_N: DeviceParams(
            DeviceKind.PTM_LP_N, 1.47e-5, 1.99e-12, 0.9, 0.68, 16e-9, 32e-9
        ),
    }


def _build_presets() -> dict[DeviceKind, DeviceParams]:
    presets = _nmos_presets()
    for p_kind, n_kind in ((DeviceKind.PTM_HP_P, DeviceKind.PTM_HP_N),
                           (DeviceKind.PTM_LP_P, DeviceKind.PTM_LP_N)):
        n = presets[n_kind]
        presets[p_kind] = replace(n, kind=p_kind, ion=n.ion * PMOS_ION_RATIO)
    return presets


PRESETS: dict[DeviceKind, DeviceParams] = _build_presets()


@dataclass(frozen=True)
class CalibratedDevice:
    params: DeviceParams
    k: float
    n: float
    thermal_voltage: float = THERMAL_VOLTAGE

    @property
    def kind(self) -> DeviceKind:
        return self.params.kind

    @property
    def polarity(self) -> int:
        return -1 if self.params.kind.is_p else 1

    @property
    def n_vt(self) -> float:
        return self.n * self.thermal_voltage


@dataclass(frozen=True)
class CapConfig:
    """Per-terminal capacitances of a 16 nm x 16 nm reference device."""

    c_gate: float = 0.05e-15
    c_drain: float = 0.025e-15
    c_source: float = 0.025e-15
    scale_with_geometry: bool = True

    def __post_init__(self):
        if min(self.c_gate, self.c_drain, self.c_source) < 0:
            raise ValueError("capacitances must be non-negative")


@dataclass(frozen=True)
class DeviceCaps:
    c_gate: float
    c_drain: float
    c_source: float


@dataclass(frozen=True)
class DeviceConfig:
    """Calibration inputs for every device kind plus capacitance defaults."""

    params: dict[DeviceKind, DeviceParams] = field(default_factory=lambda: dict(PRESETS))
    caps: CapConfig = field(default_factory=CapConfig)

    def calibrated(self, kind: DeviceKind) -> CalibratedDevice:
        return calibrate(self.params[kind])


def overdrive(vgs: float, vth: float, n_vt: float) -> float:
    x = (vgs - vth) / n_vt
    if x > 30.0:
        return n_vt * (x + math.log1p(math.exp(-x)))
    return n_vt * math.log1p(math.exp(x))


def channel_current(vgs: float, vds: float, k: float, vth: float, n_vt: float) -> float:
    """Current for vds >= 0 in the source-referenced frame."""
    vov = overdrive(vgs, vth, n_vt)
    if vds < vov:
        return k * (vov * vds - 0.5 * vds * vds)
    return 0.5 * k * vov * vov


def _unit_current(params: DeviceParams, n: float, vgs: float, vds: float) -> float:
    return channel_current(vgs, vds, 1.0, params.vth, n * THERMAL_VOLTAGE)


@functools.lru_cache(maxsize=None)
def calibrate(params: DeviceParams) -> CalibratedDevice:
    """Fit (k, n) so the model hits the preset's Ion and Ioff.

    k is eliminated through the on-current equation; n is then found by
    bisection on the log off-current mismatch over ``N_BRACKET``.
    """
    params.check()
    vdd = params.vdd_nominal
    log_target = math.log(params.ioff / params.ion)

    def mismatch(n: float) -> float:
        on = _unit_current(params, n, vdd, vdd)
        off = _unit_current(params, n, 0.0, vdd)
        return math.log(off / on) - log_target

    lo, hi = N_BRACKET
    if mismatch(lo) > 0 or mismatch(hi) < 0:
        raise CalibrationError(
            f"{params.kind.value}: ideality factor not bracketed in [{lo}, {hi}]"
        )
    n = optimize.bisect(mismatch, lo, hi, xtol=1e-12, rtol=1e-6, maxiter=200)
    k = params.ion / _unit_current(params, n, vdd, vdd)
    return CalibratedDevice(params=params, k=k, n=n)


def drain_current(dev: CalibratedDevice, vg: float, vd: float, vs: float,
                  width_mult: float = 1.0) -> float:
    """Drain-to-source current in amperes.

    P-type devices are evaluated by mirroring every terminal voltage and the
    resulting current.
    """
    if width_mult <= 0:
        raise ValueError("width_mult must be positive")
    p = dev.params
    if dev.polarity < 0:
        vg, vd, vs = -vg, -vd, -vs
    if vd >= vs:
        i = channel_current(vg - vs, vd - vs, dev.k, p.vth, dev.n_vt)
    else:
        i = -channel_current(vg - vd, vs - vd, dev.k, p.vth, dev.n_vt)
    return dev.polarity * width_mult * i


def device_caps(dev: CalibratedDevice, width_mult: float = 1.0,
                config: CapConfig | None = None) -> DeviceCaps:
    if width_mult <= 0:
        raise ValueError("width_mult must be positive")
    cfg = config or CapConfig()
    gate_scale = junction_scale = 1.0
    if cfg.scale_with_geometry:
        w = dev.params.width / REF_WIDTH
        gate_scale = w * dev.params.length / REF_LENGTH
        junction_scale = w
    return DeviceCaps(
        c_gate=cfg.c_gate * gate_scale * width_mult,
        c_drain=cfg.c_drain * junction_scale * width_mult,
        c_source=cfg.c_source * junction_scale * width_mult,
    )
