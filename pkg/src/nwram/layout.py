"""Cell area, design-rule scaling and wire RC extraction.

Gridded cells (NWRAM, 8T) take their area from a track count on a uniform
1-D pitch.  The 6T cells come from published larger-node cells divided by
per-scenario scaling factors.  Published 16 nm outputs are the regression
targets, so each reference value is stored as ``target * factor``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .netlist import CellKind, WireRC

NM = 1e-9
UM2 = 1e-12

PITCH_MIN = 40 * NM
PITCH_MAX = 60 * NM
CONTACT_PITCH = 50 * NM


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class DesignRules:
    """Linear rule set in meters.  The SRAM-only fields are None for gridded sets."""

    m1_pitch: float
    m2_pitch: float
    contact_pitch: float
    m1_half_pitch: float | None = None
    np_spacing: float | None = None
    via_spacing: float | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None and not v > 0:
                raise LayoutError(f"{f.name} must be positive, got {v!r}")

    def scaled(self, factor: float) -> "DesignRules":
        return replace(self, **{
            f.name: getattr(self, f.name) / factor
            for f in fields(self) if getattr(self, f.name) is not None
        })


def gridded_rules(pitch: float) -> DesignRules:
    if not PITCH_MIN * (1 - 1e-9) <= pitch <= PITCH_MAX * (1 + 1e-9):
        raise LayoutError(f"pitch {pitch / NM:g} nm outside [40, 60] nm")
    return DesignRules(pitch, pitch, CONTACT_PITCH)


@dataclass(frozen=True)
class CellGeometry:
    tracks_x: int
    tracks_y: int

    def __post_init__(self):
        if self.tracks_x < 1 or self.tracks_y < 1:
            raise LayoutError("track counts must be >= 1")


# 10 crosspoint devices on a 4-nanowire x 5-gate grid
NWRAM_GEOMETRY = CellGeometry(4, 5)
# gridded 8T: 8 devices plus read-port isolation on a 6 x 3 grid
SRAM_8T_GEOMETRY = CellGeometry(6, 3)


def cell_area(g: CellGeometry, pitch: float) -> float:
    gridded_rules(pitch)
    return g.tracks_x * g.tracks_y * pitch * pitch


@dataclass(frozen=True)
class ScalingScenario:
    area_factor: float
    rule_factor: float
    ref_area: float
    ref_node: str

    def __post_init__(self):
        if self.area_factor <= 1 or self.rule_factor <= 1:
            raise LayoutError("scaling factors must exceed 1")
        if self.ref_area <= 0:
            raise LayoutError("reference area must be positive")


def scale_area(ref_area: float, factor: float) -> float:
    if ref_area <= 0 or factor <= 0:
        raise LayoutError("area and factor must be positive")
    if factor <= 1:
        raise LayoutError(f"scaling factor must exceed 1, got {factor:g}")
    return ref_area / factor


def scale_rules(ref: DesignRules, rule_factor: float) -> DesignRules:
    if rule_factor <= 0:
        raise LayoutError("rule factor must be positive")
    if rule_factor < 1:
        raise LayoutError(f"rule factor must be >= 1, got {rule_factor:g}")
    return ref.scaled(rule_factor)


# Published 16 nm projections.  Columns are independent scenarios; each
# area column lists three reference cells.
AREA_FACTORS = (2.45, 2.02, 1.75, 1.64)
AREA_16NM_UM2 = (
    (0.028, 0.026, 0.025),
    (0.042, 0.038, 0.037),
    (0.056, 0.051, 0.049),
    (0.064, 0.058, 0.056),
)
RULE_FACTORS = (1.31, 1.42, 1.38, 1.31)
# per column: (m1_half_pitch, np_spacing, via_spacing), three rows each, nm
RULES_16NM_NM = (
    ((32.49, 28.88, 28.88), (43.32, 33.7896, 37.544), (32.49, 28.88, 28.88)),
    ((27.5625, 24.5, 24.5), (36.75, 28.665, 31.85), (27.5625, 24.5, 24.5)),
    ((29.16, 25.92, 25.92), (38.88, 30.3264, 33.696), (29.16, 25.92, 25.92)),
    ((32.49, 28.88, 28.88), (43.32, 33.7896, 37.544), (32.49, 28.88, 28.88)),
)
# the middle row is the representative rule set of each column
REPRESENTATIVE_ROW = 1


def scaling_scenarios() -> list[list[ScalingScenario]]:
    """Per column, one scenario per reference cell (reference = target * factor)."""
    return [
        [ScalingScenario(f, r, a * f * UM2, f"col{c}_row{k}") for k, a in enumerate(col)]
        for c, (f, r, col) in enumerate(zip(AREA_FACTORS, RULE_FACTORS, AREA_16NM_UM2))
    ]


def reference_rules(column: int, row: int = REPRESENTATIVE_ROW) -> DesignRules:
    """Pre-scaling SRAM rule set for one table column."""
    f = RULE_FACTORS[column]
    hp, nps, via = (RULES_16NM_NM[column][i][row] * f * NM for i in range(3))
    pitch = 2 * hp
    return DesignRules(pitch, pitch, CONTACT_PITCH * f, m1_half_pitch=hp,
                       np_spacing=nps, via_spacing=via)


def sram_6t_area_bounds() -> tuple[float, float]:
    areas = [scale_area(s.ref_area, s.area_factor) for col in scaling_scenarios() for s in col]
    return min(areas), max(areas)


def sram_6t_rules(column: int = 1) -> DesignRules:
    return scale_rules(reference_rules(column), RULE_FACTORS[column])


@dataclass(frozen=True)
class WireModel:
    sheet_resistance: float = 1.25      # ohm/sq
    cap_per_length: float = 0.2e-9      # F/m (0.2 fF/um)

    def __post_init__(self):
        if self.sheet_resistance <= 0 or self.cap_per_length <= 0:
            raise LayoutError("wire constants must be positive")


def extract_wire_rc(length: float, width: float, m: WireModel | None = None) -> WireRC:
    m = m or WireModel()
    if length <= 0 or width <= 0:
        raise LayoutError("wire length and width must be positive")
    return WireRC(m.sheet_resistance * length / width, m.cap_per_length * length)


# 6T bitlines cross two M1 tracks vertically
SRAM_6T_BITLINE_TRACKS = 2


def bitline_lengths(kind: CellKind, g: CellGeometry | None = None,
                    rules: DesignRules | None = None) -> float:
    """Per-cell bit-line length.

    NWRAM runs bit_0 horizontally in M2 along the long cell side; SRAM
    bit lines run vertically in M1 across the short side.
    """
    kind = CellKind(kind)
    if kind is CellKind.NWRAM_10T:
        g = g or NWRAM_GEOMETRY
        rules = rules or gridded_rules(PITCH_MIN)
        return max(g.tracks_x, g.tracks_y) * rules.m2_pitch
    if kind.is_8t:
        g = g or SRAM_8T_GEOMETRY
        rules = rules or gridded_rules(PITCH_MIN)
        return min(g.tracks_x, g.tracks_y) * rules.m1_pitch
    rules = rules or sram_6t_rules()
    if rules.m1_half_pitch is None:
        return SRAM_6T_BITLINE_TRACKS * rules.m1_pitch
    return SRAM_6T_BITLINE_TRACKS * 2 * rules.m1_half_pitch


def _geometry(kind: CellKind, geometry: CellGeometry | None) -> CellGeometry:
    if geometry is not None:
        return geometry
    return NWRAM_GEOMETRY if kind is CellKind.NWRAM_10T else SRAM_8T_GEOMETRY


def cell_parasitics(kind: CellKind, pitch: float = PITCH_MIN,
                    wire: WireModel | None = None,
                    geometry: CellGeometry | None = None) -> dict[str, WireRC]:
    """Per-net wire RC of one cell at a gridded pitch bound.

    Data/bit lines use :func:`bitline_lengths`; word/clock lines span the
    orthogonal cell side; storage nets take one local hop of the short side.
    Wires are half a pitch wide.
    """
    kind = CellKind(kind)
    wire = wire or WireModel()
    if kind is CellKind.NWRAM_10T or kind.is_8t:
        g, rules = _geometry(kind, geometry), gridded_rules(pitch)
    else:
        # the 6T cells use the scaled SRAM rules; pitch only selects the column
        rules = sram_6t_rules(1 if pitch <= 0.5 * (PITCH_MIN + PITCH_MAX) else 0)
        hp = rules.m1_half_pitch
        bl = bitline_lengths(kind, rules=rules)
        width = 2 * bl
        rc = lambda L: extract_wire_rc(L, hp, wire)
        return {"bl": rc(bl), "blb": rc(bl), "wl": rc(width), "q": rc(hp * 2), "qb": rc(hp * 2)}
    w = rules.m1_pitch / 2
    rc = lambda L: extract_wire_rc(L, w, wire)
    long_side = max(g.tracks_x, g.tracks_y) * pitch
    short_side = min(g.tracks_x, g.tracks_y) * pitch
    bl = bitline_lengths(kind, g, rules)
    if kind is CellKind.NWRAM_10T:
        par = {"bit_0": rc(bl), "out": rc(short_side), "nout": rc(short_side),
               "read_0": rc(short_side)}
        par.update({f"W_0_{c}": rc(short_side) for c in ("pre_0", "eva_0", "pre_1", "eva_1")})
        return par
    return {"bl": rc(bl), "blb": rc(bl), "rbl": rc(bl), "wl": rc(long_side),
            "rwl": rc(long_side), "q": rc(pitch), "qb": rc(pitch)}


def cell_area_bounds(kind: CellKind, geometry: CellGeometry | None = None) -> tuple[float, float]:
    """(lower, upper) area: pitch bounds for gridded cells, table extremes for 6T."""
    kind = CellKind(kind)
    if kind is CellKind.NWRAM_10T or kind.is_8t:
        g = _geometry(kind, geometry)
        return cell_area(g, PITCH_MIN), cell_area(g, PITCH_MAX)
    return sram_6t_area_bounds()
