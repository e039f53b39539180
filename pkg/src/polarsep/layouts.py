"""Sensor layouts for polarized colour filter arrays.

A layout describes a 4x4 repeating tile: a 2x2 grid of micro-polarizer
angles, repeated inside each 2x2 block, and a 2x2 Bayer grid applied at
block granularity (every 2x2 polarizer block shares one colour filter).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownLayoutError

ANGLES = (0, 45, 90, 135)
COLOR_INDEX = {"R": 0, "G": 1, "B": 2}


@dataclass(frozen=True)
class MosaicLayout:
    angle_pattern: tuple[tuple[int, int], tuple[int, int]] = ((90, 45), (135, 0))
    bayer_pattern: tuple[tuple[str, str], tuple[str, str]] = (("R", "G"), ("G", "B"))

    def __post_init__(self):
        angles = sorted(a for row in self.angle_pattern for a in row)
        if angles != list(ANGLES) or any(len(r) != 2 for r in self.angle_pattern):
            raise ValueError(f"angle_pattern must be a 2x2 permutation of {ANGLES}")
        colors = [c for row in self.bayer_pattern for c in row]
        if len(colors) != 4 or sorted(colors) != ["B", "G", "G", "R"]:
            raise ValueError("bayer_pattern must hold one R, one B and two G")

    def angle_site(self, angle: int) -> tuple[int, int]:
        """Row/column offset of ``angle`` inside a 2x2 polarizer block."""
        for r, row in enumerate(self.angle_pattern):
            for c, a in enumerate(row):
                if a == angle:
                    return r, c
        raise ValueError(f"angle {angle} not in layout")

    def color_sites(self) -> dict[int, list[tuple[int, int]]]:
        """Map channel index (0=R, 1=G, 2=B) to its (row, col) Bayer offsets."""
        sites: dict[int, list[tuple[int, int]]] = {0: [], 1: [], 2: []}
        for r, row in enumerate(self.bayer_pattern):
            for c, label in enumerate(row):
                sites[COLOR_INDEX[label]].append((r, c))
        return sites


LAYOUTS: dict[int, MosaicLayout] = {
    0: MosaicLayout(),
    1: MosaicLayout(bayer_pattern=(("B", "G"), ("G", "R"))),
    2: MosaicLayout(angle_pattern=((0, 45), (135, 90))),
    3: MosaicLayout(bayer_pattern=(("G", "R"), ("B", "G"))),
}
DEFAULT_LAYOUT_ID = 0


def get_layout(layout_id: int) -> MosaicLayout:
    try:
        return LAYOUTS[int(layout_id)]
    except KeyError:
        raise UnknownLayoutError(
            f"unknown layout_id {layout_id}; known ids: {sorted(LAYOUTS)}"
        ) from None
