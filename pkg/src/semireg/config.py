"""Reader for the flat ``key = value`` metric spec format.

::

    name = polar2
    dim = 2
    coords = u, v
    g[0][0] = 1
    g[1][1] = u^2
    point = 2.0, 0.5
    locus_hint = u = 0      # optional
    expect = radical-stationary
    box[0] = 0.2, 2.0       # optional sampling range per coordinate
    frame = 1, 0            # optional, one line per frame field

Everything after ``#`` is a comment.  Omitted metric entries are zero; only
the upper triangle (``i <= j``) may be given.
"""

from __future__ import annotations

import re
from pathlib import Path

from .catalog import MetricSpec
from .expr import ParseError, check_coordinate_names, parse
from .koszul import VERDICTS

_G_KEY = re.compile(r"^g\[(\d+)\]\[(\d+)\]$")
_BOX_KEY = re.compile(r"^box\[(\d+)\]$")
_SINGLE = ("name", "dim", "coords", "locus_hint", "expect")


class SpecFormatError(ValueError):
    """A malformed spec file; ``line`` is 1-based, 0 when not tied to a line."""

    def __init__(self, message: str, line: int = 0, source: str = "<spec>"):
        self.message = message
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)


def _floats(text: str, lineno: int, source: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise SpecFormatError(f"{what} must be comma-separated numbers, got {text!r}", lineno, source) from None


def parse_spec(text: str, source: str = "<spec>") -> MetricSpec:
    single: dict[str, tuple[str, int]] = {}
    entries: dict[tuple[int, int], tuple[str, int]] = {}
    boxes: dict[int, tuple[tuple[float, float], int]] = {}
    points: list[tuple[str, int]] = []
    frame: list[tuple[str, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecFormatError(f"expected 'key = value', got {line!r}", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise SpecFormatError(f"empty value for {key!r}", lineno, source)
        if key in _SINGLE:
            if key in single:
                raise SpecFormatError(f"duplicate key {key!r} (first on line {single[key][1]})", lineno, source)
            single[key] = (value, lineno)
        elif key == "point":
            points.append((value, lineno))
        elif key == "frame":
            frame.append((value, lineno))
        elif m := _G_KEY.match(key):
            i, j = int(m.group(1)), int(m.group(2))
            if i > j:
                raise SpecFormatError(f"only upper-triangle entries are accepted, got g[{i}][{j}]", lineno, source)
            if (i, j) in entries:
                raise SpecFormatError(f"duplicate entry g[{i}][{j}]", lineno, source)
            entries[(i, j)] = (value, lineno)
        elif m := _BOX_KEY.match(key):
            k = int(m.group(1))
            lo_hi = _floats(value, lineno, source, "box")
            if len(lo_hi) != 2 or not lo_hi[0] < lo_hi[1]:
                raise SpecFormatError("box needs 'lo, hi' with lo < hi", lineno, source)
            boxes[k] = ((lo_hi[0], lo_hi[1]), lineno)
        else:
            raise SpecFormatError(f"unknown key {key!r}", lineno, source)

    if "coords" not in single:
        raise SpecFormatError("missing 'coords'", 0, source)
    ctext, cline = single["coords"]
    coords = tuple(c.strip() for c in ctext.split(","))
    try:
        check_coordinate_names(coords)
    except ValueError as exc:
        raise SpecFormatError(str(exc), cline, source) from None
    n = len(coords)
    if "dim" in single:
        dtext, dline = single["dim"]
        try:
            dim = int(dtext)
        except ValueError:
            raise SpecFormatError(f"dim must be an integer, got {dtext!r}", dline, source) from None
        if dim != n:
            raise SpecFormatError(f"dim = {dim} but {n} coordinate names were given", dline, source)
    if not 1 <= n <= 8:
        raise SpecFormatError(f"dimension must be in 1..8, got {n}", cline, source)

    for (i, j), (value, lineno) in entries.items():
        if j >= n:
            raise SpecFormatError(f"g[{i}][{j}] is out of range for dimension {n}", lineno, source)
        try:
            parse(value, coords)
        except ParseError as exc:
            raise SpecFormatError(f"in g[{i}][{j}]: {exc}", lineno, source) from None

    pts = []
    for value, lineno in points:
        p = _floats(value, lineno, source, "point")
        if len(p) != n:
            raise SpecFormatError(f"point has {len(p)} coordinates, expected {n}", lineno, source)
        pts.append(p)

    box = ()
    if boxes:
        for k, (_, lineno) in boxes.items():
            if k >= n:
                raise SpecFormatError(f"box[{k}] is out of range for dimension {n}", lineno, source)
        if len(boxes) != n:
            raise SpecFormatError(f"box must be given for all {n} coordinates", max(l for _, l in boxes.values()), source)
        box = tuple(boxes[k][0] for k in range(n))

    fr = []
    for value, lineno in frame:
        comps = tuple(c.strip() for c in value.split(","))
        if len(comps) != n:
            raise SpecFormatError(f"frame field has {len(comps)} components, expected {n}", lineno, source)
        for c in comps:
            try:
                parse(c, coords)
            except ParseError as exc:
                raise SpecFormatError(f"in frame: {exc}", lineno, source) from None
        fr.append(comps)
    if fr and len(fr) != n:
        raise SpecFormatError(f"frame needs {n} fields, got {len(fr)}", frame[-1][1], source)

    expect = ""
    if "expect" in single:
        expect, eline = single["expect"]
        if expect not in VERDICTS:
            raise SpecFormatError(f"expect must be one of {', '.join(VERDICTS)}, got {expect!r}", eline, source)

    name = single.get("name", (Path(source).stem, 0))[0]
    return MetricSpec(
        name=name,
        coords=coords,
        entries={k: v for k, (v, _) in entries.items()},
        points=tuple(pts),
        locus_hint=single.get("locus_hint", ("", 0))[0],
        expect=expect,
        box=box,
        frame=tuple(fr),
    )


def load_spec(path: str | Path) -> MetricSpec:
    """Read a spec file; raises ``OSError`` or ``SpecFormatError``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_spec(text, str(path))
