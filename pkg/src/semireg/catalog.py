"""Built-in metrics and the MetricSpec container shared with config files."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fields import Chart, MetricField, VectorField


@dataclass(frozen=True)
class MetricSpec:
    """A named metric on one chart, with sample points and optional metadata.

    ``entries`` maps upper-triangle index pairs to expression text; omitted
    entries are zero.  ``box`` holds per-coordinate ``(lo, hi)`` bounds used
    for random sampling, ``frame`` optional orthonormal frame fields as text.
    """

    name: str
    coords: tuple[str, ...]
    entries: dict
    points: tuple[tuple[float, ...], ...] = ()
    locus_hint: str = ""
    expect: str = ""
    box: tuple[tuple[float, float], ...] = ()
    frame: tuple[tuple[str, ...], ...] = ()
    chart: Chart = field(init=False, repr=False, compare=False)
    metric: MetricField = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        chart = Chart(tuple(self.coords))
        object.__setattr__(self, "coords", chart.coords)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "metric", MetricField.from_entries(chart, self.entries))
        object.__setattr__(self, "points", tuple(chart.check_point(p) for p in self.points))
        if self.box and len(self.box) != chart.dim:
            raise ValueError(f"box has {len(self.box)} ranges, chart dimension is {chart.dim}")
        for fr in self.frame:
            if len(fr) != chart.dim:
                raise ValueError("frame field has the wrong number of components")
        if self.frame and len(self.frame) != chart.dim:
            raise ValueError(f"frame needs {chart.dim} fields, got {len(self.frame)}")

    @property
    def dim(self) -> int:
        return self.chart.dim

    def frame_fields(self) -> list[VectorField] | None:
        if not self.frame:
            return None
        return [VectorField.from_text(self.chart, f) for f in self.frame]

    def random_points(self, count: int, seed: int) -> list[tuple[float, ...]]:
        box = self.box or tuple((-1.0, 1.0) for _ in range(self.dim))
        rng = np.random.default_rng(seed)
        return [tuple(float(rng.uniform(lo, hi)) for lo, hi in box) for _ in range(count)]

    def canonical_text(self) -> str:
        """This metric in config-file syntax, entries in a fixed order."""
        lines = [f"name = {self.name}", f"dim = {self.dim}", "coords = " + ", ".join(self.coords)]
        for (i, j) in sorted(self.entries):
            lines.append(f"g[{i}][{j}] = {self.entries[(i, j)]}")
        for p in self.points:
            lines.append("point = " + ", ".join(repr(x) for x in p))
        for k, (lo, hi) in enumerate(self.box):
            lines.append(f"box[{k}] = {lo!r}, {hi!r}")
        for fr in self.frame:
            lines.append("frame = " + ", ".join(fr))
        if self.locus_hint:
            lines.append(f"locus_hint = {self.locus_hint}")
        if self.expect:
            lines.append(f"expect = {self.expect}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()[:16]


_NAMES = {2: ("x", "y"), 3: ("x", "y", "z"), 4: ("x", "y", "z", "w")}
_SPACETIME = {2: ("t", "x"), 3: ("t", "x", "y"), 4: ("t", "x", "y", "z")}


def _unit_frame(n: int) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple("1" if k == a else "0" for k in range(n)) for a in range(n))


def _diag(values: Sequence[str]) -> dict:
    return {(i, i): v for i, v in enumerate(values) if v != "0"}


def euclidean(n: int) -> MetricSpec:
    coords = _NAMES[n]
    pts = [tuple(0.5 * (k + 1) * (-1) ** i for i in range(n)) for k in range(3)]
    return MetricSpec(
        name=f"euclidean{n}",
        coords=coords,
        entries=_diag(["1"] * n),
        points=tuple(pts),
        expect="non-degenerate",
        box=tuple((-2.0, 2.0) for _ in range(n)),
        frame=_unit_frame(n),
    )


def minkowski(n: int) -> MetricSpec:
    coords = _SPACETIME[n]
    pts = [tuple(0.5 * (k + 1) * (-1) ** i for i in range(n)) for k in range(3)]
    return MetricSpec(
        name=f"minkowski{n}",
        coords=coords,
        entries=_diag(["-1"] + ["1"] * (n - 1)),
        points=tuple(pts),
        expect="non-degenerate",
        box=tuple((-2.0, 2.0) for _ in range(n)),
        frame=_unit_frame(n),
    )


def degenerate_const(p: int, q: int, r: int) -> MetricSpec:
    """diag(+1 (p times), -1 (q times), 0 (r times))."""
    n = p + q + r
    coords = _NAMES[n] if n in _NAMES else tuple(f"x{k}" for k in range(n))
    suffix = "" if (p, q, r) == (2, 0, 1) else f"_{p}_{q}_{r}"
    expect = "non-degenerate" if r == 0 else "radical-stationary"
    return MetricSpec(
        name=f"degenerate_const{suffix}",
        coords=coords,
        entries=_diag(["1"] * p + ["-1"] * q + ["0"] * r),
        points=(tuple(0.0 for _ in range(n)), tuple(0.5 for _ in range(n)), tuple(-1.0 for _ in range(n))),
        expect=expect,
        box=tuple((-2.0, 2.0) for _ in range(n)),
    )


def catalog() -> list[MetricSpec]:
    out = [euclidean(n) for n in (2, 3, 4)]
    out += [minkowski(n) for n in (2, 3, 4)]
    out.append(MetricSpec(
        name="sphere2",
        coords=("theta", "phi"),
        entries={(0, 0): "1", (1, 1): "sin(theta)^2"},
        points=((0.5235987755982988, 0.0), (0.7853981633974483, 0.5), (1.0471975511965976, 1.0), (2.0, -1.0)),
        expect="non-degenerate",
        box=((0.3, 2.8), (-3.0, 3.0)),
        frame=(("1", "0"), ("0", "1/sin(theta)")),
    ))
    out.append(MetricSpec(
        name="polar2",
        coords=("u", "v"),
        entries={(0, 0): "1", (1, 1): "u^2"},
        points=((-1.0, 0.5), (-0.5, 0.5), (0.0, 0.5), (0.5, 0.5), (1.0, 0.5), (2.0, 0.5)),
        locus_hint="u = 0",
        expect="radical-stationary",
        box=((0.2, 2.0), (-2.0, 2.0)),
        frame=(("1", "0"), ("0", "1/u")),
    ))
    out.append(MetricSpec(
        name="lightcone2",
        coords=("u", "v"),
        entries={(0, 0): "1", (1, 1): "u"},
        points=((0.0, 0.5), (0.5, 0.5), (1.0, 0.5)),
        locus_hint="u = 0",
        expect="not-radical-stationary",
        box=((0.2, 2.0), (-2.0, 2.0)),
        frame=(("1", "0"), ("0", "1/sqrt(u)")),
    ))
    out.append(degenerate_const(2, 0, 1))
    out.append(degenerate_const(1, 1, 1))
    out.append(MetricSpec(
        name="friedmann_like",
        coords=("t", "x", "y"),
        entries={(0, 0): "-1", (1, 1): "t^2", (2, 2): "t^2"},
        points=((0.0, 0.1, 0.2), (0.5, 0.1, 0.2), (1.0, -0.3, 0.4)),
        locus_hint="t = 0",
        expect="radical-stationary",
        box=((0.2, 2.0), (-2.0, 2.0), (-2.0, 2.0)),
        frame=(("1", "0", "0"), ("0", "1/t", "0"), ("0", "0", "1/t")),
    ))
    return out


def catalog_entry(name: str) -> MetricSpec:
    for spec in catalog():
        if spec.name == name:
            return spec
    raise KeyError(name)
