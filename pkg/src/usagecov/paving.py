"""Set-based paving of the feasible region of a design-attribute box.

Boxes are proven feasible (inner), proven infeasible (excluded) or bisected
until their width falls below the tolerance (boundary). Widths are measured
relative to the input box, so the tolerance is dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coverage import effective_wtp
from .model import AttributeBox, Interval, ModelError, ModelSpec, interval_performance


@dataclass(frozen=True)
class Paving:
    scenario_id: str
    user_id: str
    box: AttributeBox
    price: float
    tolerance: float
    inner_boxes: tuple[AttributeBox, ...]
    boundary_boxes: tuple[AttributeBox, ...]
    inner_fraction: float
    boundary_fraction: float
    excluded_fraction: float
    price_ok: bool

    def relative_width(self, box: AttributeBox) -> float:
        return max((_rel_widths(box, self.box).values()), default=0.0)


def _rel_widths(box: AttributeBox, root: AttributeBox) -> dict[str, float]:
    out = {}
    for name in sorted(root.bounds):
        full = root.bounds[name].width
        out[name] = box.bounds[name].width / full if full > 0 else 0.0
    return out


def _volume(box: AttributeBox, root: AttributeBox) -> float:
    vol = 1.0
    for name, iv in root.bounds.items():
        if iv.width > 0:
            vol *= box.bounds[name].width / iv.width
    return vol


def _bisect(box: AttributeBox, name: str) -> tuple[AttributeBox, AttributeBox] | None:
    iv = box.bounds[name]
    mid = iv.lo + (iv.hi - iv.lo) / 2
    if not iv.lo < mid < iv.hi:
        return None
    lower = dict(box.bounds)
    upper = dict(box.bounds)
    lower[name] = Interval(iv.lo, mid)
    upper[name] = Interval(mid, iv.hi)
    return AttributeBox(lower), AttributeBox(upper)


def pave_feasible(spec: ModelSpec, scenario_id: str, user_id: str, box: AttributeBox,
                  tolerance: float, price: float) -> Paving:
    """Branch-and-prune paving of the attribute values that make a scenario feasible.

    Bisection is depth-first on the widest relative attribute, ties broken by
    attribute name; lower halves are visited first, which fixes box order.
    """
    if not (math.isfinite(tolerance) and tolerance > 0):
        raise ModelError(f"tolerance must be > 0, got {tolerance}")
    scenario = spec.scenario(scenario_id)
    user = spec.user(user_id)
    context = spec.context(scenario.context_id)
    required = scenario.required_performance
    dims = sorted(required)
    # validates the box against the model attributes
    interval_performance(spec, box, user, context, dims)

    if price > effective_wtp(scenario, user):
        return Paving(scenario_id, user_id, box, price, tolerance, (), (), 0.0, 0.0, 1.0, False)

    inner, boundary = [], []
    inner_vol, boundary_vol, excluded_vol = [], [], []
    stack = [box]
    while stack:
        b = stack.pop()
        perf = interval_performance(spec, b, user, context, dims)
        if all(perf[d].lo >= required[d] for d in dims):
            inner.append(b)
            inner_vol.append(_volume(b, box))
            continue
        if any(perf[d].hi < required[d] for d in dims):
            excluded_vol.append(_volume(b, box))
            continue
        widths = _rel_widths(b, box)
        name = max(widths, key=lambda k: widths[k])  # first maximal in name order
        halves = _bisect(b, name) if widths[name] > tolerance else None
        if halves is None:
            boundary.append(b)
            boundary_vol.append(_volume(b, box))
            continue
        stack.append(halves[1])
        stack.append(halves[0])

    return Paving(scenario_id, user_id, box, price, tolerance, tuple(inner), tuple(boundary),
                  math.fsum(inner_vol), math.fsum(boundary_vol), math.fsum(excluded_vol), True)


INNER, BOUNDARY, EXCLUDED = 1, 2, 0


def _inside_any(boxes, names, pts: np.ndarray, chunk: int = 512) -> np.ndarray:
    hit = np.zeros(len(pts), dtype=bool)
    if not boxes:
        return hit
    lo = np.array([[b.bounds[k].lo for k in names] for b in boxes])
    hi = np.array([[b.bounds[k].hi for k in names] for b in boxes])
    for i in range(0, len(pts), chunk):
        x = pts[i:i + chunk, None, :]
        hit[i:i + chunk] = ((lo <= x) & (x <= hi)).all(axis=2).any(axis=1)
    return hit


def locate(paving: Paving, points: np.ndarray) -> np.ndarray:
    """Cell of each point (columns in attribute-name order): INNER, BOUNDARY or EXCLUDED."""
    names = sorted(paving.box.bounds)
    pts = np.asarray(points, dtype=float).reshape(-1, len(names))
    out = np.full(len(pts), EXCLUDED)
    out[_inside_any(paving.boundary_boxes, names, pts)] = BOUNDARY
    # shared faces count as inner
    out[_inside_any(paving.inner_boxes, names, pts)] = INNER
    return out
