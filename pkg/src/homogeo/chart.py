"""Coordinate charts and smooth maps between them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from . import expr as ex
from . import parser

__all__ = ["Chart", "SmoothMap", "ChartError"]

_RESERVED = {"r", "s"} | set(parser.FUNCTIONS)


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    name: str
    coords: Tuple[str, ...]
    constraints: Tuple[ex.Constraint, ...] = ()

    def __post_init__(self):
        if len(set(self.coords)) != len(self.coords):
            raise ChartError(f"chart {self.name!r} has duplicate coordinates")
        bad = set(self.coords) & _RESERVED
        if bad:
            raise ChartError(f"coordinate names {sorted(bad)} are reserved")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def var(self, name: str) -> ex.Expr:
        if name not in self.coords:
            raise ChartError(f"{name!r} is not a coordinate of chart {self.name!r}")
        return ex.var(name)

    def vars(self):
        return tuple(ex.var(c) for c in self.coords)

    def index(self, name: str) -> int:
        return self.coords.index(name)

    def parse(self, text: str) -> ex.Expr:
        return parser.parse(text, chart=self)

    def owns(self, e: ex.Expr) -> bool:
        return e.free <= (set(self.coords) | {"r", "s"})

    def check_owns(self, e: ex.Expr):
        if not self.owns(e):
            stray = sorted(e.free - set(self.coords) - {"r", "s"})
            raise ChartError(
                f"expression uses {stray} which are not coordinates of {self.name!r}")


def _as_expr(chart: Chart, x) -> ex.Expr:
    if isinstance(x, str):
        return chart.parse(x)
    e = ex._coerce(x)
    chart.check_owns(e)
    return e


@dataclass(frozen=True)
class SmoothMap:
    """Map source -> target given by one expression per target coordinate.

    The component expressions may additionally contain the formal action
    parameters r, s (used by the scaling maps).  For pushforwards an
    explicit inverse is required: `inverse_comps` are expressions in the
    target coordinates describing the map target -> source.
    """

    source: Chart
    target: Chart
    comps: Tuple[ex.Expr, ...]
    inverse_comps: Optional[Tuple[ex.Expr, ...]] = None

    def __post_init__(self):
        if len(self.comps) != self.target.dim:
            raise ChartError("component count must match target dimension")
        for c in self.comps:
            self.source.check_owns(c)
        if self.inverse_comps is not None:
            if len(self.inverse_comps) != self.source.dim:
                raise ChartError("inverse component count must match source dimension")
            for c in self.inverse_comps:
                self.target.check_owns(c)

    @property
    def inverse(self) -> "SmoothMap":
        if self.inverse_comps is None:
            raise ChartError("map has no declared inverse")
        return SmoothMap(self.target, self.source, self.inverse_comps, self.comps)

    def pull_function(self, f: ex.Expr) -> ex.Expr:
        """f on the target composed with the map: an expression on the source."""
        self.target.check_owns(f)
        return ex.subs(f, dict(zip(self.target.coords, self.comps)))

    def jacobian(self):
        """d(comp_i)/d(source_j) as a nested tuple [i][j]."""
        cons = self.source.constraints
        return tuple(tuple(ex.diff(c, v, cons) for v in self.source.coords)
                     for c in self.comps)

    def then(self, other: "SmoothMap") -> "SmoothMap":
        if other.source is not self.target and other.source != self.target:
            raise ChartError("maps do not compose")
        comps = tuple(ex.subs(c, dict(zip(self.target.coords, self.comps)))
                      for c in other.comps)
        inv = None
        if self.inverse_comps is not None and other.inverse_comps is not None:
            inv = tuple(ex.subs(c, dict(zip(other.source.coords, other.inverse_comps)))
                        for c in self.inverse_comps)
        return SmoothMap(self.source, other.target, comps, inv)
