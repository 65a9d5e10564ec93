"""Feature grammar for candidate right-hand sides F(G).

A feature is one of the coordinates t, x, the solution u itself, or a
partial derivative of u written with subscripts, e.g. u_x, u_xx, u_t, u_tx.
Total derivative order is capped at 2.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_TOTAL_ORDER = 2


class FeatureParseError(ValueError):
    """Unparseable or out-of-range feature name."""


@dataclass(frozen=True)
class Feature:
    """One column of the feature map: u-derivative or a coordinate."""

    kind: str  # "u", "t" or "x"
    order_t: int = 0
    order_x: int = 0

    def __post_init__(self):
        if self.kind not in ("u", "t", "x"):
            raise FeatureParseError(f"unknown feature kind {self.kind!r}")
        if self.kind != "u" and (self.order_t or self.order_x):
            raise FeatureParseError("coordinate features carry no derivative orders")
        if self.order_t < 0 or self.order_x < 0:
            raise FeatureParseError("negative derivative order")

    @property
    def name(self) -> str:
        if self.kind != "u":
            return self.kind
        if self.order_t == 0 and self.order_x == 0:
            return "u"
        return "u_" + "t" * self.order_t + "x" * self.order_x

    @property
    def is_derivative(self) -> bool:
        return self.kind == "u" and (self.order_t + self.order_x) > 0


def parse_feature(name: str) -> Feature:
    """Parse one token of the grammar: u | t | x | u_<t's><x's>."""
    name = name.strip()
    if name in ("t", "x"):
        return Feature(kind=name)
    if name == "u":
        return Feature(kind="u")
    if name.startswith("u_"):
        sub = name[2:]
        if sub and set(sub) <= {"t", "x"}:
            # canonical spelling puts t's before x's
            if sub != "t" * sub.count("t") + "x" * sub.count("x"):
                raise FeatureParseError(f"subscripts must be ordered t before x: {name!r}")
            if len(sub) > MAX_TOTAL_ORDER:
                raise FeatureParseError(
                    f"total derivative order {len(sub)} exceeds {MAX_TOTAL_ORDER}: {name!r}"
                )
            return Feature(kind="u", order_t=sub.count("t"), order_x=sub.count("x"))
    raise FeatureParseError(f"cannot parse feature {name!r}")


@dataclass(frozen=True)
class FeatureSpec:
    """Ordered, duplicate-free tuple of features defining the map G."""

    features: tuple[Feature, ...]

    def __post_init__(self):
        if not self.features:
            raise FeatureParseError("feature spec must be nonempty")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise FeatureParseError(f"duplicate features in {names}")
        for f in self.features:
            if f.order_t + f.order_x > MAX_TOTAL_ORDER:
                raise FeatureParseError(
                    f"feature {f.name} exceeds total derivative order {MAX_TOTAL_ORDER}"
                )

    @classmethod
    def from_names(cls, names) -> "FeatureSpec":
        return cls(tuple(parse_feature(n) for n in names))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)


# the feature set used throughout the experiments: G = (u, u_x)
DEFAULT_FEATURES = FeatureSpec.from_names(("u", "u_x"))
