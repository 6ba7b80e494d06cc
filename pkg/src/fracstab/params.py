"""Parameter containers for the two-term fractional difference system."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError, SingularParameterError


@dataclass(frozen=True)
class OrderPair:
    """Fractional orders with ``0 < beta < alpha <= 1``."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = self.alpha, self.beta
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ParameterError("orders must be finite")
        if not 0.0 < b < a <= 1.0:
            raise ParameterError(f"orders must satisfy 0 < beta < alpha <= 1, got ({a}, {b})")

    def __iter__(self):
        yield self.alpha
        yield self.beta


def as_orders(orders) -> OrderPair:
    if isinstance(orders, OrderPair):
        return orders
    alpha, beta = orders
    return OrderPair(float(alpha), float(beta))


def check_coefficient(a: float) -> float:
    a = float(a)
    if not math.isfinite(a):
        raise ParameterError(f"coefficient a must be finite, got {a!r}")
    if a == -1.0:
        raise SingularParameterError("a = -1 makes the leading coefficient a + 1 vanish")
    return a


@dataclass(frozen=True)
class SystemParams:
    """Orders, the coefficient ``a`` of the beta-term, multiplier ``b`` in ``f(x) = b x``, and ``x(0)``."""

    orders: OrderPair
    a: float
    b: complex
    x0: complex = 0.1

    def __post_init__(self):
        object.__setattr__(self, "orders", as_orders(self.orders))
        object.__setattr__(self, "a", check_coefficient(self.a))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "x0", complex(self.x0))

    @property
    def alpha(self) -> float:
        return self.orders.alpha

    @property
    def beta(self) -> float:
        return self.orders.beta

    def f(self, x):
        return self.b * x
