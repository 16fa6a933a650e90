"""
Series - Truncated power series with exact rational coefficients
Reproduces the small-x expansions of P_n by running the recurrence on series.
"""

import math
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence, Union

from scipy.optimize import brentq, minimize_scalar

from pycascade.core.errors import ContractViolation, NoCrossingError

Number = Union[int, Fraction]


class SeriesPoly:
    """c_0 + c_1 x + ... + c_K x^K, all c_k exact rationals"""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Number]):
        if len(coeffs) == 0:
            raise ValueError("SeriesPoly needs at least the constant coefficient")
        for c in coeffs:
            if isinstance(c, float):
                raise TypeError("SeriesPoly coefficients must be exact (int or Fraction)")
        self.coeffs = tuple(Fraction(c) for c in coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def zero(cls, order: int) -> "SeriesPoly":
        return cls([0] * (order + 1))

    @classmethod
    def monomial(cls, k: int, order: int, coeff: Number = 1) -> "SeriesPoly":
        coeffs = [Fraction(0)] * (order + 1)
        if k <= order:
            coeffs[k] = Fraction(coeff)
        return cls(coeffs)

    @classmethod
    def exp_neg_x(cls, order: int) -> "SeriesPoly":
        """Expansion of P_0(x) = exp(-x)"""
        return cls([Fraction((-1) ** k, math.factorial(k)) for k in range(order + 1)])

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k <= self.order else Fraction(0)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, SeriesPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        terms = [f"{c}*x^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"SeriesPoly({' + '.join(terms) or '0'}; order {self.order})"

    def truncate(self, order: int) -> "SeriesPoly":
        coeffs = list(self.coeffs[:order + 1])
        coeffs += [Fraction(0)] * (order + 1 - len(coeffs))
        return SeriesPoly(coeffs)

    def _common(self, other: "SeriesPoly") -> int:
        return min(self.order, other.order)

    def __add__(self, other: "SeriesPoly") -> "SeriesPoly":
        order = self._common(other)
        return SeriesPoly([self[k] + other[k] for k in range(order + 1)])

    def __neg__(self) -> "SeriesPoly":
        return SeriesPoly([-c for c in self.coeffs])

    def __sub__(self, other: "SeriesPoly") -> "SeriesPoly":
        return self + (-other)

    def __mul__(self, other: "SeriesPoly") -> "SeriesPoly":
        """Cauchy product truncated at the smaller order"""
        order = self._common(other)
        return SeriesPoly([
            sum((self[j] * other[k - j] for j in range(k + 1)), Fraction(0))
            for k in range(order + 1)
        ])

    def evaluate(self, x: Union[float, Fraction]) -> Union[float, Fraction]:
        """Horner evaluation; exact when x is a Fraction"""
        if isinstance(x, Fraction):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def to_json(self) -> List[Dict[str, str]]:
        """Coefficients as decimal strings of arbitrary length"""
        return [
            {"k": str(k), "numerator": str(c.numerator), "denominator": str(c.denominator)}
            for k, c in enumerate(self.coeffs)
        ]

    @classmethod
    def from_json(cls, items: Iterable[Dict[str, str]]) -> "SeriesPoly":
        ordered = sorted(items, key=lambda item: int(item["k"]))
        return cls([Fraction(int(i["numerator"]), int(i["denominator"])) for i in ordered])


def series_integrate(p: SeriesPoly) -> SeriesPoly:
    """int_0^x p: c_k moves to degree k+1 as c_k/(k+1); order grows by one"""
    return SeriesPoly([Fraction(0)] + [c / (k + 1) for k, c in enumerate(p.coeffs)])


def series_exp(g: SeriesPoly) -> SeriesPoly:
    """Formal exp(g) for g(0) = 0, via k E_k = sum_{j=1..k} j g_j E_{k-j}"""
    if g[0] != 0:
        raise ContractViolation(f"series_exp needs a zero constant term, got {g[0]}")
    e = [Fraction(1)]
    for k in range(1, g.order + 1):
        acc = sum((j * g[j] * e[k - j] for j in range(1, k + 1)), Fraction(0))
        e.append(acc / k)
    return SeriesPoly(e)


def recurrence_series_step(p_prev: SeriesPoly) -> SeriesPoly:
    """Expansion of P_n from the expansion of P_{n-1}, same order"""
    if p_prev[0] != 1:
        raise ContractViolation(f"Expected constant term 1, got {p_prev[0]}")
    order = p_prev.order
    exponent = series_integrate(p_prev).truncate(order) - SeriesPoly.monomial(1, order)
    return series_exp(exponent)


def series_profile(n: int, order: int = None) -> SeriesPoly:
    """Expansion of P_n, default order n + 6"""
    if n < 0:
        raise ValueError("n must be >= 0")
    order = n + 6 if order is None else order
    p = SeriesPoly.exp_neg_x(order)
    for _ in range(n):
        p = recurrence_series_step(p)
    return p


def front_estimate_from_series(n: int) -> float:
    """Solve x^{n+1} = (n+1)!/2 with an exact factorial and one root extraction"""
    if n < 0:
        raise ValueError("n must be >= 0")
    # math.log is exact-input for big ints; (n+1)! overflows float for n >= 170
    return math.exp((math.log(math.factorial(n + 1)) - math.log(2)) / (n + 1))


def front_estimate_four_term(n: int) -> float:
    """Solve (x^{n+1}/(n+1)!)[1 - x/(n+2) - 2x^2/((n+2)(n+3))] = 1/2"""
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = n + 2, (n + 2) * (n + 3)
    # positive root of the bracket
    x_bracket = (-1.0 / a + math.sqrt(1.0 / a ** 2 + 8.0 / b)) / (4.0 / b)
    log_fact = math.lgamma(n + 2)

    def g(x: float) -> float:
        bracket = 1.0 - x / a - 2.0 * x * x / b
        if bracket <= 0:
            return -math.inf
        return (n + 1) * math.log(x) - log_fact + math.log(bracket) + math.log(2.0)

    x_two = front_estimate_from_series(n)
    if x_two >= x_bracket:
        raise NoCrossingError(f"Four-term truncation is negative at the two-term front for n={n}")
    peak = minimize_scalar(lambda x: -g(x), bounds=(x_two, x_bracket), method="bounded",
                           options={"xatol": 1e-12})
    if -peak.fun < 0:
        raise NoCrossingError(f"Four-term truncation never reaches 1/2 for n={n}")
    return float(brentq(g, x_two, peak.x, xtol=1e-14))
