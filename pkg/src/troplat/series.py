"""Exact truncated Laurent series over a pluggable exact coefficient field.

A series stores its coefficients on a window [lead, lead+len).  Exponents in
[lead+len, horizon) are known to be zero; exponents >= horizon are unknown.
Series marked ``poly`` are Laurent polynomials: every coefficient outside the
stored window is exactly zero, so their valuation is always certain.  The
distinction is what makes valuation answers sound under truncation: a window
of zeros on a non-poly series has no certain valuation and raises
IndeterminateValuation, which signals the caller to escalate precision.
"""

from __future__ import annotations

import math
import re
from contextlib import contextmanager
from fractions import Fraction

from .errors import IndeterminateValuation, ParseError, PrecisionExhausted

INF = math.inf

#: 2**61 - 1, a Mersenne prime.  Large enough that a random cancellation in
#: any desk-scale determinant has negligible probability.
DEFAULT_PRIME = (1 << 61) - 1

DEFAULT_WINDOW = 64
MAX_WINDOW = 4096


def _is_prime(n: int) -> bool:
    # deterministic Miller-Rabin, valid far beyond 64 bits
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldConfig:
    """Exact coefficient field: a large prime field or the rationals.

    Elements of a prime field are ints in [0, p); rational elements are
    ``fractions.Fraction`` values.  All operations are exact.
    """

    __slots__ = ("kind", "p")

    def __init__(self, kind: str = "prime", p: int | None = DEFAULT_PRIME):
        if kind not in ("prime", "rationals"):
            raise ValueError(f"unknown field kind {kind!r}")
        if kind == "prime":
            if p is None or not _is_prime(p):
                raise ValueError(f"{p} is not prime")
        else:
            p = None
        self.kind = kind
        self.p = p

    @classmethod
    def prime(cls, p: int = DEFAULT_PRIME) -> "FieldConfig":
        return cls("prime", p)

    @classmethod
    def rationals(cls) -> "FieldConfig":
        return cls("rationals")

    @property
    def ordered(self) -> bool:
        return self.kind == "rationals"

    def __eq__(self, other):
        return (
            isinstance(other, FieldConfig)
            and self.kind == other.kind
            and self.p == other.p
        )

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "Q" if self.kind == "rationals" else f"F_{self.p}"

    # -- element operations ------------------------------------------------

    def zero(self):
        return 0 if self.kind == "prime" else Fraction(0)

    def one(self):
        return 1 if self.kind == "prime" else Fraction(1)

    def of_int(self, n: int):
        return n % self.p if self.kind == "prime" else Fraction(n)

    def of_fraction(self, num: int, den: int):
        if self.kind == "rationals":
            return Fraction(num, den)
        d = den % self.p
        if d == 0:
            raise ValueError(f"denominator {den} not invertible in {self!r}")
        return num * pow(d, -1, self.p) % self.p

    def add(self, a, b):
        return (a + b) % self.p if self.kind == "prime" else a + b

    def sub(self, a, b):
        return (a - b) % self.p if self.kind == "prime" else a - b

    def mul(self, a, b):
        return (a * b) % self.p if self.kind == "prime" else a * b

    def neg(self, a):
        return (-a) % self.p if self.kind == "prime" else -a

    def inv(self, a):
        if self.kind == "prime":
            return pow(a, -1, self.p)
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a

    def rand(self, rng):
        if self.kind == "prime":
            return rng.randrange(self.p)
        return Fraction(rng.randint(-999, 999))

    def rand_nonzero(self, rng):
        x = self.rand(rng)
        while x == 0:
            x = self.rand(rng)
        return x

    def elements(self):
        """All field elements; only valid for small prime fields."""
        if self.kind != "prime":
            raise ValueError("cannot enumerate an infinite field")
        return range(self.p)

    def format(self, a) -> str:
        if self.kind == "prime":
            return str(a)
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"


# -- precision configuration ----------------------------------------------
#
# The working window is the only mutable global.  It is fixed for the
# duration of one computation run; escalation re-runs the whole computation.


class _Precision:
    __slots__ = ("window",)

    def __init__(self):
        self.window = DEFAULT_WINDOW


_PRECISION = _Precision()


def working_window() -> int:
    return _PRECISION.window


@contextmanager
def precision(window: int):
    """Temporarily set the working truncation window."""
    if window < 8:
        raise ValueError("window must be at least 8")
    old = _PRECISION.window
    _PRECISION.window = window
    try:
        yield
    finally:
        _PRECISION.window = old


def with_escalating_precision(compute, initial: int | None = None,
                              cap: int = MAX_WINDOW):
    """Run ``compute()`` with doubling precision on IndeterminateValuation.

    The entire computation re-runs at each escalation so that every stored
    horizon is derived from the new window.  Past the cap the failure is a
    hard PrecisionExhausted error.
    """
    window = initial if initial is not None else DEFAULT_WINDOW
    while True:
        try:
            with precision(window):
                return compute()
        except IndeterminateValuation as exc:
            if window >= cap:
                raise PrecisionExhausted(
                    f"window {window} reached the cap {cap}: {exc}"
                ) from exc
            window = min(2 * window, cap)


class Series:
    """One truncated Laurent series over a fixed coefficient field.

    Immutable.  Canonical form: the leading stored coefficient is nonzero
    (trailing zeros are stripped too), and the zero series stores an empty
    coefficient tuple.  ``poly`` means the value is a Laurent polynomial
    known in full; its horizon is retained only as bookkeeping.
    """

    __slots__ = ("field", "lead", "coeffs", "horizon", "poly")

    def __init__(self, field: FieldConfig, lead: int, coeffs, horizon=INF,
                 poly: bool = False):
        coeffs = list(coeffs)
        # strip leading zeros
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            lead += 1
        # strip trailing zeros (the window [lead+len, horizon) is zero anyway)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            lead = 0
        elif not poly:
            if lead >= horizon:
                coeffs = []
                lead = 0
            elif lead + len(coeffs) > horizon:
                del coeffs[horizon - lead:]
                while coeffs and coeffs[-1] == 0:
                    coeffs.pop()
                if not coeffs:
                    lead = 0
        else:
            # a polynomial is fully known; keep the horizon at least past it
            if coeffs:
                horizon = max(horizon, lead + len(coeffs))
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "lead", lead)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "poly", poly)

    def __setattr__(self, *a):
        raise AttributeError("Series is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, field: FieldConfig, horizon=INF) -> "Series":
        return cls(field, 0, (), horizon, poly=True)

    @classmethod
    def monomial(cls, field: FieldConfig, coeff, exp: int = 0) -> "Series":
        return cls(field, exp, (coeff,), INF, poly=True)

    @classmethod
    def const(cls, field: FieldConfig, n: int) -> "Series":
        return cls.monomial(field, field.of_int(n), 0)

    @classmethod
    def one(cls, field: FieldConfig) -> "Series":
        return cls.monomial(field, field.one(), 0)

    @classmethod
    def t_power(cls, field: FieldConfig, exp: int) -> "Series":
        return cls.monomial(field, field.one(), exp)

    @classmethod
    def from_terms(cls, field: FieldConfig, terms: dict, horizon=INF) -> "Series":
        """Build a polynomial from an exponent -> coefficient mapping."""
        if not terms:
            return cls.zero(field, horizon)
        lo = min(terms)
        hi = max(terms)
        coeffs = [terms.get(e, field.zero()) for e in range(lo, hi + 1)]
        return cls(field, lo, coeffs, horizon, poly=True)

    # -- basic queries -----------------------------------------------------

    @property
    def is_window_zero(self) -> bool:
        return not self.coeffs

    @property
    def is_exact_zero(self) -> bool:
        return not self.coeffs and self.poly

    def __bool__(self):
        return bool(self.coeffs)

    def valuation(self):
        """Exact valuation; +inf for the exact zero.

        Raises IndeterminateValuation when every stored coefficient is zero
        but the truncated tail is unknown.
        """
        if self.coeffs:
            return self.lead
        if self.poly:
            return INF
        raise IndeterminateValuation(
            f"series is zero up to horizon {self.horizon}"
        )

    def val_lower_bound(self):
        """Certified lower bound on the valuation, never raises."""
        if self.coeffs:
            return self.lead
        return INF if self.poly else self.horizon

    def coeff(self, exp: int):
        """Coefficient at one exponent; raises past the horizon."""
        if self.lead <= exp < self.lead + len(self.coeffs):
            return self.coeffs[exp - self.lead]
        if self.poly or exp < self.horizon:
            return self.field.zero()
        raise IndeterminateValuation(f"coefficient at t^{exp} is truncated")

    def leading_coeff(self):
        if not self.coeffs:
            raise IndeterminateValuation("no certain leading coefficient")
        return self.coeffs[0]

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other: "Series"):
        if self.field != other.field:
            raise ValueError("series over different fields")

    def __add__(self, other: "Series") -> "Series":
        self._check(other)
        f = self.field
        poly = self.poly and other.poly
        horizon = min(self.horizon, other.horizon)
        if not self.coeffs and not other.coeffs:
            return Series(f, 0, (), horizon, poly)
        if not self.coeffs:
            lo, hi = other.lead, other.lead + len(other.coeffs)
        elif not other.coeffs:
            lo, hi = self.lead, self.lead + len(self.coeffs)
        else:
            lo = min(self.lead, other.lead)
            hi = max(self.lead + len(self.coeffs),
                     other.lead + len(other.coeffs))
        out = []
        for e in range(lo, hi):
            if not poly and e >= horizon:
                break
            out.append(f.add(self.coeff(e), other.coeff(e)))
        return Series(f, lo, out, horizon, poly)

    def __neg__(self) -> "Series":
        f = self.field
        return Series(f, self.lead, [f.neg(c) for c in self.coeffs],
                      self.horizon, self.poly)

    def __sub__(self, other: "Series") -> "Series":
        return self + (-other)

    def __mul__(self, other: "Series") -> "Series":
        self._check(other)
        f = self.field
        poly = self.poly and other.poly
        # exact zero absorbs everything
        if self.is_exact_zero or other.is_exact_zero:
            return Series.zero(f)
        if not self.coeffs or not other.coeffs:
            # window-zero factor: result window-zero, conservative horizon
            horizon = min(self.val_lower_bound() + other.horizon,
                          other.val_lower_bound() + self.horizon)
            return Series(f, 0, (), horizon, False)
        if poly:
            horizon = INF
        else:
            horizon = min(self.lead + other.horizon,
                          other.lead + self.horizon)
        lead = self.lead + other.lead
        n_out = len(self.coeffs) + len(other.coeffs) - 1
        if not poly:
            n_out = min(n_out, horizon - lead)
        acc = [f.zero()] * max(n_out, 0)
        for i, a in enumerate(self.coeffs):
            if i >= n_out:
                break
            if a == 0:
                continue
            top = min(len(other.coeffs), n_out - i)
            for j in range(top):
                b = other.coeffs[j]
                if b != 0:
                    acc[i + j] = f.add(acc[i + j], f.mul(a, b))
        return Series(f, lead, acc, horizon, poly)

    def scale(self, c) -> "Series":
        """Multiply by a field element."""
        f = self.field
        if c == 0:
            return Series.zero(f) if self.poly else \
                Series(f, 0, (), self.horizon, False)
        return Series(f, self.lead, [f.mul(c, x) for x in self.coeffs],
                      self.horizon, self.poly)

    def shift(self, k: int) -> "Series":
        """Multiply by t^k (exact)."""
        h = self.horizon if self.horizon is INF else self.horizon + k
        return Series(self.field, self.lead + k, self.coeffs, h, self.poly)

    def truncate(self, horizon) -> "Series":
        """Forget coefficients at exponents >= horizon."""
        if horizon >= self.horizon and not self.poly:
            return self
        if self.poly and horizon is INF:
            return self
        kept = [c for e, c in self.enumerate() if e < horizon]
        return Series(self.field, self.lead, kept, horizon, False)

    def enumerate(self):
        for i, c in enumerate(self.coeffs):
            yield self.lead + i, c

    # -- structure ---------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (self.field == other.field and self.lead == other.lead
                and self.coeffs == other.coeffs
                and self.horizon == other.horizon
                and self.poly == other.poly)

    def __hash__(self):
        return hash((self.lead, self.coeffs, self.horizon, self.poly))

    def agrees(self, other: "Series") -> bool:
        """Equality of values on the common known window."""
        self._check(other)
        if self.poly and other.poly:
            return self.lead == other.lead and self.coeffs == other.coeffs \
                or (not self.coeffs and not other.coeffs)
        h = min(self.horizon, other.horizon)  # finite: not both are poly
        starts = [s.lead for s in (self, other) if s.coeffs]
        if not starts:
            return True
        for e in range(min(starts), int(h)):
            if self.coeff(e) != other.coeff(e):
                return False
        return True

    def __repr__(self):
        return f"Series({format_series(self)})"

    def __str__(self):
        return format_series(self)


def valuation(s: Series):
    return s.valuation()


def invert_unit(s: Series, window: int | None = None) -> Series:
    """Multiplicative inverse, truncated to ``window`` result coefficients.

    The input must have a certain valuation.  For a monomial the inverse is
    exact; otherwise the result is a truncated power series whose window is
    capped by what the input's own horizon supports.
    """
    if s.is_exact_zero:
        raise ZeroDivisionError("inverse of zero series")
    v = s.valuation()  # raises IndeterminateValuation on window-zero
    f = s.field
    if len(s.coeffs) == 1 and s.poly:
        return Series.monomial(f, f.inv(s.coeffs[0]), -v)
    attainable = INF if s.poly else s.horizon - v
    if window is None:
        window = working_window()
    window = min(window, attainable)
    u = s.coeffs  # unit part coefficients, u[0] != 0
    inv0 = f.inv(u[0])
    out = [inv0]
    for m in range(1, window):
        acc = f.zero()
        for i in range(1, min(m, len(u) - 1) + 1):
            acc = f.add(acc, f.mul(u[i], out[m - i]))
        out.append(f.neg(f.mul(inv0, acc)))
    return Series(f, -v, out, -v + window, False)


def divide(a: Series, b: Series, window: int | None = None) -> Series:
    """a / b in the Laurent-series field (truncated)."""
    return a * invert_unit(b, window)


# -- parsing and printing ---------------------------------------------------
#
# Grammar (whitespace-insensitive):
#   series := term (("+"|"-") term)*          (a leading sign is accepted)
#   term   := coeff | coeff "*" t-part | t-part
#   t-part := "t" | "t^" int
#   coeff  := int | int "/" int

_TERM_RE = re.compile(
    r"^(?:(?P<num>\d+)(?:/(?P<den>\d+))?)?"
    r"(?:(?P<star>\*)?(?P<t>t(?:\^(?P<exp>-?\d+))?))?$"
)


def parse_series(text: str, field: FieldConfig,
                 horizon: int | None = None) -> Series:
    """Parse a Laurent polynomial; the result is exact (poly=True)."""
    compact = re.sub(r"\s+", "", text)
    if not compact:
        raise ParseError("empty series text")
    terms: dict = {}
    pos = 0
    sign = 1
    if compact[0] in "+-":
        sign = -1 if compact[0] == "-" else 1
        pos = 1
    max_exp = None
    while pos < len(compact):
        nxt_plus = compact.find("+", pos)
        nxt_minus = compact.find("-", pos)
        # a '-' directly after '^' belongs to the exponent
        while nxt_minus != -1 and nxt_minus > 0 and compact[nxt_minus - 1] == "^":
            nxt_minus = compact.find("-", nxt_minus + 1)
        ends = [e for e in (nxt_plus, nxt_minus) if e != -1]
        end = min(ends) if ends else len(compact)
        chunk = compact[pos:end]
        m = _TERM_RE.match(chunk)
        if not m or (m.group("num") is None and m.group("t") is None) or \
                (m.group("star") and m.group("num") is None):
            raise ParseError(f"bad term {chunk!r}", position=pos)
        if m.group("num") is not None:
            num = int(m.group("num"))
            den = int(m.group("den") or 1)
            if den == 0:
                raise ParseError("zero denominator", position=pos)
            try:
                coeff = field.of_fraction(num, den)
            except ValueError as exc:
                raise ParseError(str(exc), position=pos) from None
        else:
            coeff = field.one()
        if m.group("t") is not None:
            exp = int(m.group("exp")) if m.group("exp") is not None else 1
        else:
            exp = 0
        if sign < 0:
            coeff = field.neg(coeff)
        terms[exp] = field.add(terms.get(exp, field.zero()), coeff)
        max_exp = exp if max_exp is None else max(max_exp, exp)
        if end == len(compact):
            break
        sign = -1 if compact[end] == "-" else 1
        pos = end + 1
        if pos == len(compact):
            raise ParseError("dangling sign", position=end)
    if horizon is None:
        horizon = (max_exp if max_exp is not None else 0) + working_window()
    if max_exp is not None and horizon <= max_exp:
        raise ParseError(
            f"horizon {horizon} does not exceed the maximal exponent {max_exp}"
        )
    return Series.from_terms(field, {e: c for e, c in terms.items() if c != 0},
                             horizon)


def format_series(s: Series, compact: bool = False) -> str:
    """Canonical printable form; parse(format(s)) reproduces s's terms."""
    if not s.coeffs:
        return "0"
    f = s.field
    plus, minus = ("+", "-") if compact else (" + ", " - ")
    parts = []
    for e, c in s.enumerate():
        if c == 0:
            continue
        neg = f.kind == "rationals" and c < 0
        mag = -c if neg else c
        cs = f.format(mag)
        if e == 0:
            body = cs
        elif e == 1:
            body = "t" if mag == f.one() else f"{cs}*t"
        else:
            body = f"t^{e}" if mag == f.one() else f"{cs}*t^{e}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((minus if neg else plus) + body)
    return "".join(parts)
