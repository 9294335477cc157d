"""Exact sparse Laurent polynomials over the integers.

Monomials are exponent tuples over a fixed list of variables: first the
x-block (allowed negative exponents), then the y-block (coefficient
variables).  Everything downstream (mutation, matching polynomials, module
F-polynomials) is built on this class, so it stays deliberately small and
exact: int coefficients, no floats anywhere.
"""

from __future__ import annotations

from typing import Iterable, Mapping


class ZeroPolynomial(ValueError):
    pass


class DivisionFailed(ArithmeticError):
    """Raised when an exact division turns out not to be exact.

    In this package such a failure always indicates a bug (the divisions we
    perform are guaranteed exact by the Laurent phenomenon), so this is an
    ArithmeticError rather than a validation error.
    """


class NotHomogeneous(ValueError):
    pass


class NegativeExponentAtZero(ZeroDivisionError):
    pass


def _grlex_key(exp: tuple[int, ...]) -> tuple:
    return (sum(exp), exp)


class LaurentPoly:
    """A Laurent polynomial in nx variables x1..x{nx} and ny variables y1..y{ny}.

    The exponent tuples have length nx + ny.  Exponents of y-variables are
    expected to be >= 0 in well-formed F-polynomials but the class itself
    does not enforce that.
    """

    __slots__ = ("nx", "ny", "_terms")

    def __init__(self, nx: int, ny: int, terms: Mapping[tuple[int, ...], int] | None = None):
        self.nx = nx
        self.ny = ny
        clean: dict[tuple[int, ...], int] = {}
        if terms:
            width = nx + ny
            for exp, coeff in terms.items():
                if coeff == 0:
                    continue
                if len(exp) != width:
                    raise ValueError(f"exponent tuple {exp} has length {len(exp)}, expected {width}")
                clean[tuple(exp)] = clean.get(tuple(exp), 0) + coeff
        self._terms = {e: c for e, c in clean.items() if c != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nx: int, ny: int) -> "LaurentPoly":
        return cls(nx, ny)

    @classmethod
    def one(cls, nx: int, ny: int) -> "LaurentPoly":
        return cls(nx, ny, {(0,) * (nx + ny): 1})

    @classmethod
    def monomial(cls, nx: int, ny: int, exp: Iterable[int], coeff: int = 1) -> "LaurentPoly":
        return cls(nx, ny, {tuple(exp): coeff})

    @classmethod
    def x_var(cls, nx: int, ny: int, i: int) -> "LaurentPoly":
        """The variable x_{i+1} (0-based index into the x-block)."""
        exp = [0] * (nx + ny)
        exp[i] = 1
        return cls(nx, ny, {tuple(exp): 1})

    @classmethod
    def y_var(cls, nx: int, ny: int, j: int) -> "LaurentPoly":
        """The variable y_{j+1} (0-based index into the y-block)."""
        exp = [0] * (nx + ny)
        exp[nx + j] = 1
        return cls(nx, ny, {tuple(exp): 1})

    # -- basic structure ---------------------------------------------------

    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_one(self) -> bool:
        return self._terms == {(0,) * (self.nx + self.ny): 1}

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return (self.nx, self.ny, self._terms) == (other.nx, other.ny, other._terms)

    def __hash__(self) -> int:
        return hash((self.nx, self.ny, frozenset(self._terms.items())))

    def _check_shape(self, other: "LaurentPoly") -> None:
        if (self.nx, self.ny) != (other.nx, other.ny):
            raise ValueError("polynomials live in different variable sets")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_shape(other)
        out = dict(self._terms)
        for exp, coeff in other._terms.items():
            out[exp] = out.get(exp, 0) + coeff
        return LaurentPoly(self.nx, self.ny, out)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_shape(other)
        out = dict(self._terms)
        for exp, coeff in other._terms.items():
            out[exp] = out.get(exp, 0) - coeff
        return LaurentPoly(self.nx, self.ny, out)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.nx, self.ny, {e: -c for e, c in self._terms.items()})

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_shape(other)
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(self.nx, self.ny, out)

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            raise ValueError("negative powers only via monomials")
        result = LaurentPoly.one(self.nx, self.ny)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c: int) -> "LaurentPoly":
        return LaurentPoly(self.nx, self.ny, {e: c * v for e, v in self._terms.items()})

    def shift(self, exp: Iterable[int]) -> "LaurentPoly":
        """Multiply by the monomial with the given exponent tuple."""
        exp = tuple(exp)
        return LaurentPoly(self.nx, self.ny, {tuple(a + b for a, b in zip(e, exp)): c
                                              for e, c in self._terms.items()})

    def leading(self) -> tuple[tuple[int, ...], int]:
        """Leading term in descending graded-lex order."""
        if not self._terms:
            raise ZeroPolynomial("zero polynomial has no leading term")
        exp = max(self._terms, key=_grlex_key)
        return exp, self._terms[exp]

    def max_exponents(self) -> tuple[int, ...]:
        """Componentwise maximum of all exponent tuples."""
        if not self._terms:
            raise ZeroPolynomial("zero polynomial has no exponents")
        cols = zip(*self._terms.keys())
        return tuple(max(col) for col in cols)

    def monomial_content(self) -> tuple[int, ...]:
        """Componentwise minimum of all exponent tuples.

        This is the largest monomial dividing every term; for a Laurent
        polynomial it can have negative entries.
        """
        if not self._terms:
            raise ZeroPolynomial("zero polynomial has no monomial content")
        cols = zip(*self._terms.keys())
        return tuple(min(col) for col in cols)

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        """Divide exactly by `other`, raising DivisionFailed if not divisible."""
        self._check_shape(other)
        if other.is_zero():
            raise DivisionFailed("division by zero polynomial")
        if self.is_zero():
            return LaurentPoly.zero(self.nx, self.ny)
        # Shift both so the divisor has nonnegative exponents and a known
        # leading term; exactness is unaffected by monomial shifts.
        d_shift = other.monomial_content()
        divisor = other.shift(tuple(-v for v in d_shift))
        remainder = self.shift(tuple(-v for v in self.monomial_content()))
        lead_exp, lead_coeff = divisor.leading()
        q: dict[tuple[int, ...], int] = {}
        while not remainder.is_zero():
            r_exp, r_coeff = remainder.leading()
            if r_coeff % lead_coeff != 0:
                raise DivisionFailed("leading coefficient does not divide")
            step_exp = tuple(a - b for a, b in zip(r_exp, lead_exp))
            if any(v < 0 for v in step_exp):
                raise DivisionFailed("leading monomial not divisible")
            step_coeff = r_coeff // lead_coeff
            q[step_exp] = q.get(step_exp, 0) + step_coeff
            remainder = remainder - divisor.shift(step_exp).scale(step_coeff)
            if not remainder.is_zero() and _grlex_key(remainder.leading()[0]) >= _grlex_key(r_exp):
                raise DivisionFailed("division does not terminate; not exact")
        quotient = LaurentPoly(self.nx, self.ny, q)
        # undo the shifts, then verify by multiplying back
        total_shift = tuple(a - b for a, b in zip(self.monomial_content(), d_shift))
        quotient = quotient.shift(total_shift)
        if quotient * other != self:
            raise DivisionFailed("verification multiply does not reproduce dividend")
        return quotient

    def specialize(self, values: Mapping[int, int]) -> "LaurentPoly":
        """Substitute integers for variables given by 0-based index.

        Substituting 0 into a variable that occurs with a negative exponent
        raises NegativeExponentAtZero.
        """
        width = self.nx + self.ny
        out: dict[tuple[int, ...], int] = {}
        for exp, coeff in self._terms.items():
            c = coeff
            new_exp = list(exp)
            for idx, val in values.items():
                if idx < 0 or idx >= width:
                    raise IndexError(f"variable index {idx} out of range")
                e = exp[idx]
                if e == 0:
                    continue
                if e < 0:
                    if val == 0:
                        raise NegativeExponentAtZero(f"variable {idx} occurs with exponent {e}")
                    if val == 1:
                        pass
                    elif val == -1:
                        c *= (-1) ** (e % 2)
                    else:
                        raise NegativeExponentAtZero(
                            f"cannot substitute {val} into negative exponent {e} over the integers")
                else:
                    c *= val ** e
                new_exp[idx] = 0
            if c != 0:
                key = tuple(new_exp)
                out[key] = out.get(key, 0) + c
        return LaurentPoly(self.nx, self.ny, out)

    def set_ones(self, indices: Iterable[int]) -> "LaurentPoly":
        """Substitute 1 for each listed variable index (fast path used for F = X|_{x=1})."""
        idx = set(indices)
        out: dict[tuple[int, ...], int] = {}
        for exp, coeff in self._terms.items():
            key = tuple(0 if i in idx else e for i, e in enumerate(exp))
            out[key] = out.get(key, 0) + coeff
        return LaurentPoly(self.nx, self.ny, out)

    def graded_degree(self, weights: list[tuple[int, ...]]) -> tuple[int, ...]:
        """Common multidegree of all terms under the given variable weights.

        `weights[i]` is the degree vector assigned to variable i.  Raises
        NotHomogeneous when two terms disagree, ZeroPolynomial on zero input.
        """
        if not self._terms:
            raise ZeroPolynomial("zero polynomial has no degree")
        if len(weights) != self.nx + self.ny:
            raise ValueError("need one weight vector per variable")
        degree = None
        for exp in self._terms:
            vec = None
            for e, w in zip(exp, weights):
                if e == 0:
                    continue
                scaled = tuple(e * wi for wi in w)
                vec = scaled if vec is None else tuple(a + b for a, b in zip(vec, scaled))
            if vec is None:
                vec = (0,) * (len(weights[0]) if weights else 0)
            if degree is None:
                degree = vec
            elif degree != vec:
                raise NotHomogeneous(f"terms have degrees {degree} and {vec}")
        return degree

    # -- rendering ---------------------------------------------------------

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        return sorted(self._terms.items(), key=lambda item: _grlex_key(item[0]), reverse=True)

    def var_name(self, i: int) -> str:
        if i < self.nx:
            return f"x{i + 1}"
        return f"y{i - self.nx + 1}"

    def render(self) -> str:
        """Canonical text form: graded-lex descending, `*` products, `^` powers."""
        if not self._terms:
            return "0"
        pieces = []
        for exp, coeff in self.sorted_terms():
            factors = []
            for i, e in enumerate(exp):
                if e == 0:
                    continue
                name = self.var_name(i)
                factors.append(name if e == 1 else f"{name}^{e}")
            mono = "*".join(factors)
            if not mono:
                body = str(abs(coeff))
            elif abs(coeff) == 1:
                body = mono
            else:
                body = f"{abs(coeff)}*{mono}"
            if not pieces:
                pieces.append(body if coeff > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"LaurentPoly({self.nx}, {self.ny}, {self.render()})"
