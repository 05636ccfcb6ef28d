"""Exact fixed-point arithmetic, vectors, matrices and permutations.

Every value in the schemes is either a ``Scaled`` (integer mantissa times a
power of ten) or an exact ``fractions.Fraction``.  Nothing here ever rounds:
distance comparisons, verification equality and the GCD extraction all rely
on exact sign and equality tests, so floats are rejected outright.
"""

from __future__ import annotations

import math
from fractions import Fraction


class NumericsError(Exception):
    pass


class LengthMismatch(NumericsError):
    pass


class SingularMatrix(NumericsError):
    pass


class AllZero(NumericsError):
    pass


class InexactDivision(NumericsError):
    pass


class Scaled:
    """Exact decimal fixed-point number: value = mantissa * 10**(-scale_exp).

    Canonical form strips trailing factors of ten from the mantissa, so two
    equal values always have identical (mantissa, scale_exp) pairs.  Addition
    and multiplication adjust the scale exactly and never round.  Division is
    exact-or-raise (``InexactDivision``).
    """

    __slots__ = ("mantissa", "scale_exp")

    def __init__(self, mantissa: int, scale_exp: int = 0):
        if scale_exp < 0:
            raise ValueError("scale_exp must be non-negative")
        mantissa = int(mantissa)
        if mantissa == 0:
            scale_exp = 0
        else:
            while scale_exp > 0 and mantissa % 10 == 0:
                mantissa //= 10
                scale_exp -= 1
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "scale_exp", scale_exp)

    def __setattr__(self, name, value):
        raise AttributeError("Scaled is immutable")

    # -- construction -------------------------------------------------

    @classmethod
    def from_decimal(cls, text: str) -> "Scaled":
        """Parse a plain decimal string like '87455.6' or '-0.5'."""
        s = text.strip()
        neg = s.startswith("-")
        if s and s[0] in "+-":
            s = s[1:]
        if not s:
            raise ValueError(f"not a decimal literal: {text!r}")
        if "." in s:
            intpart, _, fracpart = s.partition(".")
            if not (intpart or fracpart):
                raise ValueError(f"not a decimal literal: {text!r}")
        else:
            intpart, fracpart = s, ""
        digits = (intpart or "0") + fracpart
        if not digits.isdigit():
            raise ValueError(f"not a decimal literal: {text!r}")
        mant = int(digits)
        return cls(-mant if neg else mant, len(fracpart))

    @classmethod
    def from_fraction(cls, fr: Fraction) -> "Scaled":
        """Convert an exact rational whose denominator is of form 2^a * 5^b."""
        num, den = fr.numerator, fr.denominator
        twos = fives = 0
        while den % 2 == 0:
            den //= 2
            twos += 1
        while den % 5 == 0:
            den //= 5
            fives += 1
        if den != 1:
            raise InexactDivision(f"{fr} is not representable in base 10")
        k = max(twos, fives)
        mant = num * 2 ** (k - twos) * 5 ** (k - fives)
        return cls(mant, k)

    # -- views ---------------------------------------------------------

    def as_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 10 ** self.scale_exp)

    def mantissa_at(self, scale_exp: int) -> int:
        """Integer mantissa of this value expressed at a coarser scale."""
        if scale_exp < self.scale_exp:
            raise InexactDivision(
                f"cannot express scale {self.scale_exp} value at scale {scale_exp}"
            )
        return self.mantissa * 10 ** (scale_exp - self.scale_exp)

    @property
    def is_integer(self) -> bool:
        return self.scale_exp == 0

    def to_int(self) -> int:
        if self.scale_exp != 0:
            raise InexactDivision(f"{self} is not an integer")
        return self.mantissa

    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    # -- arithmetic ------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, Scaled):
            return other
        if isinstance(other, int):
            return Scaled(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return self.as_fraction() + other
            return NotImplemented
        s = max(self.scale_exp, o.scale_exp)
        return Scaled(self.mantissa_at(s) + o.mantissa_at(s), s)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return self.as_fraction() - other
            return NotImplemented
        s = max(self.scale_exp, o.scale_exp)
        return Scaled(self.mantissa_at(s) - o.mantissa_at(s), s)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return other - self.as_fraction()
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return self.as_fraction() * other
            return NotImplemented
        return Scaled(self.mantissa * o.mantissa, self.scale_exp + o.scale_exp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Exact division; raises InexactDivision when the quotient is not
        representable in base 10."""
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return self.as_fraction() / other
            return NotImplemented
        if o.mantissa == 0:
            raise ZeroDivisionError("Scaled division by zero")
        fr = Fraction(self.mantissa, o.mantissa)
        result = Scaled.from_fraction(fr)  # may raise InexactDivision
        shift = o.scale_exp - self.scale_exp
        if shift >= 0:
            return Scaled(result.mantissa * 10 ** shift, result.scale_exp)
        return Scaled(result.mantissa, result.scale_exp - shift)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return other / self.as_fraction()
            return NotImplemented
        return o / self

    def __neg__(self):
        return Scaled(-self.mantissa, self.scale_exp)

    def __abs__(self):
        return Scaled(abs(self.mantissa), self.scale_exp)

    def __bool__(self):
        return self.mantissa != 0

    # -- comparisons ------------------------------------------------------

    def _cmp_key(self, other):
        """Return (a, b) integers with a <=> b equivalent to self <=> other."""
        o = self._coerce(other)
        if o is not None:
            s = max(self.scale_exp, o.scale_exp)
            return self.mantissa_at(s), o.mantissa_at(s)
        if isinstance(other, Fraction):
            a = self.as_fraction()
            return a.numerator * other.denominator, other.numerator * a.denominator
        return None

    def __eq__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] == k[1]

    def __lt__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] < k[1]

    def __le__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] <= k[1]

    def __gt__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] > k[1]

    def __ge__(self, other):
        k = self._cmp_key(other)
        if k is None:
            return NotImplemented
        return k[0] >= k[1]

    def __hash__(self):
        # consistent with int/Fraction hashing for equal values
        return hash(self.as_fraction())

    # -- text ------------------------------------------------------------

    def __str__(self):
        m, s = self.mantissa, self.scale_exp
        if s == 0:
            return str(m)
        sign = "-" if m < 0 else ""
        digits = str(abs(m)).rjust(s + 1, "0")
        return f"{sign}{digits[:-s]}.{digits[-s:]}"

    def __repr__(self):
        return f"Scaled('{self}')"


ZERO = Scaled(0)
ONE = Scaled(1)


def as_scaled(x) -> Scaled:
    """Coerce an int / decimal string / Fraction / Scaled to Scaled."""
    if isinstance(x, Scaled):
        return x
    if isinstance(x, int):
        return Scaled(x, 0)
    if isinstance(x, str):
        return Scaled.from_decimal(x)
    if isinstance(x, Fraction):
        return Scaled.from_fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Scaled")


class Vec:
    """Immutable vector of exact scalars (Scaled, int or Fraction entries)."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        object.__setattr__(self, "entries", tuple(entries))

    def __setattr__(self, name, value):
        raise AttributeError("Vec is immutable")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __eq__(self, other):
        if isinstance(other, Vec):
            other = other.entries
        if not isinstance(other, tuple):
            return NotImplemented
        return len(self.entries) == len(other) and all(
            a == b for a, b in zip(self.entries, other)
        )

    def __hash__(self):
        return hash(self.entries)

    def __add__(self, other):
        if len(self) != len(other):
            raise LengthMismatch(f"{len(self)} vs {len(other)}")
        return Vec(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        if len(self) != len(other):
            raise LengthMismatch(f"{len(self)} vs {len(other)}")
        return Vec(a - b for a, b in zip(self, other))

    def __neg__(self):
        return Vec(-a for a in self)

    def scale(self, c):
        return Vec(c * a for a in self)

    def dot(self, other) -> "Scaled | Fraction | int":
        return dot(self, other)

    def __repr__(self):
        return "Vec(%s)" % ", ".join(str(e) for e in self)


def vec(*items) -> Vec:
    return Vec(as_scaled(x) if isinstance(x, str) else x for x in items)


def dot(a, b):
    """Exact dot product of two conforming vectors."""
    if len(a) != len(b):
        raise LengthMismatch(f"dot: {len(a)} vs {len(b)}")
    total = 0
    for x, y in zip(a, b):
        total = total + x * y
    return total


class Mat:
    """Immutable rectangular matrix of exact scalars."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(r) for r in rows)
        if rows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise LengthMismatch("ragged matrix rows")
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, name, value):
        raise AttributeError("Mat is immutable")

    @property
    def n_rows(self):
        return len(self.rows)

    @property
    def n_cols(self):
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, i):
        return self.rows[i]

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and all(
                a == b
                for ra, rb in zip(self.rows, other.rows)
                for a, b in zip(ra, rb)
            )
        )

    def __hash__(self):
        return hash(self.rows)

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls(
            tuple(Scaled(1) if i == j else Scaled(0) for j in range(n))
            for i in range(n)
        )

    def matvec(self, v) -> Vec:
        """Matrix times column vector: result_i = row_i . v"""
        if self.n_cols != len(v):
            raise LengthMismatch(f"matvec: {self.n_cols} cols vs {len(v)}")
        return Vec(dot(row, v) for row in self.rows)

    def vecmat(self, v) -> Vec:
        """Row vector times matrix: result_j = v . col_j"""
        if self.n_rows != len(v):
            raise LengthMismatch(f"vecmat: {self.n_rows} rows vs {len(v)}")
        return Vec(
            sum((v[i] * self.rows[i][j] for i in range(self.n_rows)), 0)
            for j in range(self.n_cols)
        )

    def matmul(self, other: "Mat") -> "Mat":
        if self.n_cols != other.n_rows:
            raise LengthMismatch("matmul dims")
        cols = list(zip(*other.rows))
        return Mat(
            tuple(dot(row, col) for col in cols) for row in self.rows
        )

    def transpose(self) -> "Mat":
        return Mat(zip(*self.rows))

    # -- exact linear algebra ------------------------------------------

    def _integerized(self):
        """Common-denominator view: (int rows, L) with entry = int / L."""
        den = 1
        for row in self.rows:
            for e in row:
                fr = e.as_fraction() if isinstance(e, Scaled) else Fraction(e)
                den = den * fr.denominator // math.gcd(den, fr.denominator)
        out = []
        for row in self.rows:
            out.append(
                [
                    int(
                        (e.as_fraction() if isinstance(e, Scaled) else Fraction(e))
                        * den
                    )
                    for e in row
                ]
            )
        return out, den

    def det(self) -> Fraction:
        """Exact determinant via fraction-free (Bareiss) elimination."""
        if self.n_rows != self.n_cols:
            raise LengthMismatch("det of non-square matrix")
        n = self.n_rows
        if n == 0:
            return Fraction(1)
        a, den = self._integerized()
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return Fraction(0)
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return Fraction(sign * a[n - 1][n - 1], den ** n)

    def inverse(self) -> "Mat":
        """Exact inverse with Fraction entries; raises SingularMatrix.

        Runs a one-step fraction-free Gauss-Jordan elimination on the
        integerized matrix, so intermediate values stay integers bounded by
        minors instead of rationals needing per-operation normalization.
        """
        if self.n_rows != self.n_cols:
            raise LengthMismatch("inverse of non-square matrix")
        n = self.n_rows
        ints, den = self._integerized()
        a = [
            list(row) + [1 if i == j else 0 for j in range(n)]
            for i, row in enumerate(ints)
        ]
        width = 2 * n
        prev = 1
        for k in range(n):
            if a[k][k] == 0:
                for r in range(k + 1, n):
                    if a[r][k] != 0:
                        a[k], a[r] = a[r], a[k]
                        break
                else:
                    raise SingularMatrix("matrix is singular")
            pivot = a[k][k]
            row_k = a[k]
            for i in range(n):
                if i == k:
                    continue
                row_i = a[i]
                factor = row_i[k]
                for j in range(width):
                    if j == k:
                        continue
                    quot, rem = divmod(pivot * row_i[j] - factor * row_k[j], prev)
                    if rem:
                        raise RuntimeError("fraction-free elimination lost exactness")
                    row_i[j] = quot
                row_i[k] = 0
            prev = pivot
        # row i of the integer inverse is a[i][n:] / a[i][i]; undo the
        # integerizing factor den (inverse of A/den is den * A^-1)
        return Mat(
            tuple(Fraction(den * a[i][n + j], a[i][i]) for j in range(n))
            for i in range(n)
        )

    def inverse_int(self):
        """Inverse as (integer matrix N, positive integer D) with inv = N/D.

        Lets callers run matrix-vector products in pure integer arithmetic.
        """
        inv = self.inverse()
        den = 1
        for row in inv.rows:
            for e in row:
                den = den * e.denominator // math.gcd(den, e.denominator)
        num = [[int(e * den) for e in row] for row in inv.rows]
        return num, den

    def __repr__(self):
        return "Mat(%d x %d)" % (self.n_rows, self.n_cols)


def mat_from_decimals(rows) -> Mat:
    """Build a Mat from nested decimal strings / ints / Scaled."""
    return Mat(
        tuple(as_scaled(e) for e in row) for row in rows
    )


def mat_random_invertible(
    n: int,
    rng,
    entry_range=(-1000, 1000),
    scale_exp: int = 1,
    max_tries: int = 64,
) -> Mat:
    """Random n x n matrix with exactly checked nonzero determinant.

    Entries are integers drawn uniformly from entry_range, then scaled down
    by 10**scale_exp.  Redraws singular candidates; a broken rng that keeps
    producing singular matrices trips the retry cap.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = entry_range
    for _ in range(max_tries):
        m = Mat(
            tuple(Scaled(rng.randint(lo, hi), scale_exp) for _ in range(n))
            for _ in range(n)
        )
        if m.det() != 0:
            return m
    raise RuntimeError(f"no invertible matrix after {max_tries} draws")


class Perm:
    """Permutation with semantics output_i = input[mapping[i]] (0-based)."""

    __slots__ = ("mapping",)

    def __init__(self, mapping):
        mapping = tuple(int(i) for i in mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ValueError(f"not a permutation of 0..{len(mapping) - 1}: {mapping}")
        object.__setattr__(self, "mapping", mapping)

    def __setattr__(self, name, value):
        raise AttributeError("Perm is immutable")

    def __len__(self):
        return len(self.mapping)

    def __eq__(self, other):
        if not isinstance(other, Perm):
            return NotImplemented
        return self.mapping == other.mapping

    def __hash__(self):
        return hash(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls(range(n))

    @classmethod
    def random(cls, n: int, rng) -> "Perm":
        idx = list(range(n))
        rng.shuffle(idx)
        return cls(idx)

    @classmethod
    def from_one_based(cls, seq) -> "Perm":
        return cls(i - 1 for i in seq)

    def to_one_based(self):
        return tuple(i + 1 for i in self.mapping)

    def apply(self, v):
        """Permute a sequence; returns the same container kind (Vec/list/tuple)."""
        if len(v) != len(self.mapping):
            raise LengthMismatch(f"perm length {len(self.mapping)} vs {len(v)}")
        out = [v[i] for i in self.mapping]
        if isinstance(v, Vec):
            return Vec(out)
        if isinstance(v, tuple):
            return tuple(out)
        return out

    def inverse(self) -> "Perm":
        inv = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return Perm(inv)

    def __repr__(self):
        return f"Perm(one_based={self.to_one_based()})"


def vec_gcd(v) -> Scaled:
    """GCD of a vector's integer mantissas at their common scale.

    All entries are brought to the maximum scale_exp present, then the plain
    integer GCD of the mantissas is returned (as an integer-valued Scaled).
    This is the quantity a query user can always compute from a blinded
    query vector: if every entry carries a common integer factor beta, the
    result is divisible by beta.
    """
    entries = [as_scaled(e) if not isinstance(e, Scaled) else e for e in v]
    if not entries:
        raise AllZero("empty vector")
    if all(e.mantissa == 0 for e in entries):
        raise AllZero("all entries are zero")
    s = max(e.scale_exp for e in entries)
    g = 0
    for e in entries:
        g = math.gcd(g, abs(e.mantissa_at(s)))
    return Scaled(g, 0)
