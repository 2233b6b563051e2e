"""Exact arithmetic in GF(p) and GF(p^k) built on log/antilog tables.

Elements of GF(p^k) are dense integer indices: 0 is the zero element and
index i >= 1 stands for alpha^(i-1), where alpha is a root of the primitive
modulus polynomial.  This labeling makes multiplicative structure (and the
cyclic point labeling built on top of it) directly visible in the indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "Polynomial",
    "FiniteField",
    "find_primitive_polynomial",
    "field_build",
]

MAX_FIELD_ORDER = 2**20

# Verified cache for frequently used fields.  Every entry is re-derived by
# the brute-force search in the test suite.
_KNOWN_PRIMITIVE = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 1, 1),
}


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Polynomial:
    """Polynomial over GF(p), coefficients lowest degree first."""

    coefficients: tuple[int, ...]
    p: int

    def __post_init__(self) -> None:
        if not _is_prime(self.p):
            raise ValueError(f"modulus base {self.p} is not prime")
        coeffs = self.coefficients
        if any(c < 0 or c >= self.p for c in coeffs):
            raise ValueError("coefficients must be reduced mod p")
        if coeffs and coeffs[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")

    @classmethod
    def make(cls, coefficients, p: int) -> "Polynomial":
        """Build a polynomial, reducing mod p and trimming leading zeros."""
        coeffs = [c % p for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return cls(tuple(coeffs), p)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1 if self.coefficients else -1

    @property
    def is_monic(self) -> bool:
        return bool(self.coefficients) and self.coefficients[-1] == 1

    def __str__(self) -> str:
        if not self.coefficients:
            return "0"
        terms = []
        for exp in range(self.degree, -1, -1):
            c = self.coefficients[exp]
            if c == 0:
                continue
            if exp == 0:
                terms.append(str(c))
            else:
                x = "x" if exp == 1 else f"x^{exp}"
                terms.append(x if c == 1 else f"{c}{x}")
        return "+".join(terms)


def _poly_key(coefficients: tuple[int, ...], p: int) -> int:
    """Total order used for deterministic selection: sum of c_i * p^i."""
    return sum(c * p**i for i, c in enumerate(coefficients))


def _multiplicative_order_is_full(coeffs: tuple[int, ...], p: int, k: int) -> bool:
    """True when x has multiplicative order p^k - 1 modulo the given monic poly.

    Repeatedly multiplies the power vector by x, reducing with the modulus.
    This doubles as a primitivity test: a reducible or non-primitive modulus
    closes the cycle early.
    """
    order = p**k
    target = order - 1
    # Power vector of x^1, length k, lowest degree first.
    vec = [0] * k
    if k == 1:
        vec[0] = (-coeffs[0]) % p
    else:
        vec[1] = 1
    one = tuple([1] + [0] * (k - 1))
    seen_one_at = None
    current = tuple(vec)
    for step in range(1, target + 1):
        if current == one:
            seen_one_at = step
            break
        # multiply by x: shift up, reduce the overflow with the modulus
        overflow = current[k - 1]
        shifted = [0] + list(current[: k - 1])
        if overflow:
            for i in range(k):
                shifted[i] = (shifted[i] - overflow * coeffs[i]) % p
        current = tuple(shifted)
    return seen_one_at == target


@lru_cache(maxsize=None)
def find_primitive_polynomial(p: int, k: int) -> Polynomial:
    """Return the deterministic primitive polynomial for GF(p^k).

    The result is monic of degree k and its root has multiplicative order
    p^k - 1.  Among all candidates the lexicographically smallest one (by
    the base-p encoding of the coefficient vector) is chosen so repeated
    builds agree.
    """
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1:
        raise ValueError("extension degree must be >= 1")
    if p**k > MAX_FIELD_ORDER:
        raise ValueError(
            f"field order {p}^{k} exceeds the supported capacity {MAX_FIELD_ORDER}"
        )
    cached = _KNOWN_PRIMITIVE.get((p, k))
    if cached is not None:
        return Polynomial(cached, p)
    best = None
    best_key = None
    # Enumerate monic degree-k candidates by their low-order coefficients.
    for encoded in range(p**k):
        coeffs = []
        rest = encoded
        for _ in range(k):
            coeffs.append(rest % p)
            rest //= p
        coeffs.append(1)
        candidate = tuple(coeffs)
        key = _poly_key(candidate, p)
        if best_key is not None and key >= best_key:
            continue
        if _multiplicative_order_is_full(candidate, p, k):
            best = candidate
            best_key = key
    if best is None:
        raise ValueError(f"no primitive polynomial found for GF({p}^{k})")
    return Polynomial(best, p)


class FiniteField:
    """GF(p^k) with log/antilog tables over the p^k - 1 nonzero elements.

    Public element values are dense indices (0 = zero, i = alpha^(i-1)).
    The tables are immutable after construction and safe to share.
    """

    def __init__(self, p: int, k: int, modulus: Polynomial | None = None):
        if not _is_prime(p):
            raise ValueError(f"{p} is not prime")
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        order = p**k
        if order > MAX_FIELD_ORDER:
            raise ValueError(
                f"field order {p}^{k} exceeds the supported capacity {MAX_FIELD_ORDER}"
            )
        if modulus is None:
            modulus = find_primitive_polynomial(p, k)
        if modulus.p != p or modulus.degree != k or not modulus.is_monic:
            raise ValueError("modulus must be monic of matching degree and base")
        self.p = p
        self.k = k
        self.order = order
        self.modulus = modulus
        self._build_tables()

    def _build_tables(self) -> None:
        p, k, order = self.p, self.k, self.order
        coeffs = self.modulus.coefficients
        one = tuple([1] + [0] * (k - 1))
        vectors = [one]
        current = one
        for _ in range(order - 2):
            overflow = current[k - 1]
            shifted = [0] + list(current[: k - 1])
            if overflow:
                for i in range(k):
                    shifted[i] = (shifted[i] - overflow * coeffs[i]) % p
            current = tuple(shifted)
            if current == one:
                break
            vectors.append(current)
        if len(vectors) != order - 1:
            raise ValueError(
                f"modulus {self.modulus} is not primitive: "
                f"alpha cycles after {len(vectors)} powers, expected {order - 1}"
            )
        # antilog[j] = vector of alpha^j; vector_of[i] = vector of element i
        self._vector_of = [tuple([0] * k)] + vectors
        self._index_of = {vec: i for i, vec in enumerate(self._vector_of)}
        if len(self._index_of) != order:
            raise ValueError(f"modulus {self.modulus} produced repeated elements")

    # -- element helpers ------------------------------------------------

    @property
    def alpha(self) -> int:
        """Index of the generator alpha."""
        return 2 if self.order > 2 else 1

    def element_vector(self, a: int) -> tuple[int, ...]:
        """Coefficient vector of element a (lowest degree first)."""
        self._check(a)
        return self._vector_of[a]

    def element_from_vector(self, vector) -> int:
        key = tuple(c % self.p for c in vector)
        if len(key) != self.k:
            raise ValueError(f"vector length {len(key)} != {self.k}")
        return self._index_of[key]

    def element_of_exponent(self, exponent: int) -> int:
        """alpha^exponent as an element index."""
        return 1 + exponent % (self.order - 1)

    def log(self, a: int) -> int:
        """Discrete log base alpha; a must be nonzero."""
        self._check(a)
        if a == 0:
            raise ValueError("log(0) is undefined")
        return a - 1

    def _check(self, a: int) -> None:
        if not 0 <= a < self.order:
            raise ValueError(f"{a} is not an element index of GF({self.p}^{self.k})")

    # -- arithmetic ------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        va = self.element_vector(a)
        vb = self.element_vector(b)
        return self._index_of[tuple((x + y) % self.p for x, y in zip(va, vb))]

    def neg(self, a: int) -> int:
        va = self.element_vector(a)
        return self._index_of[tuple((-x) % self.p for x in va)]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if a == 0 or b == 0:
            return 0
        return 1 + ((a - 1) + (b - 1)) % (self.order - 1)

    def pow(self, a: int, e: int) -> int:
        self._check(a)
        if a == 0:
            if e < 0:
                raise ValueError("0 cannot be raised to a negative power")
            return 0 if e else 1
        return 1 + ((a - 1) * e) % (self.order - 1)

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ValueError("0 has no multiplicative inverse")
        return 1 + (-(a - 1)) % (self.order - 1)

    # -- subfield structure ---------------------------------------------

    def subfield_exponent_stride(self, subfield_order: int) -> int:
        """Index stride of the subfield copy of GF(subfield_order) inside."""
        q = subfield_order
        if q < 2 or (self.order - 1) % (q - 1) != 0:
            raise ValueError(f"GF({q}) is not a subfield of GF({self.p}^{self.k})")
        # q must be p^s with s | k
        s = 0
        value = 1
        while value < q:
            value *= self.p
            s += 1
        if value != q or self.k % s != 0:
            raise ValueError(f"GF({q}) is not a subfield of GF({self.p}^{self.k})")
        return (self.order - 1) // (q - 1)

    def subfield_elements(self, subfield_order: int) -> list[int]:
        """The copy of GF(subfield_order) inside this field, as indices."""
        stride = self.subfield_exponent_stride(subfield_order)
        return [0] + [self.element_of_exponent(stride * t)
                      for t in range(subfield_order - 1)]

    def trace_to_subfield(self, a: int, subfield_order: int) -> int:
        """Trace of a down to GF(subfield_order), as a subfield element index.

        Tr(a) = a + a^q + a^(q^2) + ... with k/s terms for q = p^s.  The
        result always lies in the subfield copy; it is returned in the
        subfield's own dense labeling (generator alpha^stride).
        """
        stride = self.subfield_exponent_stride(subfield_order)
        q = subfield_order
        terms = self.k // self._s_of(q)
        total = 0
        power = a
        for _ in range(terms):
            total = self.add(total, power)
            power = self.pow(power, q)
        if total == 0:
            return 0
        exponent = self.log(total)
        if exponent % stride != 0:
            raise AssertionError("trace left the subfield; table build is broken")
        return 1 + (exponent // stride) % (q - 1)

    def _s_of(self, subfield_order: int) -> int:
        s = 0
        value = 1
        while value < subfield_order:
            value *= self.p
            s += 1
        return s

    def __repr__(self) -> str:
        return f"FiniteField(p={self.p}, k={self.k}, modulus={self.modulus})"


def field_build(p: int, k: int, modulus: Polynomial | None = None) -> FiniteField:
    """Build GF(p^k); rejects a non-primitive modulus during table build."""
    return FiniteField(p, k, modulus)
