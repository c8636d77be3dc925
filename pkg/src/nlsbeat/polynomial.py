"""Exact polynomials in the Fourier mode variables xi_j, eta_j.

A monomial is identified by its canonical key ``(xi, eta)``: two sorted
tuples of signed mode indices. Coefficients are exact complex rationals.
Floating point only enters through :class:`CompiledPolynomial`, which
evaluates a polynomial (and its gradient) on numerical states with
``eta = conj(xi)``.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np

__all__ = [
    "ExactComplex",
    "HamPolynomial",
    "CompiledPolynomial",
    "momentum",
    "divisor",
    "poisson_bracket",
    "monomial",
    "ZERO",
    "ONE",
    "I",
]

Key = Tuple[Tuple[int, ...], Tuple[int, ...]]


class ExactComplex:
    """Complex number with arbitrary-precision rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "ExactComplex":
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, complex):
            raise TypeError("floating complex values are not exact; pass an ExactComplex")
        if isinstance(value, float):
            raise TypeError("floating values are not exact; pass a Fraction or int")
        return cls(value, 0)

    def __add__(self, other):
        o = ExactComplex.coerce(other)
        return ExactComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = ExactComplex.coerce(other)
        return ExactComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return ExactComplex.coerce(other) - self

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __mul__(self, other):
        o = ExactComplex.coerce(other)
        return ExactComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = ExactComplex.coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * o.conjugate()
        return ExactComplex(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        return ExactComplex.coerce(other) / self

    def conjugate(self):
        return ExactComplex(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = ExactComplex.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"ExactComplex({self.re}, {self.im})"

    def __str__(self):
        return f"{_frac_str(self.re)} {_frac_str(self.im)}"


ZERO = ExactComplex(0, 0)
ONE = ExactComplex(1, 0)
I = ExactComplex(0, 1)


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def momentum(xi_indices: Iterable[int], eta_indices: Iterable[int]) -> int:
    """Sum of xi indices minus sum of eta indices."""
    return sum(xi_indices) - sum(eta_indices)


def divisor(xi_indices: Iterable[int], eta_indices: Iterable[int]) -> int:
    """Sum of squared xi indices minus sum of squared eta indices."""
    return sum(j * j for j in xi_indices) - sum(j * j for j in eta_indices)


def _key(xi: Iterable[int], eta: Iterable[int]) -> Key:
    return (tuple(sorted(int(j) for j in xi)), tuple(sorted(int(j) for j in eta)))


def _remove_one(indices: Tuple[int, ...], k: int) -> Tuple[int, ...]:
    pos = indices.index(k)
    return indices[:pos] + indices[pos + 1:]


def _merge(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(sorted(a + b))


class HamPolynomial(Mapping):
    """Finite sum of monomials ``c * prod(xi_j) * prod(eta_l)`` with exact coefficients.

    Behaves as an immutable mapping ``key -> ExactComplex`` where ``key`` is
    ``(sorted xi indices, sorted eta indices)``. Zero coefficients are never
    stored.

    Parameters
    ----------
    terms : mapping or iterable of (key, coefficient)
        Keys need not be sorted; repeated keys are summed.
    momentum_tag : int, optional
        Declared momentum of every term; checked on construction.
    """

    __slots__ = ("_terms", "momentum_tag")

    def __init__(self, terms=(), momentum_tag: Optional[int] = None):
        acc: Dict[Key, ExactComplex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (xi, eta), c in items:
            k = _key(xi, eta)
            c = ExactComplex.coerce(c)
            acc[k] = acc[k] + c if k in acc else c
        self._terms = {k: v for k, v in acc.items() if v}
        self.momentum_tag = momentum_tag
        if momentum_tag is not None:
            for xi, eta in self._terms:
                if momentum(xi, eta) != momentum_tag:
                    raise ValueError(
                        f"term xi={xi} eta={eta} has momentum {momentum(xi, eta)}, "
                        f"expected {momentum_tag}"
                    )

    @classmethod
    def _trusted(cls, terms: Dict[Key, ExactComplex], momentum_tag=None) -> "HamPolynomial":
        # terms already canonical and nonzero
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.momentum_tag = momentum_tag
        return obj

    # Mapping protocol
    def __getitem__(self, key) -> ExactComplex:
        return self._terms[_key(*key)]

    def __iter__(self) -> Iterator[Key]:
        return iter(sorted(self._terms))

    def __len__(self):
        return len(self._terms)

    def __contains__(self, key):
        return _key(*key) in self._terms

    def coefficient(self, xi, eta) -> ExactComplex:
        return self._terms.get(_key(xi, eta), ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, HamPolynomial):
            return self._terms == other._terms
        if other == 0:
            return not self._terms
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"HamPolynomial({len(self)} terms)"

    # algebra
    def __add__(self, other: "HamPolynomial") -> "HamPolynomial":
        if not isinstance(other, HamPolynomial):
            return NotImplemented
        acc = dict(self._terms)
        for k, c in other._terms.items():
            v = acc[k] + c if k in acc else c
            if v:
                acc[k] = v
            else:
                acc.pop(k, None)
        tag = self.momentum_tag if self.momentum_tag == other.momentum_tag else None
        return HamPolynomial._trusted(acc, tag)

    def __neg__(self):
        return HamPolynomial._trusted({k: -c for k, c in self._terms.items()}, self.momentum_tag)

    def __sub__(self, other):
        if not isinstance(other, HamPolynomial):
            return NotImplemented
        return self + (-other)

    def scale(self, factor) -> "HamPolynomial":
        f = ExactComplex.coerce(factor)
        if not f:
            return HamPolynomial()
        return HamPolynomial._trusted({k: c * f for k, c in self._terms.items()}, self.momentum_tag)

    def __mul__(self, other):
        if isinstance(other, HamPolynomial):
            acc: Dict[Key, ExactComplex] = defaultdict(lambda: ZERO)
            for (x1, e1), c1 in self._terms.items():
                for (x2, e2), c2 in other._terms.items():
                    acc[(_merge(x1, x2), _merge(e1, e2))] += c1 * c2
            return HamPolynomial._trusted({k: v for k, v in acc.items() if v})
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def conjugate(self) -> "HamPolynomial":
        """Polynomial whose value at (xi, conj xi) is the complex conjugate of this one."""
        return HamPolynomial({(eta, xi): c.conjugate() for (xi, eta), c in self._terms.items()})

    def is_real(self) -> bool:
        return self == self.conjugate()

    def filter(self, predicate) -> "HamPolynomial":
        """Sub-polynomial of the terms for which ``predicate(xi, eta, coeff)`` holds."""
        return HamPolynomial._trusted(
            {k: c for k, c in self._terms.items() if predicate(k[0], k[1], c)}, self.momentum_tag
        )

    def terms(self):
        """Terms as ``((xi, eta), coefficient)`` in canonical key order."""
        return [(k, self._terms[k]) for k in sorted(self._terms)]

    def indices(self) -> set:
        out = set()
        for xi, eta in self._terms:
            out.update(xi)
            out.update(eta)
        return out

    def max_index(self) -> int:
        idx = self.indices()
        return max((abs(j) for j in idx), default=0)

    def max_coefficient_modulus(self) -> float:
        return max((abs(complex(c)) for c in self._terms.values()), default=0.0)

    def derivative_xi(self, k: int) -> "HamPolynomial":
        out = {}
        for (xi, eta), c in self._terms.items():
            n = xi.count(k)
            if n:
                out[(_remove_one(xi, k), eta)] = c * n
        return HamPolynomial._trusted(out)

    def derivative_eta(self, k: int) -> "HamPolynomial":
        out = {}
        for (xi, eta), c in self._terms.items():
            n = eta.count(k)
            if n:
                out[(xi, _remove_one(eta, k))] = c * n
        return HamPolynomial._trusted(out)

    # text format
    def dumps(self) -> str:
        """One term per line: ``re im | xi: j1 j2 | eta: l1 l2``, sorted by key."""
        lines = []
        for (xi, eta), c in self.terms():
            lines.append(
                f"{c} | xi: {' '.join(map(str, xi))} | eta: {' '.join(map(str, eta))}".replace(
                    ":  |", ": |"
                ).rstrip()
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def loads(cls, text: str) -> "HamPolynomial":
        terms = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            try:
                coeff, xi_part, eta_part = (s.strip() for s in line.split("|"))
                re_s, im_s = coeff.split()
                if not xi_part.startswith("xi:") or not eta_part.startswith("eta:"):
                    raise ValueError("missing xi:/eta: field")
                xi = [int(s) for s in xi_part[3:].split()]
                eta = [int(s) for s in eta_part[4:].split()]
                terms.append(((xi, eta), ExactComplex(Fraction(re_s), Fraction(im_s))))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse {raw!r} ({exc})") from None
        return cls(terms)


def monomial(xi: Iterable[int], eta: Iterable[int], coeff=1) -> HamPolynomial:
    xi, eta = list(xi), list(eta)
    return HamPolynomial([((xi, eta), coeff)])


def _index_by_slot(poly: HamPolynomial, slot: int):
    by_k = defaultdict(list)
    for key, c in poly._terms.items():
        for k, n in Counter(key[slot]).items():
            by_k[k].append((key, c, n))
    return by_k


def poisson_bracket(F: HamPolynomial, G: HamPolynomial) -> HamPolynomial:
    """Exact bracket ``{F,G} = -i sum_j (dF/dxi_j dG/deta_j - dF/deta_j dG/dxi_j)``."""
    g_eta = _index_by_slot(G, 1)
    g_xi = _index_by_slot(G, 0)
    acc: Dict[Key, ExactComplex] = {}

    def add(key, value):
        v = acc[key] + value if key in acc else value
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)

    minus_i = ExactComplex(0, -1)
    for (xf, ef), cf in F._terms.items():
        for k, nf in Counter(xf).items():
            partners = g_eta.get(k)
            if not partners:
                continue
            xr = _remove_one(xf, k)
            base = cf * minus_i * nf
            for (xg, eg), cg, ng in partners:
                key = (_merge(xr, xg), _merge(ef, _remove_one(eg, k)))
                add(key, base * cg * ng)
        for k, nf in Counter(ef).items():
            partners = g_xi.get(k)
            if not partners:
                continue
            er = _remove_one(ef, k)
            base = cf * I * nf
            for (xg, eg), cg, ng in partners:
                key = (_merge(xf, _remove_one(xg, k)), _merge(er, eg))
                add(key, base * cg * ng)
    tag = None
    if F.momentum_tag is not None and G.momentum_tag is not None:
        tag = F.momentum_tag + G.momentum_tag
    return HamPolynomial._trusted(acc, tag)


class CompiledPolynomial:
    """Vectorized float evaluation of a :class:`HamPolynomial` on truncated states.

    A state is a complex array ``z`` of length ``2N+1`` holding ``xi_j`` at
    position ``j + N``; ``eta = conj(z)`` is implied.
    """

    def __init__(self, poly: HamPolynomial, N: int):
        if poly.max_index() > N:
            bad = next(
                (xi, eta) for (xi, eta) in poly if any(abs(j) > N for j in xi + eta)
            )
            raise IndexError(f"monomial xi={bad[0]} eta={bad[1]} exceeds truncation N={N}")
        self.N = N
        self.size = 2 * N + 1
        groups = defaultdict(list)
        for (xi, eta), c in poly.terms():
            groups[(len(xi), len(eta))].append((xi, eta, complex(c)))
        self._groups = []
        for (nx, ne), rows in sorted(groups.items()):
            xi_idx = np.array([r[0] for r in rows], dtype=np.intp).reshape(len(rows), nx) + N
            eta_idx = np.array([r[1] for r in rows], dtype=np.intp).reshape(len(rows), ne) + N
            coef = np.array([r[2] for r in rows], dtype=complex)
            self._groups.append((xi_idx, eta_idx, coef))

    def _check(self, z):
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.size,):
            raise ValueError(f"state must have shape ({self.size},), got {z.shape}")
        return z

    def __call__(self, z) -> complex:
        z = self._check(z)
        w = np.conj(z)
        total = 0j
        for xi_idx, eta_idx, coef in self._groups:
            total += np.sum(coef * z[xi_idx].prod(axis=1) * w[eta_idx].prod(axis=1))
        return complex(total)

    @staticmethod
    def _slot_gradient(coef, fixed, vals, idx, size):
        out = np.zeros(size, dtype=complex)
        n = idx.shape[1]
        for s in range(n):
            others = np.prod(np.delete(vals, s, axis=1), axis=1) if n > 1 else 1.0
            contrib = coef * fixed * others
            out += np.bincount(idx[:, s], weights=contrib.real, minlength=size)
            out += 1j * np.bincount(idx[:, s], weights=contrib.imag, minlength=size)
        return out

    def gradient(self, z):
        """Return ``(dF/dxi_j, dF/deta_j)`` at ``eta = conj(z)``."""
        z = self._check(z)
        w = np.conj(z)
        g_xi = np.zeros(self.size, dtype=complex)
        g_eta = np.zeros(self.size, dtype=complex)
        for xi_idx, eta_idx, coef in self._groups:
            zx = z[xi_idx]
            we = w[eta_idx]
            px = zx.prod(axis=1)
            pe = we.prod(axis=1)
            if xi_idx.shape[1]:
                g_xi += self._slot_gradient(coef, pe, zx, xi_idx, self.size)
            if eta_idx.shape[1]:
                g_eta += self._slot_gradient(coef, px, we, eta_idx, self.size)
        return g_xi, g_eta

    def vector_field(self, z):
        """Hamiltonian velocity ``dxi_j/dt = -i dF/deta_j``."""
        return -1j * self.gradient(z)[1]
