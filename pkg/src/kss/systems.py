"""Deterministic constructions of complete Steiner triple systems.

These provide the raw material that the decomposition search carves into
signal sets.  Two classical quasigroup constructions cover every
admissible order: Bose for v = 3 (mod 6) and the Skolem-style
half-idempotent variant for v = 1 (mod 6).  ``known_system`` dispatches
between them, with fixed classical systems for a few small orders where
a specific well-studied system is preferable (the cyclic system of order
13, and the point-line geometry over GF(2) of order 15, which is
resolvable and therefore good search material).

Every function here is pure and bit-stable: the same order always yields
the identical triple list.
"""

from __future__ import annotations

from .core import DomainError, Triple, TripleSystem, make_triple

__all__ = ["bose", "skolem", "known_system"]


def bose(v: int) -> TripleSystem:
    """Complete STS(v) for v = 3 (mod 6).

    Write v = 3n with n odd and let x*y = (x+y)(n+1)/2 mod n, the
    idempotent commutative quasigroup on Z_n.  Points (x, i) in
    Z_n x {0,1,2} are flattened as x + n*i.  Triples:

    - {(x,0), (x,1), (x,2)} for every x, and
    - {(x,i), (y,i), (x*y, i+1 mod 3)} for x < y and every layer i.
    """
    if v % 6 != 3 or v < 3:
        raise DomainError(f"Bose construction needs v = 3 (mod 6), got {v}")
    n = v // 3
    half = (n + 1) // 2
    triples: list[Triple] = []
    for x in range(n):
        triples.append(make_triple(x, x + n, x + 2 * n))
    for i in range(3):
        j = (i + 1) % 3
        for x in range(n):
            for y in range(x + 1, n):
                z = ((x + y) * half) % n
                triples.append(make_triple(x + n * i, y + n * i, z + n * j))
    return TripleSystem(v, tuple(triples))


def skolem(v: int) -> TripleSystem:
    """Complete STS(v) for v = 1 (mod 6).

    Write v = 6t + 1 and n = 2t.  Use the half-idempotent commutative
    quasigroup on Z_n given by x*y = f(x + y mod n) where f maps even e
    to e/2 and odd e to t + (e-1)/2 (so x*x = x for x < t and
    x*x = x - t otherwise).  Points are Z_n x {0,1,2} flattened as
    x + n*i, plus an extra point oo = v - 1.  Triples:

    - {(x,0), (x,1), (x,2)} for x < t,
    - {oo, (x,i), (x-t, i+1 mod 3)} for t <= x < 2t and every layer i,
    - {(x,i), (y,i), (x*y, i+1 mod 3)} for x < y and every layer i.
    """
    if v % 6 != 1 or v < 7:
        raise DomainError(f"Skolem construction needs v = 1 (mod 6), got {v}")
    t = v // 6
    n = 2 * t
    oo = v - 1

    def star(x: int, y: int) -> int:
        e = (x + y) % n
        return e // 2 if e % 2 == 0 else t + (e - 1) // 2

    triples: list[Triple] = []
    for x in range(t):
        triples.append(make_triple(x, x + n, x + 2 * n))
    for x in range(t, n):
        for i in range(3):
            j = (i + 1) % 3
            triples.append(make_triple(oo, x + n * i, (x - t) + n * j))
    for i in range(3):
        j = (i + 1) % 3
        for x in range(n):
            for y in range(x + 1, n):
                triples.append(make_triple(x + n * i, y + n * i, star(x, y) + n * j))
    return TripleSystem(v, tuple(triples))


def _cyclic_13() -> TripleSystem:
    """The cyclic STS(13): difference base blocks {0,1,4} and {0,2,7} mod 13."""
    triples = []
    for base in ((0, 1, 4), (0, 2, 7)):
        for i in range(13):
            triples.append(make_triple(*((x + i) % 13 for x in base)))
    return TripleSystem(13, tuple(sorted(triples)))


def _projective_15() -> TripleSystem:
    """The point-line design of the binary projective geometry PG(3,2).

    Points are the 15 nonzero 4-bit vectors (point p corresponds to the
    vector p + 1); lines are {a, b, a xor b}.  This system is resolvable:
    its 35 lines split into 7 spreads of 5 disjoint lines.
    """
    triples = []
    for a in range(1, 16):
        for b in range(a + 1, 16):
            c = a ^ b
            if c > b:
                triples.append(make_triple(a - 1, b - 1, c - 1))
    return TripleSystem(15, tuple(sorted(triples)))


def known_system(v: int) -> TripleSystem:
    """A fixed complete STS(v) for any admissible v, stable across runs.

    Orders 13 and 15 use fixed classical systems; everything else
    dispatches to the Bose or Skolem construction by residue.
    """
    if v == 13:
        return _cyclic_13()
    if v == 15:
        return _projective_15()
    if v % 6 == 3:
        return bose(v)
    if v % 6 == 1 and v >= 7:
        return skolem(v)
    raise DomainError(f"no Steiner triple system of order {v} exists")
