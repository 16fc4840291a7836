"""Core value types for partial Steiner triple systems and signal sets.

A triple system on ``v`` points is *partial Steiner* when every unordered
pair of points lies in at most one triple, and *complete* when every pair
lies in exactly one (possible iff v = 1 or 3 mod 6, giving v(v-1)/6
triples).  A signal set groups the triples of such a system into classes
of equal size ``m`` whose members are pairwise vertex-disjoint (partial
parallel classes).  A signal set is *Kirkman* when it achieves
``floor(v(v-1)/6 / m)`` classes, the maximum possible.

All values here are immutable after construction and safe to share
between threads.  Construction validates well-formedness (sorted triples,
index ranges); the semantic checks live in :func:`verify_triple_system`
and :func:`verify_signal_set`, which report violations instead of
raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "DomainError",
    "InputError",
    "UnverifiedInputError",
    "Triple",
    "TripleSystem",
    "SignalSet",
    "Violation",
    "VerificationReport",
    "admissible",
    "require_admissible",
    "make_triple",
    "triple_count",
    "max_ppc_size",
    "verify_triple_system",
    "verify_signal_set",
    "is_kss",
    "canonical_form",
    "split_signal_set",
]


class DomainError(ValueError):
    """An argument is outside the mathematical domain of the operation."""


class InputError(ValueError):
    """A structure is malformed (bad index, bad shape) rather than merely
    failing verification."""


class UnverifiedInputError(ValueError):
    """An operation requiring a verified signal set received an invalid one."""


# A triple is an unordered 3-subset of points, stored sorted ascending.
Triple = tuple[int, int, int]


def admissible(v: int) -> bool:
    """True iff a (complete) Steiner triple system of order ``v`` can exist."""
    return v >= 1 and v % 6 in (1, 3)


def require_admissible(v: int) -> None:
    if not admissible(v):
        raise DomainError(f"order {v} is not 1 or 3 (mod 6)")


def make_triple(a: int, b: int, c: int) -> Triple:
    """Canonical (sorted) triple; the three points must be distinct."""
    t = tuple(sorted((a, b, c)))
    if t[0] == t[1] or t[1] == t[2]:
        raise InputError(f"triple {t} has a repeated point")
    if t[0] < 0:
        raise InputError(f"triple {t} has a negative point")
    return t  # type: ignore[return-value]


@dataclass(frozen=True)
class TripleSystem:
    """An ordered list of triples on points ``0 .. v-1``.

    Construction enforces well-formedness only; whether the system is
    partial Steiner (no pair covered twice) is decided by
    :func:`verify_triple_system`.
    """

    v: int
    triples: tuple[Triple, ...]

    def __post_init__(self) -> None:
        if self.v < 1:
            raise InputError(f"order must be positive, got {self.v}")
        for i, t in enumerate(self.triples):
            if len(t) != 3 or not (0 <= t[0] < t[1] < t[2]):
                raise InputError(f"triple #{i} = {t} is not sorted ascending")
            if t[2] >= self.v:
                raise InputError(f"triple #{i} = {t} has a point >= v = {self.v}")

    @property
    def complete(self) -> bool:
        """True iff the triple count matches a full Steiner system of order v."""
        return admissible(self.v) and len(self.triples) == self.v * (self.v - 1) // 6


@dataclass(frozen=True)
class SignalSet:
    """A triple system whose triples are partitioned into classes of size m.

    ``classes`` holds indices into ``system.triples``.  Every index should
    appear in exactly one class and each class should consist of m
    pairwise vertex-disjoint triples; those properties are checked by
    :func:`verify_signal_set`, not at construction.
    """

    system: TripleSystem
    m: int
    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InputError(f"class size must be positive, got {self.m}")
        n = len(self.system.triples)
        for ci, cls in enumerate(self.classes):
            for ti in cls:
                if not (0 <= ti < n):
                    raise InputError(f"class #{ci} references triple index {ti} "
                                     f"outside 0..{n - 1}")

    @property
    def s(self) -> int:
        """Number of classes."""
        return len(self.classes)


@dataclass(frozen=True)
class Violation:
    """One verification failure.

    ``kind`` is one of:

    - ``duplicate-pair``: where = (p, q, t1, t2) — pair {p, q} covered by
      triples #t1 and #t2 of the system.
    - ``oversize-class`` / ``undersize-class``: where = (class, size).
    - ``intra-class-point-collision``: where = (class, point, t1, t2).
    - ``partition-gap``: where = (triple,) — triple in no class.
    - ``partition-overlap``: where = (triple, c1, c2) — triple in two classes.
    """

    kind: str
    where: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}"


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    def kinds(self) -> set[str]:
        return {x.kind for x in self.violations}


def triple_count(v: int) -> int:
    """Number of triples in a complete Steiner triple system of order v."""
    require_admissible(v)
    return v * (v - 1) // 6


def max_ppc_size(v: int) -> int:
    """Largest partial parallel class achievable in some STS(v).

    v/3 when v = 3 (mod 6); (v-1)/3 when v = 1 (mod 6) and v >= 13.  The
    order-7 system is the lone exception: its 7 triples pairwise
    intersect, so only singleton classes exist.
    """
    require_admissible(v)
    if v < 3:
        raise DomainError("no partial parallel classes on fewer than 3 points")
    if v == 7:
        return 1
    return v // 3 if v % 6 == 3 else (v - 1) // 3


def verify_triple_system(ts: TripleSystem) -> VerificationReport:
    """Check the partial-Steiner property: no pair of points covered twice.

    Malformed input (out-of-range indices) raises :class:`InputError` at
    :class:`TripleSystem` construction and never reaches here; every
    problem this function finds is reported, not raised.
    """
    violations: list[Violation] = []
    seen: dict[tuple[int, int], int] = {}
    for ti, (a, b, c) in enumerate(ts.triples):
        for p, q in ((a, b), (a, c), (b, c)):
            first = seen.get((p, q))
            if first is None:
                seen[(p, q)] = ti
            else:
                violations.append(Violation("duplicate-pair", (p, q, first, ti)))
    return VerificationReport(not violations, tuple(violations))


def verify_signal_set(ss: SignalSet) -> VerificationReport:
    """Full semantic check of a signal set.

    Verifies the underlying system, that every class has exactly m
    triples, that triples within one class are pairwise vertex-disjoint,
    and that the classes partition the system's triple list exactly.
    """
    violations = list(verify_triple_system(ss.system).violations)

    for ci, cls in enumerate(ss.classes):
        if len(cls) > ss.m:
            violations.append(Violation("oversize-class", (ci, len(cls))))
        elif len(cls) < ss.m:
            violations.append(Violation("undersize-class", (ci, len(cls))))
        point_seen: dict[int, int] = {}
        reported: set[int] = set()
        for ti in cls:
            for p in ss.system.triples[ti]:
                if p in point_seen and p not in reported:
                    violations.append(
                        Violation("intra-class-point-collision",
                                  (ci, p, point_seen[p], ti)))
                    reported.add(p)
                else:
                    point_seen.setdefault(p, ti)

    owner: dict[int, int] = {}
    overlapped: set[int] = set()
    for ci, cls in enumerate(ss.classes):
        for ti in cls:
            if ti in owner and ti not in overlapped:
                violations.append(Violation("partition-overlap", (ti, owner[ti], ci)))
                overlapped.add(ti)
            else:
                owner.setdefault(ti, ci)
    for ti in range(len(ss.system.triples)):
        if ti not in owner:
            violations.append(Violation("partition-gap", (ti,)))

    return VerificationReport(not violations, tuple(violations))


def is_kss(ss: SignalSet) -> bool:
    """True iff the verified signal set has floor(b(v)/m) classes.

    b(v) = v(v-1)/6 is the triple count of a complete system of order v;
    the signal set itself may live on a proper partial system (when m
    does not divide b, exactly b mod m triples are absent).
    """
    report = verify_signal_set(ss)
    if not report.ok:
        raise UnverifiedInputError(
            f"signal set fails verification: {[str(x) for x in report.violations[:3]]}")
    return len(ss.classes) == triple_count(ss.system.v) // ss.m


def canonical_form(ss: SignalSet) -> SignalSet:
    """Deterministic normal form: triples sorted within each class.

    Class order is preserved; the underlying triple list is rebuilt in
    class-major order so equal signal sets have equal representations.
    Idempotent, and verification status is preserved.
    """
    report = verify_signal_set(ss)
    if not report.ok:
        raise UnverifiedInputError("cannot canonicalize an invalid signal set")
    new_triples: list[Triple] = []
    new_classes: list[tuple[int, ...]] = []
    for cls in ss.classes:
        start = len(new_triples)
        new_triples.extend(sorted(ss.system.triples[ti] for ti in cls))
        new_classes.append(tuple(range(start, start + len(cls))))
    return SignalSet(TripleSystem(ss.system.v, tuple(new_triples)),
                     ss.m, tuple(new_classes))


def split_signal_set(ss: SignalSet, m: int) -> SignalSet:
    """Cut each size-M class of a Kirkman signal set into M/m chunks.

    Valid exactly when m divides M and b(v) mod M < m; then the result
    has floor(b(v)/m) classes and is itself Kirkman.  Outside that regime
    the cut would fall short of the required class count, so we refuse.
    """
    if not is_kss(ss):
        raise DomainError("can only split a Kirkman signal set")
    big = ss.m
    if m < 1 or big % m != 0:
        raise DomainError(f"chunk size {m} does not divide class size {big}")
    if triple_count(ss.system.v) % big >= m:
        raise DomainError(
            f"splitting {big} -> {m} on order {ss.system.v} loses classes")
    canon = canonical_form(ss)
    new_classes: list[tuple[int, ...]] = []
    for cls in canon.classes:
        for k in range(0, big, m):
            new_classes.append(cls[k:k + m])
    return SignalSet(canon.system, m, tuple(new_classes))
