"""Executable existence rules for Kirkman signal sets, with certificates.

Each classical existence result is implemented as an arithmetic checker
that, when it applies to a parameter pair (v, m), emits a replayable
:class:`Certificate`.  The certificate letters follow the catalog
annotation alphabet:

- ``A``: the asymptotic ordering-window bound M(u, v) of Colbourn,
  Horsley and Wang; vacuous below v = 70488 since it needs u >= 88.
- ``B``: complete small-order coverage for 14 <= v <= 32, m <= v/3.
- ``C``: class size 4 whenever 4 divides the triple count (v >= 19,
  v not in {21, 27}).
- ``D``: class size v0 - 1 on 4*v0 - 3 points, from any v0 = 3 (mod 6),
  v0 > 9.
- ``E``: class size (v - 1)/6 for every v = 1 (mod 6).
- ``F``: class size g(g - 1)/3 on g^2 points for g = 3 (mod 6).
- ``G``: the d-divisor rule on v = g * r points, g = r = 3 (mod 6).
- ``K``: resolvable base fact — a Kirkman triple system KSS(v, v/3)
  exists for every v = 3 (mod 6) (Ray-Chaudhuri / Wilson).
- ``S``: splitting derivation — cut each class of a known KSS(v, M)
  into chunks of size m; valid exactly when m | M and b mod M < m.
- ``W``: an explicit witness design file found by search.
- ``!``: proven nonexistence by exhaustive search (claimed only for
  orders whose triple system is unique, v <= 9).

``classify`` combines everything into a Status for a pair (v, m).
Registered ``!`` facts dominate: a rule letter that formally matches a
pair with a proven-nonexistent design (the g = 3 corner of rule F
asserting KSS(9, 2)) is overridden.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import (DomainError, admissible, max_ppc_size, require_admissible,
                   triple_count)

__all__ = [
    "Certificate",
    "ChwParams",
    "GrCertificate",
    "Status",
    "CertificateRegistry",
    "chw_M",
    "chw_applicable",
    "chw_bound",
    "theorem_b",
    "theorem_c",
    "theorem_d",
    "theorem_d_inverse",
    "theorem_e",
    "theorem_f",
    "theorem_f_inverse",
    "theorem_g",
    "evaluate_gr",
    "gr_bound_ok",
    "split_derivation",
    "classify",
    "classification_map",
    "replay",
]

KNOWN_LETTERS = "ABCDEFGKSW"
ALL_LETTERS = KNOWN_LETTERS + "!"

# Fixed key order per letter for the bit-exact registry line format.
_PARAM_ORDER = {
    "A": ("u",),
    "B": (),
    "C": (),
    "D": ("source",),
    "E": (),
    "F": ("g",),
    "G": ("g", "r", "d", "q", "z", "N"),
    "K": (),
    "S": ("base",),
    "W": ("file", "method", "seed"),
    "!": ("method", "scope"),
}


@dataclass(frozen=True)
class Certificate:
    """A replayable record justifying one existence or nonexistence claim.

    The letter is the tag; ``params`` holds the letter-specific fields
    (see module docstring).  ``replay`` re-validates the arithmetic side
    conditions from scratch.
    """

    letter: str
    params: tuple[tuple[str, int | str], ...] = ()

    def get(self, key: str, default=None):
        for k, val in self.params:
            if k == key:
                return val
        return default

    def render(self, v: int, m: int) -> str:
        """One bit-exact registry line: ``v m LETTER key=value ...``."""
        parts = [str(v), str(m), self.letter]
        order = _PARAM_ORDER.get(self.letter, ())
        keys = [k for k in order if self.get(k) is not None]
        keys += sorted(k for k, _ in self.params if k not in order)
        parts.extend(f"{k}={self.get(k)}" for k in keys)
        return " ".join(parts)


def _cert(letter: str, **params) -> Certificate:
    return Certificate(letter, tuple(params.items()))


@dataclass(frozen=True)
class ChwParams:
    """Parameters (u, v) of the ordering-window bound."""

    u: int
    v: int

    @property
    def applicable(self) -> bool:
        return chw_applicable(self.u, self.v)


@dataclass(frozen=True)
class GrCertificate:
    """Full arithmetic record of one rule-G candidate on v = g * r points.

    ``n`` is the integer N defined by r*N/3 = d(q+1+z) - (v-3m) with
    q = floor((v-3m) / (3*floor(d/3))) and z the least value in [0, r)
    making 3d(q+1+z) divisible by r.  The candidate is accepted when
    n <= 3 * floor((g-1)/(r-1)).
    """

    g: int
    r: int
    d: int
    m: int
    q: int
    z: int
    n: int

    @property
    def v(self) -> int:
        return self.g * self.r


@dataclass(frozen=True)
class Status:
    """Classification of one (v, m) pair."""

    kind: str  # "known" | "unknown" | "impossible"
    certificate: Certificate | None = None

    @property
    def is_known(self) -> bool:
        return self.kind == "known"

    def letter(self) -> str:
        if self.kind == "unknown":
            return "?"
        if self.kind == "impossible":
            return "!"
        assert self.certificate is not None
        return self.certificate.letter


# ---------------------------------------------------------------------------
# The ordering-window bound (letter A).


def chw_M(u: int, v: int) -> int:
    """Exact floor of (1/3) ((u-2)/u) (2(v-6u+1)^2 / (2v+6u^2-9u+2)).

    Evaluated in exact rational arithmetic; no floating point is
    involved.  The formula is defined for any positive u and v, even
    outside the applicability region of the bound (see
    :func:`chw_applicable`).
    """
    if u < 1:
        raise DomainError(f"u must be positive, got {u}")
    if v < 1:
        raise DomainError(f"v must be positive, got {v}")
    value = (Fraction(1, 3) * Fraction(u - 2, u)
             * Fraction(2 * (v - 6 * u + 1) ** 2, 2 * v + 6 * u * u - 9 * u + 2))
    return math.floor(value)


def chw_applicable(u: int, v: int) -> bool:
    """True iff the window bound's hypotheses hold for (u, v).

    Admissible u form the arithmetic progression 88, 94, 100, ... (step
    6 from the least admissible value 88), and v must be an admissible
    order with v >= max(9u^2 + 9u, 99u).
    """
    return (u % 6 == 88 % 6 and u >= 88 and admissible(v)
            and v >= max(9 * u * u + 9 * u, 99 * u))


def chw_bound(v: int) -> int:
    """Best window bound over all applicable u; 0 when none applies.

    Every admissible v <= 70487 gets 0: the least admissible u is 88,
    which already requires v >= 9*88^2 + 9*88 = 70488.  Inadmissible v
    also yield 0 rather than an error, so the bound can be queried for
    arbitrary orders.
    """
    if v < 1:
        raise DomainError(f"v must be positive, got {v}")
    best = 0
    u = 88
    while 9 * u * u + 9 * u <= v:
        if chw_applicable(u, v):
            best = max(best, chw_M(u, v))
        u += 6
    return best


def _letter_a(v: int, m: int) -> Certificate | None:
    u = 88
    while 9 * u * u + 9 * u <= v:
        if chw_applicable(u, v) and chw_M(u, v) >= m:
            return _cert("A", u=u)
        u += 6
    return None


# ---------------------------------------------------------------------------
# Letters B through G.


def theorem_b(v: int, m: int) -> Certificate | None:
    """Small-order coverage: every m <= v/3 for admissible 14 <= v <= 32."""
    if admissible(v) and 14 <= v <= 32 and 1 <= m <= v // 3:
        return _cert("B")
    return None


def theorem_c(v: int) -> Certificate | None:
    """Class size 4: admissible v >= 19, v not 21 or 27, with 4 | b(v)."""
    if admissible(v) and v >= 19 and v not in (21, 27) \
            and triple_count(v) % 4 == 0:
        return _cert("C")
    return None


def theorem_d(source: int) -> tuple[int, int, Certificate] | None:
    """From v0 = 3 (mod 6), v0 > 9: a KSS(4*v0 - 3, v0 - 1).

    Returns (target order, class size, certificate).
    """
    if source % 6 == 3 and source > 9:
        return 4 * source - 3, source - 1, _cert("D", source=source)
    return None


def theorem_d_inverse(v: int, m: int) -> Certificate | None:
    """Match (v, m) against the (4*v0-3, v0-1) pattern."""
    if (v + 3) % 4 != 0:
        return None
    source = (v + 3) // 4
    if source % 6 == 3 and source > 9 and m == source - 1:
        return _cert("D", source=source)
    return None


def theorem_e(v: int) -> tuple[int, Certificate] | None:
    """For v = 1 (mod 6): class size (v - 1)/6.  Returns (m, certificate)."""
    if v % 6 == 1 and v >= 7:
        return (v - 1) // 6, _cert("E")
    return None


def theorem_f(g: int) -> tuple[int, int, Certificate] | None:
    """For g = 3 (mod 6): a KSS(g^2, g(g-1)/3).

    Returns (order, class size, certificate).  Note the g = 3 corner
    formally asserts KSS(9, 2), which exhaustive search refutes; the
    classifier resolves that conflict in favour of the registered
    nonexistence fact.
    """
    if g % 6 == 3:
        return g * g, g * (g - 1) // 3, _cert("F", g=g)
    return None


def theorem_f_inverse(v: int, m: int) -> Certificate | None:
    g = math.isqrt(v)
    if g * g == v and g % 6 == 3 and m == g * (g - 1) // 3:
        return _cert("F", g=g)
    return None


def evaluate_gr(v: int, g: int, r: int, d: int) -> GrCertificate | None:
    """Run the full rule-G arithmetic chain for one (g, r, d) candidate.

    Returns the evaluation record when the divisibility and range
    conditions hold and N comes out a nonnegative integer; the final
    acceptance bound is checked separately by :func:`gr_bound_ok` so
    that rejected candidates can still be inspected.
    """
    if v != g * r or g % 6 != 3 or r % 6 != 3:
        return None
    if not (3 <= d <= r):
        return None
    if (r * (v - 1) // 2) % d != 0 or (d * g) % r != 0:
        return None
    m = d * g // 3
    q = (v - 3 * m) // (3 * (d // 3))
    z = next(zz for zz in range(r) if (3 * d * (q + 1 + zz)) % r == 0)
    numerator = 3 * (d * (q + 1 + z) - (v - 3 * m))
    if numerator < 0 or numerator % r != 0:
        return None
    return GrCertificate(g, r, d, m, q, z, numerator // r)


def gr_bound_ok(cert: GrCertificate) -> bool:
    return cert.n <= 3 * ((cert.g - 1) // (cert.r - 1))


def theorem_g(v: int, m: int) -> GrCertificate | None:
    """Search all factorizations v = g * r and divisors d for class size m.

    Accepts a candidate iff N is a nonnegative integer with
    N <= 3*floor((g-1)/(r-1)); ties broken by smallest (r, d).
    """
    require_admissible(v)
    candidates: list[GrCertificate] = []
    for g in range(3, v + 1):
        if v % g != 0 or g % 6 != 3:
            continue
        r = v // g
        if r % 6 != 3:
            continue
        for d in range(3, r + 1):
            if (d * g) % r != 0 or d * g != 3 * m:
                continue
            ev = evaluate_gr(v, g, r, d)
            if ev is not None and gr_bound_ok(ev):
                candidates.append(ev)
    if not candidates:
        return None
    return min(candidates, key=lambda c: (c.r, c.d))


def _gr_to_certificate(ev: GrCertificate) -> Certificate:
    return _cert("G", g=ev.g, r=ev.r, d=ev.d, q=ev.q, z=ev.z, N=ev.n)


def _letter_certificate(v: int, m: int) -> Certificate | None:
    """First matching rule among A..G, in that fixed priority order."""
    cert = _letter_a(v, m)
    if cert:
        return cert
    cert = theorem_b(v, m)
    if cert:
        return cert
    if m == 4:
        cert = theorem_c(v)
        if cert:
            return cert
    cert = theorem_d_inverse(v, m)
    if cert:
        return cert
    hit = theorem_e(v)
    if hit and hit[0] == m:
        return hit[1]
    cert = theorem_f_inverse(v, m)
    if cert:
        return cert
    ev = theorem_g(v, m)
    if ev:
        return _gr_to_certificate(ev)
    return None


def _kirkman_base(v: int, m: int) -> Certificate | None:
    """Resolvable base fact: KSS(v, v/3) exists for every v = 3 (mod 6)."""
    if v % 6 == 3 and m == v // 3:
        return _cert("K")
    return None


# ---------------------------------------------------------------------------
# Certificate registry.


class CertificateRegistry:
    """Shared store of registered facts keyed by (v, m).

    Ships with the built-in nonexistence fact for (9, 2): the unique
    triple system of order 9 has a disjointness graph made of four
    triangles, so its twelve triples admit no perfect matching into six
    disjoint pairs (re-derivable by exhaustive search in milliseconds).

    Reads are lock-free; registration takes an exclusive lock.
    Serialization is one certificate per line, ``v m LETTER key=value``,
    sorted by (v, m), LF line endings.
    """

    def __init__(self, seed_base_facts: bool = True):
        self._facts: dict[tuple[int, int], Certificate] = {}
        self._lock = threading.Lock()
        self.base_dir = Path.cwd()
        if seed_base_facts:
            self._facts[(9, 2)] = _cert("!", method="exhaustive-backtrack",
                                        scope="unique-system")

    def register(self, v: int, m: int, cert: Certificate) -> None:
        if cert.letter not in ALL_LETTERS:
            raise DomainError(f"unknown certificate letter {cert.letter!r}")
        with self._lock:
            existing = self._facts.get((v, m))
            if existing is not None and existing.letter != cert.letter:
                kinds = {existing.letter, cert.letter}
                if "!" in kinds:
                    raise DomainError(
                        f"conflicting certificates for ({v}, {m}): "
                        f"{existing.letter} vs {cert.letter}")
            self._facts[(v, m)] = cert

    def lookup(self, v: int, m: int) -> Certificate | None:
        return self._facts.get((v, m))

    def impossible_for(self, v: int, m: int) -> Certificate | None:
        cert = self._facts.get((v, m))
        return cert if cert is not None and cert.letter == "!" else None

    def known_for(self, v: int, m: int) -> Certificate | None:
        cert = self._facts.get((v, m))
        return cert if cert is not None and cert.letter in KNOWN_LETTERS else None

    def items(self) -> list[tuple[int, int, Certificate]]:
        return [(v, m, c) for (v, m), c in sorted(self._facts.items())]

    def save(self, path: str | Path) -> None:
        path = Path(path)
        lines = [c.render(v, m) for v, m, c in self.items()]
        path.write_text("".join(line + "\n" for line in lines),
                        encoding="ascii")

    @classmethod
    def load(cls, path: str | Path) -> "CertificateRegistry":
        path = Path(path)
        reg = cls()
        reg.base_dir = path.resolve().parent
        for lineno, raw in enumerate(path.read_text(encoding="ascii").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) < 3:
                raise ValueError(f"{path}:{lineno}: expected 'v m LETTER ...'")
            try:
                v, m = int(fields[0]), int(fields[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad v/m: {exc}") from None
            letter = fields[2]
            if letter not in ALL_LETTERS:
                raise ValueError(f"{path}:{lineno}: unknown letter {letter!r}")
            params = []
            for item in fields[3:]:
                if "=" not in item:
                    raise ValueError(f"{path}:{lineno}: bad key=value {item!r}")
                key, _, val = item.partition("=")
                params.append((key, int(val) if val.lstrip("-").isdigit() else val))
            reg.register(v, m, Certificate(letter, tuple(params)))
        return reg


_DEFAULT_REGISTRY = CertificateRegistry()


# ---------------------------------------------------------------------------
# Splitting and classification.


def _base_known_map(v: int, registry: CertificateRegistry) -> dict[int, Certificate]:
    """Known class sizes for order v before any splitting: rule letters,
    the resolvable base fact, and registered witnesses."""
    known: dict[int, Certificate] = {}
    for size in range(1, max_ppc_size(v) + 1):
        if registry.impossible_for(v, size):
            continue
        cert = _letter_certificate(v, size) or _kirkman_base(v, size) \
            or registry.known_for(v, size)
        if cert is not None:
            known[size] = cert
    return known


def _split_closure(v: int, known: dict[int, Certificate]) -> dict[int, Certificate]:
    """Add splitting derivations until a fixed point is reached.

    A child size m is derivable from a known base M when m | M and
    b(v) mod M < m: cutting each size-M class into M/m chunks then
    yields exactly floor(b/m) classes.  The largest valid base is
    recorded in the certificate.
    """
    b = triple_count(v)
    known = dict(known)
    changed = True
    while changed:
        changed = False
        for m in range(max_ppc_size(v), 0, -1):
            if m in known:
                continue
            bases = [big for big in known
                     if big > m and big % m == 0 and b % big < m]
            if bases:
                known[m] = _cert("S", base=max(bases))
                changed = True
    return known


def split_derivation(v: int, m: int,
                     registry: CertificateRegistry | None = None) -> Certificate | None:
    """Splitting certificate for (v, m), or None.

    Bases are every known class size for order v (rule letters, the
    resolvable base fact, registered witnesses, and splits thereof);
    the identity base M = m is allowed.  Among valid bases the largest
    is chosen.
    """
    if not admissible(v) or m < 1 or m > max_ppc_size(v):
        return None
    registry = registry or _DEFAULT_REGISTRY
    known = _split_closure(v, _base_known_map(v, registry))
    b = triple_count(v)
    bases = [big for big in known if big % m == 0 and b % big < m]
    if not bases:
        return None
    return _cert("S", base=max(bases))


def classification_map(v: int,
                       registry: CertificateRegistry | None = None) -> dict[int, Status]:
    """Status of every pair (v, m) for 1 <= m <= mu(v).

    Priority per pair: registered nonexistence dominates everything;
    then rule letters A..G in order, the resolvable base fact K, proper
    splitting derivations S (iterated to a fixed point), registered
    witnesses W; otherwise unknown.
    """
    require_admissible(v)
    registry = registry or _DEFAULT_REGISTRY
    statuses: dict[int, Status] = {}
    base = _base_known_map(v, registry)
    closed = _split_closure(v, base)
    for m in range(1, max_ppc_size(v) + 1):
        imp = registry.impossible_for(v, m)
        if imp is not None:
            statuses[m] = Status("impossible", imp)
            continue
        cert = _letter_certificate(v, m) or _kirkman_base(v, m) \
            or closed.get(m) or registry.known_for(v, m)
        statuses[m] = Status("known", cert) if cert else Status("unknown")
    return statuses


def classify(v: int, m: int,
             registry: CertificateRegistry | None = None) -> Status:
    """Status of one pair (v, m); see :func:`classification_map`."""
    require_admissible(v)
    if m < 1 or m > max_ppc_size(v):
        raise DomainError(f"class size {m} outside 1..{max_ppc_size(v)} for v={v}")
    return classification_map(v, registry)[m]


# ---------------------------------------------------------------------------
# Replay.


def replay(v: int, m: int, cert: Certificate,
           registry: CertificateRegistry | None = None) -> bool:
    """Re-validate a certificate's side conditions from scratch.

    Letters A..G, K and S re-run their defining arithmetic.  W re-reads
    and re-verifies the referenced design file (relative paths resolve
    against the registry's base directory).  ``!`` checks its scope:
    nonexistence is only ever claimed for orders with a unique triple
    system (v <= 9); the exhaustive re-derivation itself lives in the
    search layer and the test suite.
    """
    registry = registry or _DEFAULT_REGISTRY
    letter = cert.letter
    if letter == "A":
        u = cert.get("u")
        return (isinstance(u, int) and chw_applicable(u, v)
                and chw_M(u, v) >= m)
    if letter == "B":
        return theorem_b(v, m) is not None
    if letter == "C":
        return m == 4 and theorem_c(v) is not None
    if letter == "D":
        got = theorem_d_inverse(v, m)
        return got is not None and got.get("source") == cert.get("source")
    if letter == "E":
        hit = theorem_e(v)
        return hit is not None and hit[0] == m
    if letter == "F":
        got = theorem_f_inverse(v, m)
        return got is not None and got.get("g") == cert.get("g")
    if letter == "G":
        g, r, d = cert.get("g"), cert.get("r"), cert.get("d")
        if not all(isinstance(x, int) for x in (g, r, d)):
            return False
        ev = evaluate_gr(v, g, r, d)
        return (ev is not None and gr_bound_ok(ev) and ev.m == m
                and ev.q == cert.get("q") and ev.z == cert.get("z")
                and ev.n == cert.get("N"))
    if letter == "K":
        return v % 6 == 3 and m == v // 3
    if letter == "S":
        big = cert.get("base")
        if not isinstance(big, int) or big < m or big % m != 0:
            return False
        if triple_count(v) % big >= m:
            return False
        if big == m:
            base_cert = (_letter_certificate(v, big) or _kirkman_base(v, big)
                         or registry.known_for(v, big))
            return base_cert is not None
        return classify(v, big, registry).is_known
    if letter == "W":
        from .designfile import read_design
        from .core import is_kss
        ref = cert.get("file")
        if not isinstance(ref, str):
            return False
        path = Path(ref)
        if not path.is_absolute():
            path = registry.base_dir / path
        try:
            ss = read_design(path)
        except (OSError, ValueError):
            return False
        return ss.system.v == v and ss.m == m and is_kss(ss)
    if letter == "!":
        return v in (7, 9) and 1 <= m <= max_ppc_size(v)
    return False
