"""Search for signal-set witnesses at desk scale.

Four decomposition strategies carve a *given* complete system into
classes:

- :func:`backtrack_decompose` — exact, symmetry-broken backtracking.
  The only method that can return ``exhausted`` (no decomposition of
  this particular system exists).
- :func:`greedy_decompose` — randomized repeated extraction of one
  class at a time, covering the most constrained points first.
- :func:`local_search_decompose` — conflict-swap hill climbing over
  full assignments, restarting on plateaus.
- :func:`order_triples` — sequences the triples so that every window of
  W consecutive ones is pairwise vertex-disjoint;
  :func:`kss_from_ordering` then cuts the prefix into classes.

:func:`climb_signal_set` additionally *builds the system and the
classes together* (the triple system is an output, not an input), which
is how witnesses whose existence is promised by the catalog rules are
realized in practice; :func:`realize` wires that to the classifier.

All searches are deterministic for a fixed seed: the only randomness is
a seeded generator, node/restart limits are exact, and transcripts hash
identically across runs.  A wall-clock limit is available as a safety
net but is off by default since tripping it can break replay.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from random import Random

from .core import (DomainError, SignalSet, Triple, TripleSystem, is_kss,
                   split_signal_set, triple_count, verify_signal_set,
                   verify_triple_system)
from .systems import known_system
from .theorems import CertificateRegistry, classify

__all__ = [
    "SearchParams",
    "Transcript",
    "SearchResult",
    "Ordering",
    "backtrack_decompose",
    "greedy_decompose",
    "local_search_decompose",
    "order_triples",
    "kss_from_ordering",
    "climb_signal_set",
    "realize",
]

FOUND = "found"
EXHAUSTED = "exhausted"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SearchParams:
    """Budgets for one search run.  All limits must be positive."""

    seed: int = 1
    node_limit: int = 2_000_000
    restart_limit: int = 400
    time_limit: float | None = None  # seconds; None = rely on node budget

    def __post_init__(self) -> None:
        if self.node_limit < 1 or self.restart_limit < 1:
            raise DomainError("search limits must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise DomainError("time limit must be positive")


@dataclass(frozen=True)
class Transcript:
    """Reproducibility record of one search run.

    The hash covers the deterministic fields and the witness content,
    never the wall time.
    """

    method: str
    seed: int
    nodes: int
    restarts: int
    outcome: str
    elapsed: float
    witness_digest: str = ""

    @property
    def transcript_hash(self) -> str:
        blob = f"{self.method}|{self.seed}|{self.nodes}|{self.restarts}|" \
               f"{self.outcome}|{self.witness_digest}"
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SearchResult:
    kind: str  # found | exhausted | inconclusive
    signal_set: SignalSet | None
    transcript: Transcript

    @property
    def found(self) -> bool:
        return self.kind == FOUND


@dataclass(frozen=True)
class Ordering:
    """A permutation of a system's triples with a disjointness window:
    any ``window`` consecutive triples are pairwise vertex-disjoint."""

    system: TripleSystem
    permutation: tuple[int, ...]
    window: int


class _Budget:
    """Node/deadline bookkeeping shared by the searches."""

    def __init__(self, params: SearchParams):
        self.nodes = 0
        self.limit = params.node_limit
        self.deadline = (time.monotonic() + params.time_limit
                         if params.time_limit is not None else None)
        self.exceeded = False

    def tick(self) -> bool:
        """Count one node; True while budget remains."""
        self.nodes += 1
        if self.nodes >= self.limit:
            self.exceeded = True
        elif self.deadline is not None and self.nodes % 256 == 0 \
                and time.monotonic() > self.deadline:
            self.exceeded = True
        return not self.exceeded


class _BudgetExceeded(Exception):
    pass


def _mask(t: Triple) -> int:
    return (1 << t[0]) | (1 << t[1]) | (1 << t[2])


def _witness_digest(ss: SignalSet | None) -> str:
    if ss is None:
        return ""
    canon = tuple(tuple(sorted(ss.system.triples[i] for i in cls))
                  for cls in ss.classes)
    return hashlib.sha256(repr(canon).encode()).hexdigest()


def _check_decompose_args(sts: TripleSystem, m: int) -> None:
    if not sts.complete:
        raise DomainError("decomposition needs a complete triple system")
    if not verify_triple_system(sts).ok:
        raise DomainError("decomposition needs a verified triple system")
    if not 1 <= m <= sts.v // 3:
        raise DomainError(f"class size {m} outside 1..{sts.v // 3}")


def _classes_to_signal_set(v: int, m: int,
                           classes: list[list[Triple]]) -> SignalSet:
    """Assemble and sanity-check a witness from explicit class contents."""
    triples: list[Triple] = []
    index_classes: list[tuple[int, ...]] = []
    for cls in classes:
        start = len(triples)
        triples.extend(sorted(cls))
        index_classes.append(tuple(range(start, start + len(cls))))
    ss = SignalSet(TripleSystem(v, tuple(triples)), m, tuple(index_classes))
    report = verify_signal_set(ss)
    if not report.ok:  # a search bug, not a caller error
        raise AssertionError(f"search produced an invalid witness: "
                             f"{[str(x) for x in report.violations[:3]]}")
    return ss


def _result(method: str, params: SearchParams, kind: str,
            ss: SignalSet | None, budget: _Budget, restarts: int,
            t0: float) -> SearchResult:
    tr = Transcript(method, params.seed, budget.nodes, restarts, kind,
                    time.monotonic() - t0, _witness_digest(ss))
    return SearchResult(kind, ss, tr)


# ---------------------------------------------------------------------------
# Exact backtracking.


def backtrack_decompose(sts: TripleSystem, m: int,
                        params: SearchParams = SearchParams()) -> SearchResult:
    """Exact search for floor(b/m) classes of m disjoint triples.

    Symmetry is broken by building classes in lexicographic order of
    their minimal triple index and extending each class in increasing
    index order; when m does not divide b, the b mod m leftover triples
    may be discarded, also in index order.  ``exhausted`` means the full
    space was covered within budget: no decomposition of *this* system
    exists.  (Nonexistence of a KSS(v, m) altogether follows only when
    the system of order v is unique, v <= 9.)
    """
    _check_decompose_args(sts, m)
    t0 = time.monotonic()
    b = len(sts.triples)
    s = b // m
    budget_left = b - s * m
    masks = [_mask(t) for t in sts.triples]
    budget = _Budget(params)
    used = [False] * b
    classes: list[list[int]] = []
    current: list[int] = []

    def extend(next_free: int, spare: int) -> bool:
        # invoked between classes: current is empty
        if not budget.tick():
            raise _BudgetExceeded
        if len(classes) == s:
            return True
        lo = next_free
        while lo < b and used[lo]:
            lo += 1
        if lo >= b:
            return False
        # anchor the next class at the lowest unused triple ...
        used[lo] = True
        current.append(lo)
        if _extend_from(masks[lo], lo + 1, spare):
            return True
        current.pop()
        used[lo] = False
        # ... or discard it as a leftover
        if spare > 0:
            used[lo] = True
            if extend(lo + 1, spare - 1):
                return True
            used[lo] = False
        return False

    def _extend_from(cur_mask: int, start: int, spare: int) -> bool:
        if len(current) == m:
            classes.append(current.copy())
            current.clear()
            if extend(0, spare):
                return True
            current.extend(classes.pop())
            return False
        need = m - len(current)
        for t in range(start, b - need + 1):
            if used[t] or masks[t] & cur_mask:
                continue
            if not budget.tick():
                raise _BudgetExceeded
            used[t] = True
            current.append(t)
            if _extend_from(cur_mask | masks[t], t + 1, spare):
                return True
            current.pop()
            used[t] = False
        return False

    import sys
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * b + 1000))
    try:
        ok = extend(0, budget_left)
    except _BudgetExceeded:
        return _result("backtrack", params, INCONCLUSIVE, None, budget, 0, t0)
    if not ok:
        return _result("backtrack", params, EXHAUSTED, None, budget, 0, t0)
    ss = _classes_to_signal_set(sts.v, m,
                                [[sts.triples[i] for i in cls] for cls in classes])
    assert is_kss(ss)
    return _result("backtrack", params, FOUND, ss, budget, 0, t0)


# ---------------------------------------------------------------------------
# Greedy extraction.


def greedy_decompose(sts: TripleSystem, m: int,
                     params: SearchParams = SearchParams()) -> SearchResult:
    """Repeatedly extract one size-m class from the remaining triples.

    Within a class the candidate covering the currently most constrained
    point (fewest remaining compatible triples) is taken, ties broken by
    the seeded generator; a stuck attempt restarts from scratch.
    """
    _check_decompose_args(sts, m)
    t0 = time.monotonic()
    rng = Random(params.seed)
    b = len(sts.triples)
    s = b // m
    masks = [_mask(t) for t in sts.triples]
    budget = _Budget(params)

    for restart in range(params.restart_limit):
        avail = list(range(b))
        classes: list[list[int]] = []
        while len(classes) < s:
            cur: list[int] = []
            cur_mask = 0
            cands = avail.copy()
            while len(cur) < m:
                cands = [t for t in cands if not masks[t] & cur_mask]
                if not cands:
                    break
                if not budget.tick():
                    return _result("greedy", params, INCONCLUSIVE, None,
                                   budget, restart, t0)
                degree: dict[int, int] = {}
                for t in cands:
                    for p in sts.triples[t]:
                        degree[p] = degree.get(p, 0) + 1
                pick = min(cands,
                           key=lambda t: (min(degree[p] for p in sts.triples[t]),
                                          rng.random()))
                cur.append(pick)
                cur_mask |= masks[pick]
                cands.remove(pick)
            if len(cur) < m:
                break
            classes.append(cur)
            chosen = set(cur)
            avail = [t for t in avail if t not in chosen]
        if len(classes) == s:
            ss = _classes_to_signal_set(
                sts.v, m, [[sts.triples[i] for i in cls] for cls in classes])
            assert is_kss(ss)
            return _result("greedy", params, FOUND, ss, budget, restart, t0)
    return _result("greedy", params, INCONCLUSIVE, None, budget,
                   params.restart_limit, t0)


# ---------------------------------------------------------------------------
# Conflict-swap local search.


def _collision_delta(counts: list[int], t: Triple, sign: int) -> int:
    """Change in the per-class collision cost when adding (+1) or
    removing (-1) triple t; counts is the class's point multiplicity."""
    delta = 0
    for p in t:
        c = counts[p]
        delta += (c if sign > 0 else -(c - 1))
    return delta


def local_search_decompose(sts: TripleSystem, m: int,
                           params: SearchParams = SearchParams()) -> SearchResult:
    """Hill climbing over full class assignments.

    Cost is the number of same-class point-collision pairs plus any
    class-size deficit (zero here: assignments keep every class at
    exactly m triples, spare triples wait in a pool).  Moves swap a
    triple with the pool or with another class and are accepted when
    not worsening; a long plateau triggers a restart.
    """
    _check_decompose_args(sts, m)
    t0 = time.monotonic()
    rng = Random(params.seed)
    b = len(sts.triples)
    s = b // m
    budget = _Budget(params)
    plateau_limit = max(4000, 60 * b)

    for restart in range(params.restart_limit):
        order = list(range(b))
        rng.shuffle(order)
        classes = [order[i * m:(i + 1) * m] for i in range(s)]
        pool = order[s * m:]
        counts = [[0] * sts.v for _ in range(s)]
        class_cost = [0] * s
        for ci, cls in enumerate(classes):
            for t in cls:
                for p in sts.triples[t]:
                    class_cost[ci] += counts[ci][p]
                    counts[ci][p] += 1
        cost = sum(class_cost)
        best = cost
        stall = 0
        while cost > 0:
            if not budget.tick():
                return _result("local", params, INCONCLUSIVE, None,
                               budget, restart, t0)
            if stall > plateau_limit:
                break
            stall += 1
            if rng.random() < 0.8:
                hot = [ci for ci in range(s) if class_cost[ci] > 0]
                c = rng.choice(hot) if hot else rng.randrange(s)
            else:
                c = rng.randrange(s)
            i = rng.randrange(m)
            t_out = classes[c][i]
            if pool and rng.random() < 0.5:
                j = rng.randrange(len(pool))
                t_in = pool[j]
                delta = _move_delta(counts[c], sts, t_out, t_in)
                if delta <= 0:
                    _apply(counts[c], sts.triples[t_out], -1)
                    _apply(counts[c], sts.triples[t_in], +1)
                    classes[c][i], pool[j] = t_in, t_out
                    class_cost[c] += delta
                    cost += delta
            else:
                d = rng.randrange(s - 1) if s > 1 else c
                if d >= c:
                    d += 1
                if s == 1:
                    continue
                k = rng.randrange(m)
                t_other = classes[d][k]
                delta = _swap_delta(counts, class_cost, sts, c, i, d, k, classes)
                if delta <= 0:
                    dc = _move_delta(counts[c], sts, t_out, t_other)
                    dd = _move_delta(counts[d], sts, t_other, t_out)
                    _apply(counts[c], sts.triples[t_out], -1)
                    _apply(counts[c], sts.triples[t_other], +1)
                    _apply(counts[d], sts.triples[t_other], -1)
                    _apply(counts[d], sts.triples[t_out], +1)
                    classes[c][i], classes[d][k] = t_other, t_out
                    class_cost[c] += dc
                    class_cost[d] += dd
                    cost += delta
            if cost < best:
                best = cost
                stall = 0
        if cost == 0:
            ss = _classes_to_signal_set(
                sts.v, m, [[sts.triples[i] for i in cls] for cls in classes])
            assert is_kss(ss)
            return _result("local", params, FOUND, ss, budget, restart, t0)
    return _result("local", params, INCONCLUSIVE, None, budget,
                   params.restart_limit, t0)


def _apply(counts: list[int], t: Triple, sign: int) -> None:
    for p in t:
        counts[p] += sign


def _move_delta(counts: list[int], sts: TripleSystem,
                t_out: int, t_in: int) -> int:
    """Cost change in one class when t_out leaves and t_in enters."""
    out_t, in_t = sts.triples[t_out], sts.triples[t_in]
    delta = _collision_delta(counts, out_t, -1)
    overlap = sum(1 for p in in_t if p in out_t)
    delta += _collision_delta(counts, in_t, +1) - overlap
    return delta


def _swap_delta(counts, class_cost, sts, c, i, d, k, classes) -> int:
    return (_move_delta(counts[c], sts, classes[c][i], classes[d][k])
            + _move_delta(counts[d], sts, classes[d][k], classes[c][i]))


# ---------------------------------------------------------------------------
# Orderings with a disjointness window.


def order_triples(sts: TripleSystem, target_window: int,
                  params: SearchParams = SearchParams()) -> tuple[Ordering | None, Transcript]:
    """Permute all triples so any ``target_window`` consecutive ones are
    pairwise vertex-disjoint.

    Randomized backtracking with restarts; a returned ordering is
    re-validated by a brute sliding scan.  Returns (ordering, transcript)
    with ordering None when the search is inconclusive.
    """
    if not sts.complete:
        raise DomainError("ordering needs a complete triple system")
    if target_window < 1:
        raise DomainError("window must be positive")
    t0 = time.monotonic()
    rng = Random(params.seed)
    b = len(sts.triples)
    masks = [_mask(t) for t in sts.triples]
    budget = _Budget(params)
    w = target_window
    per_restart = max(1, params.node_limit // params.restart_limit)

    for restart in range(params.restart_limit):
        perm: list[int] = []
        used = [False] * b
        spent_before = budget.nodes
        ok = _order_dfs(perm, used, masks, b, w, rng, budget,
                        spent_before + per_restart)
        if ok:
            ordering = Ordering(sts, tuple(perm), w)
            assert _windows_ok(sts, perm, w)
            tr = Transcript("order", params.seed, budget.nodes, restart,
                            FOUND, time.monotonic() - t0,
                            hashlib.sha256(repr(tuple(perm)).encode()).hexdigest())
            return ordering, tr
        if budget.exceeded:
            break
    tr = Transcript("order", params.seed, budget.nodes, params.restart_limit,
                    INCONCLUSIVE, time.monotonic() - t0)
    return None, tr


def _order_dfs(perm, used, masks, b, w, rng, budget, node_cap) -> bool:
    if len(perm) == b:
        return True
    if budget.nodes >= node_cap or not budget.tick():
        return False
    window_mask = 0
    for t in perm[-(w - 1):] if w > 1 else []:
        window_mask |= masks[t]
    cands = [t for t in range(b) if not used[t] and not masks[t] & window_mask]
    rng.shuffle(cands)
    for t in cands:
        used[t] = True
        perm.append(t)
        if _order_dfs(perm, used, masks, b, w, rng, budget, node_cap):
            return True
        perm.pop()
        used[t] = False
    return False


def _windows_ok(sts: TripleSystem, perm: list[int] | tuple[int, ...],
                w: int) -> bool:
    """Brute re-scan: every length-w window pairwise disjoint."""
    triples = sts.triples
    for start in range(len(perm) - w + 1):
        chunk = [set(triples[t]) for t in perm[start:start + w]]
        for i in range(w):
            for j in range(i + 1, w):
                if chunk[i] & chunk[j]:
                    return False
    return True


def kss_from_ordering(ordering: Ordering, m: int) -> SignalSet:
    """Cut the first floor(b/m)*m triples of the permutation into
    consecutive chunks of m; valid whenever m <= the ordering's window."""
    if m < 1 or m > ordering.window:
        raise DomainError(f"chunk size {m} exceeds ordering window "
                          f"{ordering.window}")
    sts = ordering.system
    b = len(sts.triples)
    s = b // m
    classes = [[sts.triples[t] for t in ordering.permutation[i * m:(i + 1) * m]]
               for i in range(s)]
    ss = _classes_to_signal_set(sts.v, m, classes)
    assert is_kss(ss)
    return ss


# ---------------------------------------------------------------------------
# Witness construction with a free system.


def climb_signal_set(v: int, m: int,
                     params: SearchParams = SearchParams()) -> SearchResult:
    """Build floor(b/m) classes of m disjoint triples from scratch.

    Unlike the decomposition searches, the triple system is not fixed in
    advance: triples are invented as long as no point pair is covered
    twice, so the finished witness's system is whatever partial (or,
    when m | b, complete) system the climb ends on.  The move set
    follows the classic pair-coverage hill climb: place a triple on two
    free uncovered points of an unfilled class, evicting at most one
    previously placed triple, so progress is never negative.
    """
    triple_count(v)  # validates admissibility
    if not 1 <= m <= v // 3:
        raise DomainError(f"class size {m} outside 1..{v // 3}")
    t0 = time.monotonic()
    rng = Random(params.seed)
    b = triple_count(v)
    s = b // m
    budget = _Budget(params)
    plateau_limit = max(6000, 40 * b)

    kick_after = max(400, 3 * v)

    for restart in range(params.restart_limit):
        classes: list[list[Triple]] = [[] for _ in range(s)]
        class_mask = [0] * s
        home: dict[Triple, int] = {}
        cover: dict[int, Triple] = {}  # pair key p*v+q (p<q) -> triple
        placed = 0
        best = 0
        stall = 0
        while placed < s * m:
            if not budget.tick():
                return _result("climb", params, INCONCLUSIVE, None,
                               budget, restart, t0)
            if stall > plateau_limit:
                break
            if stall and stall % kick_after == 0 and placed:
                # plateau kick: evict a few random triples to reshuffle
                for _ in range(min(3, placed)):
                    trip = rng.choice(list(home))
                    placed -= _remove(trip, home, classes, class_mask, cover, v)
            stall += 1
            j = rng.randrange(s)
            if len(classes[j]) >= m:
                continue
            free_mask = class_mask[j]
            x = _free_point(rng, v, free_mask)
            # partners for x: free points of the class with pair (x, .) uncovered
            partners = [y for y in range(v)
                        if y != x and not free_mask & (1 << y)
                        and _pairkey(v, x, y) not in cover]
            if len(partners) < 2:
                continue
            y, z = rng.sample(partners, 2)
            blocker = cover.get(_pairkey(v, y, z))
            if blocker is not None:
                placed -= _remove(blocker, home, classes, class_mask, cover, v)
            _place((x, y, z), j, home, classes, class_mask, cover, v)
            placed += 1
            if placed > best:
                best = placed
                stall = 0
        if placed == s * m:
            ss = _classes_to_signal_set(v, m, classes)
            assert is_kss(ss)
            return _result("climb", params, FOUND, ss, budget, restart, t0)
    return _result("climb", params, INCONCLUSIVE, None, budget,
                   params.restart_limit, t0)


def _pairkey(v: int, p: int, q: int) -> int:
    return p * v + q if p < q else q * v + p


def _free_point(rng: Random, v: int, mask: int) -> int:
    while True:
        p = rng.randrange(v)
        if not mask & (1 << p):
            return p


def _place(t: tuple[int, int, int], j: int, home, classes, class_mask,
           cover, v: int) -> None:
    trip: Triple = tuple(sorted(t))  # type: ignore[assignment]
    classes[j].append(trip)
    class_mask[j] |= _mask(trip)
    home[trip] = j
    a, bb, c = trip
    cover[_pairkey(v, a, bb)] = trip
    cover[_pairkey(v, a, c)] = trip
    cover[_pairkey(v, bb, c)] = trip


def _remove(trip: Triple, home, classes, class_mask, cover, v: int) -> int:
    j = home.pop(trip)
    classes[j].remove(trip)
    class_mask[j] ^= _mask(trip)
    a, bb, c = trip
    del cover[_pairkey(v, a, bb)]
    del cover[_pairkey(v, a, c)]
    del cover[_pairkey(v, bb, c)]
    return 1


# ---------------------------------------------------------------------------
# Certificate-guided realization.


def realize(v: int, m: int, registry: CertificateRegistry | None = None,
            params: SearchParams = SearchParams()) -> SearchResult:
    """Produce a verified KSS(v, m) witness guided by the classifier.

    Splitting certificates recurse on their base class size and cut the
    resulting witness; everything else (rule letters, the resolvable
    base fact, unknown status) goes to the from-scratch climb.  A
    registered nonexistence fact short-circuits to ``exhausted``.
    """
    status = classify(v, m, registry)
    if status.kind == "impossible":
        tr = Transcript("certificate", params.seed, 0, 0, EXHAUSTED, 0.0)
        return SearchResult(EXHAUSTED, None, tr)
    cert = status.certificate
    if cert is not None and cert.letter == "S":
        base = cert.get("base")
        base_result = realize(v, base, registry, params)
        if not base_result.found:
            return base_result
        ss = split_signal_set(base_result.signal_set, m)
        tr = Transcript("split", params.seed, base_result.transcript.nodes,
                        base_result.transcript.restarts, FOUND,
                        base_result.transcript.elapsed, _witness_digest(ss))
        return SearchResult(FOUND, ss, tr)
    return climb_signal_set(v, m, params)
