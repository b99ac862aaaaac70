"""Exact limit-component classifiers for translated orbit measures.

A sequence of translated homogeneous measures is described by a subgroup from
the catalog, a rational direction ``v`` (the torus part moves as
``exp(n*v)``), a fixed bounded offset with entries in a real quadratic field,
and a conjugation policy.  Under this exponential model every "does this root
value grow / stay / decay" question is the sign of an exact rational pairing,
and every question about a bounded entry ("rational or badly approximable?")
is decidable in Q(tau).  The classifiers walk the resulting decision trees
and report the predicted supporting parabolic, the support kind, and the
ordered branch trace.

The SL3 walk is organised in three levels mirroring how escape is peeled off:

* level G -- scan for a witness ``(w, wall)``: a Weyl twist and a maximal
  parabolic whose conjugate contains the group, with positive escape rate.
  Wall ``alpha2`` is preferred (the ``alpha1`` walk is its mirror image under
  the outer automorphism ``g -> J g^-T J``, applied and undone here);
* level M -- the leftover dynamics in the 2x2 block of the wall's Levi:
  trivial / line / full projections each get a sub-walk, with cusp
  excursions normalised by an exact integer Moebius move;
* junction -- the final state machine on the pair of residual rates
  ``(rho_y, rho_x)`` and the residual bounded entry ``t``.  Node labels in
  the branch trace (``2.2.1``, ``2.2.2.2.1``, ...) are this tree's own
  numbering, also used by the bundled scenario names.

>>> rs = build_type_a(3)
>>> I, cert = unip_limit_I([2, -1, -1], rs)
>>> (sorted(I), cert[0])
([1], Fraction(3, 1))
>>> seq = sequence_spec(one_param_unipotent(3, (1, 2)), [9, -6, -3])
>>> verdict = sl3_classify(seq)
>>> (sorted(verdict.P.I), verdict.support_kind)
([1], 'boundary_homogeneous')
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Sequence, Tuple, Union

import numpy as np

from .lingrp import GroupElement, ParabolicIndex, d_function
from .measures import SubgroupSpec, lie_generators, one_param_unipotent
from .qfield import (
    QMatrix,
    QuadNum,
    qmat,
    qmat_identity,
    qmat_is_upper_unitriangular,
    qmat_mul,
    qmat_unipotent_inverse,
)
from .reduction import enumerate_gamma
from .rootsys import (
    RootSystem,
    WeylElement,
    _coordinate_blocks,
    _invert_rational_matrix,
    build_product,
    build_type_a,
    locate_chamber,
    levi_sphere,
    make_vector,
    pairing,
    quasi_fundamental_weights,
    weyl_elements,
)

__all__ = [
    "NotCoveredError",
    "SequenceSpec",
    "LimitDescriptor",
    "ProductParabolicIndex",
    "sequence_spec",
    "root_system_for",
    "sequence_translate",
    "delta_truncated",
    "parabolics_containing",
    "unip_limit_I",
    "ma_split",
    "sl3_classify",
    "sl2r_classify",
    "levi_translate_classify",
]

SUPPORT_KINDS = ("interior", "boundary_homogeneous", "dirac_point")

FracMatrix = Tuple[Tuple[Fraction, ...], ...]
IntMatrix = Tuple[Tuple[int, ...], ...]


class NotCoveredError(Exception):
    """Raised when the input is outside the encoded decision trees.

    The trees cover exactly the catalog kinds in their normal positions;
    anything else is rejected rather than guessed.
    """


def _not_covered(msg: str) -> "NotCoveredError":
    return NotCoveredError(f"not covered by the encoded decision tree: {msg}")


# ---------------------------------------------------------------------------
# sequence descriptions


def root_system_for(spec: SubgroupSpec) -> RootSystem:
    if spec.kind == "product":
        return build_product([2] * len(spec.factors))
    return build_type_a(spec.n)


@dataclass(frozen=True)
class SequenceSpec:
    """A sequence of translated measures: subgroup, direction, offsets.

    ``direction`` is an ambient exponent vector (summing to zero on each
    factor), so the torus part at evaluation index n is ``exp(n*direction)``.
    ``bounded_part`` is a fixed offset with entries in Q(tau) (None means the
    identity; the string ``"bounded"`` records an offset known only to be
    bounded -- branches that must read its entries then refuse).
    ``conjugator_policy`` is ``"identity"`` or ``"recorded"``; a recorded
    integer left factor is struck out during ingestion, which is what makes
    classification insensitive to it.  ``stage`` selects the entry point of
    the SL3 walk: ``"raw"`` for ordinary data, ``"block_reduced"`` for data
    already pushed through the block-reduction steps (the only way to reach
    the deepest branches, whose preconditions raw data cannot meet).
    """

    subgroup: SubgroupSpec
    direction: Tuple[Fraction, ...]
    bounded_part: Union[None, str, QMatrix, Tuple[QMatrix, ...]] = None
    conjugator_policy: str = "identity"
    recorded_conjugator: Union[None, IntMatrix, Tuple[IntMatrix, ...]] = None
    indices: Tuple[int, ...] = (1, 2, 4)
    stage: str = "raw"

    def __post_init__(self) -> None:
        rs = root_system_for(self.subgroup)
        object.__setattr__(self, "direction", make_vector(rs, self.direction))
        idx = tuple(int(i) for i in self.indices)
        if not idx or any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 1:
            raise ValueError("indices must be strictly increasing positive integers")
        object.__setattr__(self, "indices", idx)
        if self.conjugator_policy not in ("identity", "recorded"):
            raise ValueError(f"unknown conjugator policy {self.conjugator_policy!r}")
        if (self.recorded_conjugator is not None) != (self.conjugator_policy == "recorded"):
            raise ValueError("recorded policy needs a recorded conjugator, and only then")
        if self.stage not in ("raw", "block_reduced"):
            raise ValueError(f"unknown stage {self.stage!r}")
        object.__setattr__(self, "bounded_part", _coerce_bounded(self.subgroup, self.bounded_part))

    @property
    def rs(self) -> RootSystem:
        return root_system_for(self.subgroup)


def _coerce_bounded(spec: SubgroupSpec, bounded):
    if bounded is None or bounded == "bounded":
        return bounded
    r, n = spec.shape
    if spec.kind == "product":
        mats = tuple(qmat(b) for b in bounded)
        if len(mats) != r or any(len(m) != 2 or len(m[0]) != 2 for m in mats):
            raise ValueError(f"need {r} bounded 2x2 factors")
        return mats
    m = qmat(bounded)
    if len(m) != n or any(len(row) != n for row in m):
        raise ValueError(f"bounded part must be {n}x{n}")
    return m


def sequence_spec(
    subgroup: SubgroupSpec,
    direction: Sequence,
    bounded_part=None,
    conjugator_policy: str = "identity",
    recorded_conjugator=None,
    indices: Sequence[int] = (1, 2, 4),
    stage: str = "raw",
) -> SequenceSpec:
    """Convenience constructor with plain-Python arguments."""
    rec = recorded_conjugator
    if rec is not None:
        if subgroup.kind == "product":
            rec = tuple(tuple(tuple(int(v) for v in row) for row in g) for g in rec)
        else:
            rec = tuple(tuple(int(v) for v in row) for row in rec)
    return SequenceSpec(
        subgroup=subgroup,
        direction=tuple(Fraction(x) for x in direction),
        bounded_part=bounded_part,
        conjugator_policy=conjugator_policy,
        recorded_conjugator=rec,
        indices=tuple(indices),
        stage=stage,
    )


@dataclass(frozen=True)
class ProductParabolicIndex:
    """Standard parabolic of a product of SL2 factors: factor i keeps its
    full SL2 exactly when i is in I, and degenerates to the Borel otherwise.
    Plays the role ParabolicIndex plays for a single factor."""

    factors: int
    I: FrozenSet[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "I", frozenset(self.I))
        if not all(0 <= i < self.factors for i in self.I):
            raise ValueError(f"factor indices {sorted(self.I)} out of range")

    @property
    def is_group(self) -> bool:
        return len(self.I) == self.factors


@dataclass(frozen=True)
class LimitDescriptor:
    """Predicted limit: supporting parabolic (up to integer conjugacy),
    support kind, and the ordered branch trace that produced it."""

    P: Union[ParabolicIndex, ProductParabolicIndex]
    support_kind: str
    notes: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.support_kind not in SUPPORT_KINDS:
            raise ValueError(f"unknown support kind {self.support_kind!r}")
        if (self.support_kind == "interior") != self.P.is_group:
            raise ValueError("interior support exactly for the full group")
        object.__setattr__(self, "notes", tuple(self.notes))


def _verdict(P, gens_present: bool, notes) -> LimitDescriptor:
    if P.is_group:
        return LimitDescriptor(P, "interior", notes)
    kind = "boundary_homogeneous" if gens_present else "dirac_point"
    return LimitDescriptor(P, kind, notes)


# ---------------------------------------------------------------------------
# exact rational matrix plumbing


def _rat_mul(a: FracMatrix, b: FracMatrix) -> FracMatrix:
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def _rat_of_int(rows) -> FracMatrix:
    return tuple(tuple(Fraction(int(v)) for v in row) for row in rows)


def _block_of(P: ParabolicIndex) -> List[int]:
    """Block index of each matrix row/column."""
    out = [0] * P.n
    for b, (lo, hi) in enumerate(P.block_ranges()):
        for r in range(lo, hi):
            out[r] = b
    return out


def _lie_fits(X: FracMatrix, P: ParabolicIndex) -> bool:
    blk = _block_of(P)
    n = P.n
    return all(
        X[r][c] == 0 for r in range(n) for c in range(n) if blk[r] > blk[c]
    )


def _group_fits(m: QMatrix, P: ParabolicIndex) -> bool:
    blk = _block_of(P)
    n = P.n
    return all(
        m[r][c].is_zero() for r in range(n) for c in range(n) if blk[r] > blk[c]
    )


def _perm_sign(p: Sequence[int]) -> int:
    sign = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def _weyl_rep_exact(w: WeylElement) -> FracMatrix:
    """Integer determinant-one representative of a single-factor Weyl
    element: signed permutation, last column negated for odd permutations."""
    (p,) = w.perms
    n = len(p)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i, target in enumerate(p):
        rows[target][i] = Fraction(1)
    if _perm_sign(p) < 0:
        for r in range(n):
            rows[r][n - 1] = -rows[r][n - 1]
    return tuple(tuple(r) for r in rows)


def _rat_transpose(m: FracMatrix) -> FracMatrix:
    return tuple(zip(*m))


def _q_of_rat(m: FracMatrix) -> QMatrix:
    return qmat(m)


def _wall_parabolic(n: int, alpha: int) -> ParabolicIndex:
    """The maximal parabolic whose single wall sits at simple root alpha."""
    return ParabolicIndex(n, frozenset(range(n - 1)) - {alpha})


def _cross_rate(P: ParabolicIndex, v: Sequence[Fraction]) -> Fraction:
    """Exact decay exponent of the P-wedge norm along exp(-n*v): positive
    means the conjugate-P escape criterion fires along this direction."""
    return sum((v[r] - v[c] for r, c in P.nilradical_coordinates()), Fraction(0))


# ---------------------------------------------------------------------------
# truncated non-divergence quantity


def delta_truncated(spec: SubgroupSpec, g: GroupElement, height: int) -> float:
    """Truncated escape infimum: minimum of the maximal-parabolic d-values
    d(g^-1 * gamma) over enumerated integer gamma (entries bounded by
    ``height``) and walls alpha whose gamma-conjugate contains the group.
    Containment is decided exactly on Lie-algebra generators.  Returns
    ``inf`` when no witness is found; the result is an upper bound for the
    untruncated infimum (the enumeration is a finite window).

    >>> spec = one_param_unipotent(2, (0, 1))
    >>> round(delta_truncated(spec, GroupElement(np.eye(2)), 1), 12)
    1.0
    """
    gens = lie_generators(spec)
    n = spec.n
    walls = [_wall_parabolic(n, a) for a in range(n - 1)]
    ginv = g.inv().mat
    best = math.inf
    for gamma in enumerate_gamma(n, height):
        gam = _rat_of_int(gamma)
        gam_inv = tuple(tuple(row) for row in _invert_rational_matrix(gam))
        for P in walls:
            if all(_lie_fits(_rat_mul(_rat_mul(gam_inv, X), gam), P) for X in gens):
                val = d_function(P, GroupElement(ginv @ np.asarray(gamma, dtype=float)))
                best = min(best, val)
    return best


def parabolics_containing(spec: SubgroupSpec) -> List[ParabolicIndex]:
    """Exact list of standard parabolics containing the described group,
    decided on Lie generators; conjugated specs get the conjugator attached
    to every returned flag (the containment then holds for the conjugate).
    """
    import dataclasses
    import itertools

    plain = dataclasses.replace(spec, conjugator=None)
    gens = lie_generators(plain)
    n = spec.n
    conj = None
    if spec.conjugator is not None:
        conj = GroupElement(np.asarray(spec.conjugator, dtype=float))
    out = []
    for r in range(n):
        for I in itertools.combinations(range(n - 1), r):
            P = ParabolicIndex(n, frozenset(I))
            if all(_lie_fits(X, P) for X in gens):
                out.append(ParabolicIndex(n, frozenset(I), conjugator=conj))
    out.sort(key=lambda P: (len(P.I), tuple(sorted(P.I))))
    return out


# ---------------------------------------------------------------------------
# unipotent-radical translates: maximal bounded subset via an exact hull


def _upper_hull_vertices(points: List[Tuple[int, Fraction]]) -> List[int]:
    hull: List[Tuple[int, Fraction]] = []
    for x, y in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # pop while the middle point is on or below the chord
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append((x, y))
    return [x for x, _ in hull]


def unip_limit_I(v: Sequence, rs: RootSystem) -> Tuple[FrozenSet[int], Dict[int, Fraction]]:
    """For a minimal-radical translate moving as exp(n*v): the maximal
    I ⊆ Δ whose inner direction component stays bounded, with the exact
    escape certificate {alpha outside I: rate > 0}.

    Within each factor this is the upper convex hull of the prefix-sum path
    of v: hull segments are the I-blocks (the path sits on or below each
    chord, so the inside-I component has non-positive simple-root
    coefficients), and the strict slope drops at hull vertices are exactly
    the escape rates of the complementary roots.
    """
    v = make_vector(rs, v)
    inside: set = set()
    for f, (off, n) in enumerate(zip(rs.factor_offsets(), rs.ns)):
        acc = Fraction(0)
        pts = [(0, acc)]
        for k in range(n):
            acc += v[off + k]
            pts.append((k + 1, acc))
        vertices = set(_upper_hull_vertices(pts))
        for k in range(1, n):
            if k not in vertices:
                inside.add(rs.root_offsets()[f] + (k - 1))
    I = frozenset(inside)
    blocks = _coordinate_blocks(rs, I)
    v_comp = list(v)
    for b in blocks:
        mean = sum(v[c] for c in b) / len(b)
        for c in b:
            v_comp[c] = mean
    cert: Dict[int, Fraction] = {}
    for a in range(rs.rank):
        if a not in I:
            rate = pairing(rs, tuple(v_comp), rs.simple_roots[a])
            assert rate > 0, "hull vertices must drop strictly"
            cert[a] = rate
    return I, cert


# ---------------------------------------------------------------------------
# torus translates: chamber location and the growing/constant split


def ma_split(v: Sequence, I: Sequence[int], rs: RootSystem):
    """Split a torus direction fixed by the walls in I: returns
    ``(w, J, R_inf, R_0, v_inf, v_0)`` where (w, J) is the canonical chamber
    face of v, R_inf / R_0 are the complementary roots with growing /
    constant twisted values, and v = v_inf + v_0 is the matching exact
    splitting.  Under the exponential model a twisted root value is either
    identically one or strictly growing, so R_0 is always empty; the
    splitting code handles the general shape anyway.
    """
    v = make_vector(rs, v)
    iset = frozenset(I)
    for a in iset:
        if pairing(rs, v, rs.simple_roots[a]) != 0:
            raise ValueError("direction must pair to zero with every wall in I")
    face = locate_chamber(rs, v)
    w, J = face.w, face.I
    rates = {
        a: pairing(rs, v, w.act(rs.simple_roots[a]))
        for a in range(rs.rank)
        if a not in J
    }
    R_inf = frozenset(a for a, r in rates.items() if r > 0)
    R_0 = frozenset(a for a, r in rates.items() if r == 0)
    assert R_inf | R_0 == frozenset(rates), "chamber certificate failed"
    chis = quasi_fundamental_weights(rs)
    v_0 = [Fraction(0)] * rs.ambient_dim
    for a in R_0:
        chi = w.act(chis[a].ambient())
        for k in range(rs.ambient_dim):
            v_0[k] += rates[a] * chi[k]
    v_inf = tuple(x - y for x, y in zip(v, v_0))
    v_0 = tuple(v_0)
    for a in R_inf:
        assert pairing(rs, v_inf, w.act(rs.simple_roots[a])) > 0
    for a in J | R_0:
        assert pairing(rs, v_inf, w.act(rs.simple_roots[a])) == 0
    return w, J, R_inf, R_0, v_inf, v_0


# ---------------------------------------------------------------------------
# ingestion shared by the big classifiers


def _strip_conjugation(seq: SequenceSpec):
    """Normalize (conjugated subgroup, recorded left factor, offset) to the
    catalog position: the orbit identity
    ``mu_{gHg^-1, x} = mu_{H, g^-1 x}`` for integer g absorbs the subgroup
    conjugator, and a recorded left factor cancels against the integer
    lattice.  Returns (plain subgroup spec, effective offset QMatrix | None
    | "bounded", ingestion notes)."""
    import dataclasses

    spec = seq.subgroup
    notes: List[str] = []
    if spec.kind == "product":
        raise ValueError("per-factor ingestion handles products")
    n = spec.n
    h = seq.bounded_part
    if h == "bounded":
        if spec.conjugator is not None or seq.conjugator_policy == "recorded":
            raise _not_covered("a bounded-only offset cannot absorb conjugators")
        return spec, "bounded", notes
    h_eff: QMatrix = qmat_identity(n) if h is None else h
    if seq.conjugator_policy == "recorded":
        rec = _rat_of_int(seq.recorded_conjugator)
        h_eff = qmat_mul(_q_of_rat(rec), h_eff)
        notes.append("ingest:recorded_left_factor")
    if spec.conjugator is not None:
        gam = _rat_of_int(spec.conjugator)
        gam_inv = tuple(tuple(row) for row in _invert_rational_matrix(gam))
        h_eff = qmat_mul(_q_of_rat(gam_inv), h_eff)
        spec = dataclasses.replace(spec, conjugator=None)
        notes.append("ingest:subgroup_conjugator_absorbed")
    return spec, h_eff, notes


def sequence_translate(seq: SequenceSpec, index: int) -> np.ndarray:
    """Float translate g_index = (recorded factor) * offset * exp(index*v),
    shaped (factors, n, n); this is what the Monte Carlo side pushes by."""
    spec = seq.subgroup
    r, n = spec.shape
    out = np.empty((r, n, n))
    for f in range(r):
        off = seq.direction[f * n : (f + 1) * n] if spec.kind == "product" else seq.direction
        torus = np.diag(np.exp([index * float(x) for x in off]))
        if seq.bounded_part is None or seq.bounded_part == "bounded":
            h = np.eye(n)
        elif spec.kind == "product":
            h = np.array([[float(x) for x in row] for row in seq.bounded_part[f]])
        else:
            h = np.array([[float(x) for x in row] for row in seq.bounded_part])
        g = h @ torus
        if seq.conjugator_policy == "recorded":
            rec = seq.recorded_conjugator[f] if spec.kind == "product" else seq.recorded_conjugator
            g = np.asarray(rec, dtype=float) @ g
        out[f] = g
    return out


# ---------------------------------------------------------------------------
# the SL3 walk


_J3 = ((Fraction(0), Fraction(0), Fraction(1)),
       (Fraction(0), Fraction(1), Fraction(0)),
       (Fraction(1), Fraction(0), Fraction(0)))


def _theta_lie(X: FracMatrix) -> FracMatrix:
    """Outer automorphism on the Lie algebra: X -> -J X^T J."""
    m = _rat_mul(_rat_mul(_J3, _rat_transpose(X)), _J3)
    return tuple(tuple(-x for x in row) for row in m)


def _theta_unipotent(h: QMatrix) -> QMatrix:
    """Outer automorphism on upper unitriangular matrices: J h^-T J."""
    inv_t = tuple(zip(*qmat_unipotent_inverse(h)))
    j = _q_of_rat(_J3)
    return qmat_mul(qmat_mul(j, inv_t), j)


def _swap_walls(I: FrozenSet[int]) -> FrozenSet[int]:
    return frozenset(1 - i for i in I)


def _scan_witness(gens, h_eff, v, notes):
    """Level-G witness scan: candidates (w, wall) with the twisted group
    inside the wall parabolic, the twisted offset upper unitriangular, and
    strictly positive escape rate.  Preference order: wall alpha2 first,
    then the lexicographically least twist.  Any passing candidate is a
    genuine witness and the downstream walks agree on the verdict, so the
    preference only fixes which branch the trace reports."""
    rs = build_type_a(3)
    candidates = []
    blocked_by_offset = False
    for w in weyl_elements(rs):
        R = _weyl_rep_exact(w)
        Rt = _rat_transpose(R)  # = R^-1
        gens_c = [_rat_mul(_rat_mul(Rt, X), R) for X in gens]
        p = w.one_line()
        v_c = tuple(v[p[i]] for i in range(3))
        h_c = qmat_mul(qmat_mul(_q_of_rat(Rt), h_eff), _q_of_rat(R))
        for wall in (1, 0):
            P = _wall_parabolic(3, wall)
            if not all(_lie_fits(X, P) for X in gens_c):
                continue
            rate = _cross_rate(P, v_c)
            if rate <= 0:
                continue
            if not qmat_is_upper_unitriangular(h_c):
                blocked_by_offset = True
                continue
            candidates.append((0 if wall == 1 else 1, p, wall, w, gens_c, v_c, h_c, rate))
    if not candidates:
        if blocked_by_offset:
            raise _not_covered(
                "escape witnesses exist but the offset leaves the unipotent normal position"
            )
        return None
    candidates.sort(key=lambda c: (c[0], c[1]))
    _, p, wall, w, gens_c, v_c, h_c, rate = candidates[0]
    notes.append(f"witness:wall=alpha{wall + 1};twist={p};rate={rate}")
    return wall, gens_c, v_c, h_c


def _m_block_projection(gens) -> Tuple[str, List[FracMatrix]]:
    """Classify the projection of the group to the upper-left 2x2 block."""
    vecs = [(X[0][0], X[0][1], X[1][0], X[1][1]) for X in gens]
    vecs = [u for u in vecs if any(x != 0 for x in u)]
    if not vecs:
        return "trivial", gens
    # exact rank over Q
    basis: List[Tuple[Fraction, ...]] = []
    for u in vecs:
        u = list(u)
        for b in basis:
            lead = next(i for i, x in enumerate(b) if x != 0)
            if u[lead] != 0:
                f = u[lead] / b[lead]
                u = [x - f * y for x, y in zip(u, b)]
        if any(x != 0 for x in u):
            basis.append(tuple(u))
    if len(basis) >= 3:
        return "full", gens
    if len(basis) == 2:
        raise _not_covered("two-dimensional block projection (not a catalog shape)")
    (a, b, c, d) = basis[0]
    if a != 0 or d != 0 or (b != 0 and c != 0):
        if a + d == 0 and a * d - b * c == 0:
            raise _not_covered("slanted nilpotent block line (not a catalog shape)")
        return "full", gens  # contains a semisimple direction: no block parabolic holds it
    return ("line_upper" if b != 0 else "line_lower"), gens


def _offset_entries(h: QMatrix) -> Tuple[QuadNum, QuadNum, QuadNum]:
    return h[0][1], h[0][2], h[1][2]


def _cusp_move(p: int, q: int) -> FracMatrix:
    """Integer matrix with first column (p, q) (so it sends infinity to the
    cusp p/q); its inverse is the normalising move used by the walks."""
    g, a, b = _ext_gcd(p, q)
    assert g == 1
    # det = p*a - q*(-b) = p*a + q*b = 1
    return ((Fraction(p), Fraction(-b)), (Fraction(q), Fraction(a)))


def _ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a > 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def _embed_block(m: FracMatrix) -> FracMatrix:
    return (
        (m[0][0], m[0][1], Fraction(0)),
        (m[1][0], m[1][1], Fraction(0)),
        (Fraction(0), Fraction(0), Fraction(1)),
    )


def _normalise_cusp(u0: Fraction, gens, h: QMatrix, notes):
    """Left-multiply by the inverse cusp move for u0 = p/q: the plunging
    block trajectory turns into a rising one, the group is conjugated, and
    the residual corner entry becomes p*h12 - q*h02 (read off the moved
    third column)."""
    p, q = u0.numerator, u0.denominator
    move = _embed_block(_cusp_move(p, q))
    move_inv = tuple(tuple(row) for row in _invert_rational_matrix(move))
    new_gens = [_rat_mul(_rat_mul(move_inv, X), move) for X in gens]
    _, h02, h12 = _offset_entries(h)
    t_new = QuadNum.rational(p) * h12 - QuadNum.rational(q) * h02
    notes.append(f"m_walk:cusp_excursion;target={p}/{q}")
    return new_gens, t_new


def _sl3_m_stage(gens, v, h, notes):
    """Level-M sub-walks in the upper-left block.  Returns either an exit
    ('exit', I, extra-notes...) or ('junction', rho_y, rho_x, t, gens)."""
    rho = (v[0] - v[1]) / 2
    rho_x = -v[2] / 2
    kind, gens = _m_block_projection(gens)
    notes.append(f"m_projection:{kind}")
    u0, _, h12 = _offset_entries(h)
    if kind == "full":
        notes.append("m_walk:block_measures_tight")
        return ("exit", frozenset({0}))
    if kind == "trivial":
        if rho > 0:
            notes.append(f"m_walk:ascend;rho={rho}")
            return ("junction", rho, rho_x, h12, gens)
        if rho == 0:
            notes.append("m_walk:constant_point")
            return ("exit", frozenset({0}))
        if not u0.is_rational():
            notes.append("m_walk:plunge_badly_approximable")
            return ("exit", frozenset({0}), "support:subsequence_caveat")
        gens, t_new = _normalise_cusp(u0.as_fraction(), gens, h, notes)
        return ("junction", -rho, rho_x, t_new, gens)
    if kind == "line_upper":
        if rho > 0:
            notes.append(f"m_walk:ascend;rho={rho}")
            return ("junction", rho, rho_x, h12, gens)
        notes.append("m_walk:closed_horocycle" if rho == 0 else "m_walk:descending_horocycle_equidistributes")
        return ("exit", frozenset({0}))
    # line_lower: the block line fixes the cusp 0
    if rho < 0 and u0.is_rational() and u0.as_fraction() == 0:
        gens, t_new = _normalise_cusp(Fraction(0), gens, h, notes)
        return ("junction", -rho, rho_x, t_new, gens)
    if rho > 0:
        notes.append("m_walk:growing_horocycle_equidistributes")
    elif rho == 0:
        notes.append("m_walk:closed_horocycle")
    else:
        notes.append("m_walk:plunge_off_the_fixed_cusp")
    return ("exit", frozenset({0}))


def _sl3_junction(rho_y: Fraction, rho_x: Fraction, t: QuadNum, gens, notes):
    """Final state machine on the residual rates and corner entry."""
    c_rate = 3 * rho_x - rho_y
    notes.append(f"junction:c_rate={c_rate}")
    if c_rate > 0:
        notes.append(f"node:minimal_escape;alpha_rate={c_rate};beta_rate={2 * rho_y}")
        return frozenset()
    inside_n_beta = all(X[1][2] == 0 for X in gens)
    if not inside_n_beta:
        notes.append(f"node:1;levi_growth_rate={Fraction(3, 2) * (rho_y + rho_x)}")
        return frozenset({1})
    if c_rate == 0:
        notes.append("node:2.1;constant_alpha_value")
        return frozenset({1})
    if t.is_zero():
        notes.append(
            f"node:2.2.1;eta_rates=({-c_rate},{rho_y + 3 * rho_x})"
        )
        return frozenset()
    if not t.is_rational():
        notes.append("node:2.2.2.1;badly_approximable_corner")
        return frozenset({1})
    notes.append(
        f"node:2.2.2.2.1;v_rate={-c_rate};beta_rate={(rho_y + 9 * rho_x) / 2}"
    )
    return frozenset()


def _sl3_raw(seq: SequenceSpec) -> LimitDescriptor:
    spec, h_eff, notes = _strip_conjugation(seq)
    if h_eff == "bounded":
        raise _not_covered("the SL3 walk reads offset entries; give them exactly")
    if not qmat_is_upper_unitriangular(h_eff):
        raise _not_covered("offset outside the unipotent normal position")
    gens = lie_generators(spec)
    has_gens = bool(gens)
    v = seq.direction
    found = _scan_witness(gens, h_eff, v, notes)
    if found is None:
        notes.append("node:no_escape_witness")
        return LimitDescriptor(ParabolicIndex(3, frozenset({0, 1})), "interior", tuple(notes))
    wall, gens_c, v_c, h_c = found
    flipped = wall == 0
    if flipped:
        notes.append("flip:outer_automorphism")
        gens_c = [_theta_lie(X) for X in gens_c]
        v_c = (-v_c[2], -v_c[1], -v_c[0])
        h_c = _theta_unipotent(h_c)
    outcome = _sl3_m_stage(gens_c, v_c, h_c, notes)
    if outcome[0] == "exit":
        I = outcome[1]
        notes.extend(outcome[2:])
    else:
        _, rho_y, rho_x, t, gens_j = outcome
        for X in gens_j:
            assert all(X[r][c] == 0 for r in range(3) for c in range(3) if r >= c)
        I = _sl3_junction(rho_y, rho_x, t, gens_j, notes)
    if flipped:
        notes.append("unflip:swap_walls")
        I = _swap_walls(I)
    return _verdict(ParabolicIndex(3, I), has_gens, tuple(notes))


def _sl3_direct(seq: SequenceSpec) -> LimitDescriptor:
    """Entry point for data already in block-reduced position: the group
    sits inside the minimal radical, the offset is unipotent, and the
    direction lists the residual torus rates (w1, w2, w3) with w2 > w3.
    These are exactly the deepest branches, unreachable from raw data
    because the raw walk always drives the second rate gap to infinity."""
    spec, nu, notes = _strip_conjugation(seq)
    notes.append("stage:block_reduced")
    if nu == "bounded":
        nu = qmat_identity(3)
    if not qmat_is_upper_unitriangular(nu):
        raise _not_covered("block-reduced offset must be upper unitriangular")
    gens = lie_generators(spec)
    for X in gens:
        if any(X[r][c] != 0 for r in range(3) for c in range(3) if r >= c):
            raise _not_covered("block-reduced data needs a group inside the minimal radical")
    has_gens = bool(gens)
    w = seq.direction
    if not w[1] > w[2]:
        raise _not_covered("block-reduced data needs a growing second gap (w2 > w3)")
    gap = w[0] - w[1]
    if gap > 0:
        notes.append(f"node:2.2.2.2.1;beta_rate={gap}")
        return _verdict(ParabolicIndex(3, frozenset()), has_gens, tuple(notes))
    if gap == 0:
        notes.append(f"node:2.2.2.2.2;alpha_center_rate={-3 * w[2] / 2}")
        return _verdict(ParabolicIndex(3, frozenset({0})), has_gens, tuple(notes))
    central = all(
        all(X[r][c] == 0 for r in range(3) for c in range(3) if (r, c) != (0, 2))
        for X in gens
    )
    if not central:
        if not w[2] < 0:
            raise _not_covered("branch 2.2.2.2.3.1 needs a decaying third rate")
        notes.append(f"node:2.2.2.2.3.1;alpha_center_rate={-3 * w[2] / 2}")
        return _verdict(ParabolicIndex(3, frozenset({0})), has_gens, tuple(notes))
    if not w[0] > w[2]:
        raise _not_covered("branch 2.2.2.2.3.2 needs a growing corner rate (w1 > w3)")
    face = locate_chamber(build_type_a(3), w)
    notes.append(
        f"node:2.2.2.2.3.2;corner_rate={w[0] - w[2]};chamber_twist={face.w.one_line()}"
    )
    P = ParabolicIndex(3, face.I)
    if P.is_group:
        raise _not_covered("a fully degenerate chamber face leaves no point target")
    return LimitDescriptor(P, "dirac_point", tuple(notes))


def sl3_classify(seq: SequenceSpec) -> LimitDescriptor:
    """Classify an SL3 translate sequence by walking the decision tree.

    Raw-stage inputs go through the witness scan, the block sub-walks and
    the junction; block-reduced inputs enter the deepest branches directly.
    Inputs outside the encoded tree raise :class:`NotCoveredError`.
    """
    spec = seq.subgroup
    if spec.kind == "product" or spec.n != 3:
        raise ValueError("the SL3 walk classifies single-factor 3x3 specs")
    if seq.stage == "block_reduced":
        return _sl3_direct(seq)
    return _sl3_raw(seq)


# ---------------------------------------------------------------------------
# products of SL2 factors


def _mobius_zero_target(m: QMatrix):
    """Where the block trajectory m * (i*y) lands as y -> 0: a Q(tau) value,
    or None for the cusp at infinity."""
    b, d = m[0][1], m[1][1]
    if d.is_zero():
        return None
    return b / d


def sl2r_classify(seq: SequenceSpec) -> LimitDescriptor:
    """Per-factor classification for products of SL2 factors.

    Factor atoms: a full SL2 factor never escapes; a unipotent-line factor
    escapes exactly at positive rate (descending horocycles equidistribute,
    so negative rates stay tight); a trivial factor escapes at positive
    rate, and at negative rate exactly when its plunge target is rational
    (the cusp excursion) -- badly approximable targets wander in a compact
    part forever.  The supporting parabolic keeps the full factor on the
    bounded coordinates; the support is a point type when every bounded
    factor is trivial.
    """
    spec = seq.subgroup
    if spec.kind != "product":
        raise ValueError("sl2r_classify takes a product spec")
    r = len(spec.factors)
    v = seq.direction
    bounded_factors: List[int] = []
    notes: List[str] = []
    all_bounded_trivial = True
    for f, fac in enumerate(spec.factors):
        rate = v[2 * f] - v[2 * f + 1]
        offset = _factor_offset(seq, f)
        tag = f"factor{f}:{fac.kind}"
        if fac.kind == "embedded_sl2":
            bounded_factors.append(f)
            all_bounded_trivial = False
            notes.append(f"{tag}:full_factor_never_escapes")
        elif fac.kind in ("one_param_unipotent", "full_unipotent_radical"):
            if rate > 0:
                notes.append(f"{tag}:escape;theta_rate={rate}")
            else:
                bounded_factors.append(f)
                all_bounded_trivial = False
                notes.append(
                    f"{tag}:closed_horocycle" if rate == 0 else f"{tag}:descending_horocycle_equidistributes"
                )
        elif fac.kind == "trivial":
            if rate > 0:
                notes.append(f"{tag}:escape;theta_rate={rate}")
            elif rate == 0:
                bounded_factors.append(f)
                notes.append(f"{tag}:constant_point")
            else:
                if offset == "bounded":
                    raise _not_covered(
                        "a descending trivial factor needs its plunge target exactly"
                    )
                target = _mobius_zero_target(offset)
                if target is None or target.is_rational():
                    notes.append(f"{tag}:escape_cusp_excursion;theta_rate={-rate}")
                else:
                    bounded_factors.append(f)
                    notes.append(f"{tag}:plunge_badly_approximable")
                    notes.append("support:subsequence_caveat")
        else:
            raise _not_covered(f"factor kind {fac.kind} has no SL2 atom")
    J = frozenset(bounded_factors)
    P = ProductParabolicIndex(r, J)
    if P.is_group:
        return LimitDescriptor(P, "interior", tuple(notes))
    kind = "dirac_point" if all_bounded_trivial else "boundary_homogeneous"
    return LimitDescriptor(P, kind, tuple(notes))


def _factor_offset(seq: SequenceSpec, f: int):
    """Effective bounded offset of one product factor, conjugators absorbed."""
    spec = seq.subgroup.factors[f]
    h = seq.bounded_part
    if h == "bounded":
        if spec.conjugator is not None or seq.conjugator_policy == "recorded":
            raise _not_covered("a bounded-only offset cannot absorb conjugators")
        return "bounded"
    m = qmat_identity(2) if h is None else h[f]
    if seq.conjugator_policy == "recorded":
        m = qmat_mul(_q_of_rat(_rat_of_int(seq.recorded_conjugator[f])), m)
    if spec.conjugator is not None:
        gam = _rat_of_int(spec.conjugator)
        gam_inv = tuple(tuple(row) for row in _invert_rational_matrix(gam))
        m = qmat_mul(_q_of_rat(gam_inv), m)
    return m


# ---------------------------------------------------------------------------
# translates of a non-compact Levi block


def levi_translate_classify(alpha: int, seq: SequenceSpec) -> LimitDescriptor:
    """Classify a translated 2x2 Levi-block orbit: escape happens toward a
    maximal parabolic whose (possibly twisted) conjugate contains the block,
    and the twisted candidates are exactly the maximal faces of the block's
    wall sphere.  The branch reads only the direction: bounded offsets
    cannot change which twisted wall value grows.  On escape there is no
    further degeneration -- the block itself carries no smaller parabolic --
    so the limit is homogeneous on the reported component.
    """
    spec = seq.subgroup
    if spec.kind != "levi_semisimple_nc":
        raise ValueError("levi_translate_classify takes a Levi-block spec")
    if frozenset({alpha}) != spec.I:
        raise ValueError(f"spec sits at root {sorted(spec.I)}, not {alpha}")
    n = spec.n
    rs = build_type_a(n)
    v = seq.direction
    notes: List[str] = []
    gens = [
        tuple(tuple(Fraction(x) for x in row) for row in X)
        for X in lie_generators(SubgroupSpec("levi_semisimple_nc", n, I=spec.I, block=spec.block))
    ]
    best = None
    for face in levi_sphere(rs, [alpha]):
        if len(face.I) != 1:
            continue
        P = ParabolicIndex(n, face.I)
        R = _weyl_rep_exact(face.w)
        Rt = _rat_transpose(R)
        if not all(_lie_fits(_rat_mul(_rat_mul(Rt, X), R), P) for X in gens):
            continue
        p = face.w.one_line()
        rate = _cross_rate(P, tuple(v[p[i]] for i in range(n)))
        if rate > 0 and (best is None or (-rate, face.key()) < (-best[0], best[1].key())):
            best = (rate, face)
    if best is None:
        notes.append("node:no_twisted_wall_grows")
        return LimitDescriptor(ParabolicIndex(n, frozenset(range(n - 1))), "interior", tuple(notes))
    rate, face = best
    notes.append(
        f"node:wall_escape;twist={face.w.one_line()};rate={rate};no_further_degeneration"
    )
    return LimitDescriptor(ParabolicIndex(n, face.I), "boundary_homogeneous", tuple(notes))
