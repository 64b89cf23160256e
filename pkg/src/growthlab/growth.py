"""Box volumes, growth polynomials, monomial envelopes and growth-degree fits."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import intlinalg
from .balls import BallProfile, ResourceCapExceeded, product_set
from .free_nilpotent import hall_basis
from .groups import Element, Group
from .progression import as_fraction, fraction_str


# ---------------------------------------------------------------------------
# boundaries that may be irrational


@dataclass(frozen=True)
class Boundary:
    """The positive real number base**(1/root); ``root == 0`` encodes infinity."""

    base: Fraction
    root: int = 1

    @classmethod
    def infinity(cls) -> "Boundary":
        return cls(Fraction(0), 0)

    @classmethod
    def of(cls, base, root: int = 1) -> "Boundary":
        base = as_fraction(base)
        if base <= 0:
            raise ValueError("boundaries are positive")
        # simplify perfect powers so rational boundaries print as rationals
        for k in range(root, 1, -1):
            if root % k == 0:
                num, den = _exact_root(base.numerator, k), _exact_root(base.denominator, k)
                if num is not None and den is not None:
                    return cls.of(Fraction(num, den), root // k)
        return cls(base, root)

    @property
    def is_infinite(self) -> bool:
        return self.root == 0

    @property
    def exact(self) -> Fraction | None:
        return self.base if self.root == 1 else None

    def __float__(self) -> float:
        return math.inf if self.is_infinite else float(self.base) ** (1.0 / self.root)

    def pow_equals(self, exponent: int, value: Fraction) -> bool:
        """Exact test of self**exponent == value."""
        # (base^(1/k))^e = v  <=>  base^e = v^k
        return self.base ** exponent == value ** self.root

    def format(self, digits: int = 6) -> str:
        if self.is_infinite:
            return "inf"
        if self.root == 1:
            return fraction_str(self.base)
        return f"({fraction_str(self.base)})^(1/{self.root})"

    def approx(self, digits: int = 6) -> str:
        return "inf" if self.is_infinite else f"{float(self):.{digits}g}"

    @classmethod
    def parse(cls, text: str) -> "Boundary":
        text = text.strip()
        if text == "inf":
            return cls.infinity()
        if text.startswith("("):
            inner, _, root = text[1:].partition(")^(1/")
            return cls(Fraction(inner), int(root.rstrip(")")))
        return cls(Fraction(text), 1)

    def __lt__(self, other: "Boundary") -> bool:
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        # compare a^(1/k) < b^(1/l)  <=>  a^l < b^k
        return self.base ** other.root < other.base ** self.root


def _exact_root(n: int, k: int) -> int | None:
    r = round(n ** (1.0 / k)) if n > 0 else 0
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** k == n:
            return c
    return None


# ---------------------------------------------------------------------------
# piecewise monomials


@dataclass
class PiecewiseMonomial:
    """h(x) = C_i x^(d_i) on [x_i, x_(i+1)), with x_0 = 1 and the last boundary infinite."""

    boundaries: list[Boundary]
    coefficients: list[Fraction]
    degrees: list[int]

    def __post_init__(self):
        k = len(self.degrees)
        if len(self.coefficients) != k or len(self.boundaries) != k + 1:
            raise ValueError("need k pieces, k coefficients and k+1 boundaries")
        if self.boundaries[0] != Boundary(Fraction(1)) or not self.boundaries[-1].is_infinite:
            raise ValueError("boundaries run from 1 to infinity")
        if any(c <= 0 for c in self.coefficients) or any(d < 0 for d in self.degrees):
            raise ValueError("coefficients must be positive and degrees non-negative")
        if any(not (a < b) for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("boundaries must increase")

    def is_continuous(self) -> bool:
        for i in range(len(self.degrees) - 1):
            x = self.boundaries[i + 1]
            # C_i x^d_i = C_(i+1) x^d_(i+1)  <=>  x^(d_i - d_(i+1)) = C_(i+1)/C_i
            e = self.degrees[i] - self.degrees[i + 1]
            ratio = self.coefficients[i + 1] / self.coefficients[i]
            if e < 0:
                e, ratio = -e, 1 / ratio
            if not x.pow_equals(e, ratio):
                return False
        return True

    @property
    def normalized(self) -> bool:
        return self.coefficients[0] == 1

    def piece(self, x: float) -> int:
        for i in range(len(self.degrees)):
            if x < float(self.boundaries[i + 1]):
                return i
        return len(self.degrees) - 1

    def __call__(self, x: float) -> float:
        i = self.piece(x)
        return float(self.coefficients[i]) * x ** self.degrees[i]

    def exact_value(self, x) -> Fraction:
        """h(x) for rational x >= 1, choosing the piece by exact boundary comparison."""
        x = as_fraction(x)
        if x < 1:
            raise ValueError("piecewise monomials live on [1, inf)")
        point = Boundary(x)
        i = next(k for k in range(len(self.degrees)) if point < self.boundaries[k + 1])
        return self.coefficients[i] * x ** self.degrees[i]

    def log_value(self, x: float) -> float:
        i = self.piece(x)
        return math.log(self.coefficients[i]) + self.degrees[i] * math.log(x)

    @property
    def decreases(self) -> int:
        return sum(1 for a, b in zip(self.degrees, self.degrees[1:]) if b < a)

    @property
    def increases(self) -> int:
        return sum(1 for a, b in zip(self.degrees, self.degrees[1:]) if b > a)

    def to_json(self, digits: int = 6) -> dict:
        return {
            "boundaries": [b.format() for b in self.boundaries],
            "boundaries_approx": [b.approx(digits) for b in self.boundaries],
            "coefficients": [fraction_str(c) for c in self.coefficients],
            "degrees": list(self.degrees),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PiecewiseMonomial":
        return cls([Boundary.parse(b) for b in doc["boundaries"]],
                   [Fraction(c) for c in doc["coefficients"]], [int(d) for d in doc["degrees"]])


# ---------------------------------------------------------------------------
# volumes and growth polynomials


def _scaled(vectors, lengths):
    return [[as_fraction(x) * as_fraction(l) for x in v] for v, l in zip(vectors, lengths)]


def box_volume(vectors: Sequence[Sequence], lengths: Sequence) -> Fraction:
    """Volume of {sum t_i L_i e_i : |t_i| <= 1} for r >= d spanning vectors in R^d.

    For r == d this is a parallelotope; for r > d it is a zonotope whose volume
    is 2^d times the sum of |det| over all d-subsets.
    """
    if not vectors:
        raise ValueError("empty basis")
    d = len(vectors[0])
    if len(vectors) < d or intlinalg.rank(vectors) < d:
        raise ValueError("degenerate basis: vectors do not span")
    scaled = _scaled(vectors, lengths)
    total = sum((abs(intlinalg.det([scaled[i] for i in idx])) for idx in itertools.combinations(range(len(scaled)), d)),
                Fraction(0))
    return 2 ** d * total


def growth_polynomial(vectors: Sequence[Sequence], degrees: Sequence[int], lengths: Sequence) -> dict[int, Fraction]:
    """Coefficients of f(x) = sum over d-subsets I of vol(B(e_I; L_I)) x^(sum of degrees in I).

    ``lengths`` are the weighted lengths L^chi of the vectors and ``degrees``
    their total weights |chi|.
    """
    d = len(vectors[0])
    if intlinalg.rank(vectors) < d:
        raise ValueError("degenerate basis: vectors do not span")
    scaled = _scaled(vectors, lengths)
    poly: dict[int, Fraction] = {}
    for idx in itertools.combinations(range(len(scaled)), d):
        vol = abs(intlinalg.det([scaled[i] for i in idx]))
        if vol:
            k = sum(degrees[i] for i in idx)
            poly[k] = poly.get(k, Fraction(0)) + 2 ** d * vol
    return dict(sorted(poly.items()))


def evaluate_polynomial(poly: dict[int, Fraction], x) -> Fraction:
    x = as_fraction(x)
    return sum((c * x ** k for k, c in poly.items()), Fraction(0))


@dataclass
class Nilbox:
    vectors: list[list[Fraction]]
    degrees: list[int]
    lengths: list[Fraction]
    labels: list[str]


def nilbox(generator_logs: Sequence[Sequence], lengths: Sequence, nil_class: int,
           bracket: Callable[[Sequence, Sequence], Sequence]) -> Nilbox:
    """Basic brackets of the generator logarithms, with weighted lengths L^chi.

    ``bracket`` is the Lie bracket of the ambient Lie algebra in the chosen
    coordinates.
    """
    basis = hall_basis(len(generator_logs), nil_class)
    lengths = [as_fraction(l) for l in lengths]
    images: list[list[Fraction]] = []
    for e in basis.entries:
        if e.left is None:
            images.append([as_fraction(x) for x in generator_logs[e.index]])
        else:
            images.append([as_fraction(x) for x in bracket(images[e.left], images[e.right])])
    weights = []
    for e in basis.entries:
        w = Fraction(1)
        for l, k in zip(lengths, e.chi):
            w *= l ** k
        weights.append(w)
    return Nilbox(images, list(basis.weights), weights, [basis.label(i) for i in range(len(basis))])


def heisenberg_bracket(u: Sequence, v: Sequence) -> list[Fraction]:
    """Lie bracket on R^3 with [X, Y] = Z in coordinates (X, Y, Z)."""
    return [Fraction(0), Fraction(0), as_fraction(u[0]) * as_fraction(v[1]) - as_fraction(u[1]) * as_fraction(v[0])]


# ---------------------------------------------------------------------------
# envelopes


def monomial_envelope(poly: dict[int, Fraction]) -> PiecewiseMonomial:
    """h(x) = max_i a_i x^i on [1, inf) as a piecewise monomial.

    Boundaries between pieces are (a_i/a_j)^(1/(j-i)) and kept exact.
    """
    terms = {int(k): as_fraction(c) for k, c in poly.items() if as_fraction(c) != 0}
    if any(c < 0 for c in terms.values()):
        raise ValueError("coefficients must be non-negative")
    if not terms:
        raise ValueError("all-zero polynomial")
    # at x = 1 the largest coefficient wins, ties going to the higher degree
    deg = max(terms, key=lambda k: (terms[k], k))
    boundaries = [Boundary(Fraction(1))]
    degrees = [deg]
    coeffs = [terms[deg]]
    current = Boundary(Fraction(1))
    while True:
        best = None
        for j in (k for k in terms if k > deg):
            cross = Boundary.of(terms[deg] / terms[j], j - deg)
            if best is None or cross < best[0] or (not best[0] < cross and j > best[1]):
                best = (cross, j)
        if best is None:
            break
        cross, j = best
        if not current < cross:
            # already dominated at the current boundary
            cross = current
            boundaries.pop()
            degrees.pop()
            coeffs.pop()
        boundaries.append(cross)
        degrees.append(j)
        coeffs.append(terms[j])
        current, deg = cross, j
    return PiecewiseMonomial(boundaries + [Boundary.infinity()], coeffs, degrees)


# ---------------------------------------------------------------------------
# growth-degree fitting


def lattice_ball(d: int, n: int) -> int:
    """Number of points of Z^d with l1-norm at most n."""
    return sum(2 ** k * math.comb(d, k) * math.comb(n, k) for k in range(d + 1))


class ProfileTooShort(ValueError):
    pass


@dataclass
class GrowthFit:
    function: PiecewiseMonomial
    anchor: int
    local_degrees: list[int]
    residual: float
    runs: list[tuple[int, int, int]] = field(default_factory=list)  # (degree, first m, last m)

    @property
    def decreases(self) -> int:
        return self.function.decreases

    @property
    def increases(self) -> int:
        return self.function.increases

    def to_json(self) -> dict:
        doc = self.function.to_json()
        doc.update({
            "anchor": self.anchor, "residual": round(self.residual, 6),
            "decreases": self.decreases, "increases": self.increases,
            "local_degrees": self.local_degrees,
            "runs": [{"degree": d, "from": a, "to": b} for d, a, b in self.runs],
        })
        return doc

    def comparison_rows(self, profile: BallProfile) -> list[tuple[int, int, float]]:
        """(m, β(m), f(m/n)·β(n)) for m >= anchor."""
        base = profile.beta[self.anchor]
        return [(m, profile.beta[m], self.function(m / self.anchor) * base)
                for m in range(self.anchor, len(profile.beta))]


def local_degree(beta: Sequence[int], m: int, max_degree: int = 16) -> int:
    """The d whose l1-ball ratio |B(2m)|/|B(m)| in Z^d is closest in log to β(2m)/β(m).

    Comparing against lattice balls instead of 2^d removes the lower-order
    bias of the plain dyadic ratio at small m.
    """
    observed = math.log(beta[2 * m] / beta[m])
    return min(range(max_degree + 1),
               key=lambda d: (abs(observed - math.log(lattice_ball(d, 2 * m) / lattice_ball(d, m))), d))


def _runs(values: Sequence[int], start: int) -> list[list[int]]:
    runs: list[list[int]] = []
    for offset, v in enumerate(values):
        m = start + offset
        if runs and runs[-1][0] == v:
            runs[-1][2] = m
        else:
            runs.append([v, m, m])
    return runs


def _merge_blips(runs: list[list[int]], min_len: int) -> list[list[int]]:
    """Absorb interior runs shorter than ``min_len`` samples into a neighbour."""
    changed = True
    while changed and len(runs) > 2:
        changed = False
        for i in range(1, len(runs) - 1):
            deg, a, b = runs[i]
            if b - a + 1 >= min_len:
                continue
            left, right = runs[i - 1], runs[i + 1]
            if left[0] == right[0]:
                runs[i - 1:i + 2] = [[left[0], left[1], right[2]]]
            else:
                left[2] = b
                del runs[i]
            changed = True
            break
    return runs


def fit_growth(profile: BallProfile, anchor: int = 1, max_degree: int = 16, min_run: int = 2) -> GrowthFit:
    """Fit a continuous piecewise monomial f with β(m) ≈ f(m/anchor)·β(anchor)."""
    beta = profile.beta
    if anchor < 1:
        raise ValueError("anchor must be at least 1")
    if len(beta) - 1 < 2 * anchor:
        raise ProfileTooShort(f"profile radius {len(beta) - 1} is below twice the anchor {anchor}")
    top = (len(beta) - 1) // 2
    local = [local_degree(beta, m, max_degree) for m in range(anchor, top + 1)]
    runs = _merge_blips(_runs(local, anchor), min_run)
    boundaries = [Boundary(Fraction(1))]
    coeffs = [Fraction(1)]
    degrees = [runs[0][0]]
    for deg, first, _ in runs[1:]:
        x = Fraction(first, anchor)
        coeffs.append(coeffs[-1] * x ** (degrees[-1] - deg))
        boundaries.append(Boundary(x))
        degrees.append(deg)
    function = PiecewiseMonomial(boundaries + [Boundary.infinity()], coeffs, degrees)
    base = math.log(beta[anchor])
    residual = max(abs(function.log_value(m / anchor) + base - math.log(beta[m]))
                   for m in range(anchor, len(beta)))
    return GrowthFit(function, anchor, local, residual, [tuple(r) for r in runs])


# ---------------------------------------------------------------------------
# small exact lemma checks


@dataclass
class SumsetReport:
    sizes: dict
    sumset_margin: int | None
    quotient_margin: int | None

    @property
    def ok(self) -> bool:
        return all(m is None or m >= 0 for m in (self.sumset_margin, self.quotient_margin))

    def to_json(self) -> dict:
        return {"sizes": self.sizes, "sumset_margin": self.sumset_margin,
                "quotient_margin": self.quotient_margin, "ok": self.ok}


def sumset_and_quotient_bounds(group: Group, a: Iterable[Element], b: Iterable[Element] | None = None,
                               subgroup=None, m: int = 1, n: int = 1, cap: int = 5_000_000) -> SumsetReport:
    """Margins of |AB| >= |A| + |B| - 1 (torsion-free groups) and of
    |A^(m+n)| >= |A^m H / H| * |A^n ∩ H| for a subgroup H given by a
    ``Subgroup`` object."""
    a = set(a)
    sizes: dict = {"A": len(a)}
    sumset_margin = None
    if b is not None:
        if group.is_finite():
            raise ValueError("the sumset bound needs a torsion-free group")
        b = set(b)
        ab = product_set(group, a, b)
        sizes.update({"B": len(b), "AB": len(ab)})
        sumset_margin = len(ab) - (len(a) + len(b) - 1)
    quotient_margin = None
    if subgroup is not None:
        powers = {1: a}
        top = m + n
        for k in range(2, top + 1):
            powers[k] = product_set(group, powers[k - 1], a)
            if len(powers[k]) > cap:
                raise ResourceCapExceeded("power set exceeded the cap")
        am, an, amn = powers[m], powers[n], powers[top]
        cosets = len({subgroup.coset_key(x) for x in am})
        in_h = sum(1 for x in an if subgroup.contains(x))
        sizes.update({"A^m H/H": cosets, "A^n ∩ H": in_h, "A^(m+n)": len(amn)})
        quotient_margin = len(amn) - cosets * in_h
    return SumsetReport(sizes, sumset_margin, quotient_margin)


@dataclass(frozen=True)
class SymmetricBody:
    """A box (``half_widths``) or a zonotope sum of segments [-g, g] (``generators``)."""

    kind: str
    data: tuple

    @classmethod
    def box(cls, half_widths: Sequence) -> "SymmetricBody":
        return cls("box", tuple(as_fraction(w) for w in half_widths))

    @classmethod
    def zonotope(cls, generators: Sequence[Sequence]) -> "SymmetricBody":
        return cls("zonotope", tuple(tuple(as_fraction(x) for x in g) for g in generators))

    @property
    def dimension(self) -> int:
        return len(self.data) if self.kind == "box" else len(self.data[0])

    def volume(self) -> Fraction:
        if self.kind == "box":
            out = Fraction(1)
            for w in self.data:
                out *= 2 * w
            return out
        return box_volume(self.data, [1] * len(self.data))

    def lattice_points(self) -> int:
        if self.kind == "box":
            out = 1
            for w in self.data:
                out *= 2 * math.floor(w) + 1
            return out
        d = self.dimension
        normals = _zonotope_normals(self.data, d)
        support = [sum(abs(_dot(u, g)) for g in self.data) for u in normals]
        extent = [math.floor(sum(abs(g[i]) for g in self.data)) for i in range(d)]
        count = 0
        for p in itertools.product(*(range(-e, e + 1) for e in extent)):
            if all(abs(_dot(u, p)) <= h for u, h in zip(normals, support)):
                count += 1
        return count


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _zonotope_normals(gens, d: int) -> list[tuple]:
    """Facet normals of a full-dimensional zonotope: normals of (d-1)-subsets of generators."""
    if intlinalg.rank(gens) < d:
        raise ValueError("zonotope is not full-dimensional")
    if d == 1:
        return [(Fraction(1),)]
    normals = []
    for idx in itertools.combinations(range(len(gens)), d - 1):
        rows = [gens[i] for i in idx]
        # generalized cross product: cofactors of the (d-1) x d matrix
        u = tuple((-1) ** k * intlinalg.det([r[:k] + r[k + 1:] for r in rows]) for k in range(d))
        if any(u):
            normals.append(u)
    return normals


@dataclass
class VanDerCorputReport:
    lattice_points: int
    volume: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return self.lattice_points >= self.bound


def van_der_corput_check(body: SymmetricBody) -> VanDerCorputReport:
    """Exact |Z^d ∩ K| against vol(K)/2^d for a symmetric box or zonotope."""
    if body.kind not in ("box", "zonotope"):
        raise ValueError(f"unsupported body class {body.kind!r}")
    vol = body.volume()
    return VanDerCorputReport(body.lattice_points(), vol, vol / 2 ** body.dimension)


@dataclass
class CramerCertificate:
    indices: tuple[int, ...]
    determinant: Fraction
    coefficients: list[list[Fraction]]  # row k: M_k v_k in terms of the selected M_i v_i

    @property
    def ok(self) -> bool:
        return all(abs(y) <= 1 for row in self.coefficients for y in row)


def cramer_selection(vectors: Sequence[Sequence], lengths: Sequence) -> CramerCertificate:
    """Pick the d-subset maximizing |det(M_i v_i)| and express every M_k v_k in it."""
    if not vectors:
        raise ValueError("no vectors")
    d = len(vectors[0])
    scaled = _scaled(vectors, lengths)
    if intlinalg.rank(scaled) < d:
        raise ValueError("vectors do not span")
    best, best_det = None, Fraction(-1)
    for idx in itertools.combinations(range(len(scaled)), d):
        v = abs(intlinalg.det([scaled[i] for i in idx]))
        if v > best_det:
            best, best_det = idx, v
    columns = intlinalg.transpose([scaled[i] for i in best])
    coeffs = [intlinalg.solve(columns, w) for w in scaled]
    return CramerCertificate(tuple(best), best_det, coeffs)
