"""Named example groups with generating sets and checkable expected facts.

Every fact records where its value comes from in ``source``: ``hand`` for
values checkable by hand, ``oracle`` for values computed by an independent
method (and frozen in tests), ``literature`` for published values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .groups import (AbelianQuotient, Element, FreeNilpotentGroup, GeneratingSet, Group, HeisenbergQuotient,
                     IntegerMatrixGroup, SemidirectZdByFinite)


@dataclass(frozen=True)
class Fact:
    kind: str  # profile_prefix | saturation | fit_degrees | relation_scales | growth_degree | order
    value: object
    source: str  # hand | oracle | literature
    params: dict = field(default_factory=dict)
    note: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": self.value, "source": self.source,
                "params": self.params, "note": self.note}


@dataclass
class CatalogEntry:
    name: str
    group: Group
    generators: GeneratingSet
    facts: list[Fact] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "group": self.group.to_json(), "generators": self.generators.to_json(),
                "facts": [f.to_json() for f in self.facts]}


def _standard(group: Group) -> GeneratingSet:
    return GeneratingSet.build(group, group.standard_generators())


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def filiform_group(d: int) -> IntegerMatrixGroup:
    """Z^(d-1) ⋊ Z with Z acting by a unipotent Jordan block, as affine d x d matrices."""
    if d < 2:
        raise ValueError("filiform groups need d >= 2")
    n = d - 1
    jordan = [[1 if j in (i, i + 1) else 0 for j in range(n)] + [0] for i in range(n)] + [[0] * n + [1]]
    shift = [[int(i == j) for j in range(n)] + [int(i == n - 1)] for i in range(n)] + [[0] * n + [1]]
    return IntegerMatrixGroup(d, [jordan, shift])


def powers_set(group: AbelianQuotient, base: int, count: int) -> GeneratingSet:
    """{0, ±1, ±m, ..., ±m^(count-1)} in Z."""
    return GeneratingSet.build(group, [(base ** k,) for k in range(count)])


def thin_box_set(n: int) -> GeneratingSet:
    """Symmetrisation of {x^a y^b z^c : |a|, |b| <= 1, |c| <= n} ∪ {1} in the Heisenberg group."""
    h = HeisenbergQuotient("none", 0)
    elems = []
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            for c in range(-n, n + 1):
                elems.append(h.canonical((a, b, c)))
    return GeneratingSet.build(h, elems)


def lookup(name: str) -> CatalogEntry:
    """Resolve a catalog name such as ``z^3``, ``prod:4,16,64`` or ``heisenberg-modz:16``."""
    key, _, arg = name.partition(":")
    if name == "z":
        g = AbelianQuotient(1, [])
        return CatalogEntry(name, g, _standard(g), [
            Fact("profile_prefix", [1, 3, 5, 7], "hand"),
            Fact("fit_degrees", [1], "hand", {"radius": 32, "anchor": 1}),
            Fact("relation_scales", [], "hand", {"n_max": 10}),
        ])
    if key.startswith("z^"):
        d = int(key[2:])
        g = AbelianQuotient(d, [])
        return CatalogEntry(name, g, _standard(g), [
            Fact("growth_degree", d, "hand", {"radius": 16, "anchor": 4}),
        ])
    if key == "zmod":
        m = int(arg)
        g = AbelianQuotient(1, [[m]])
        return CatalogEntry(name, g, _standard(g), [
            Fact("saturation", m, "hand"),
            Fact("relation_scales", _cyclic_scales(m), "oracle", {"n_max": 12},
                 "first n with 2^n >= m"),
        ])
    if key == "zxzmod":
        m = int(arg)
        g = AbelianQuotient(2, [[0, m]])
        facts = []
        if m == 64:
            facts.append(Fact("fit_degrees", [2, 1], "oracle", {"radius": 256, "anchor": 1}))
        return CatalogEntry(name, g, _standard(g), facts)
    if key == "prod":
        ms = _ints(arg)
        g = AbelianQuotient(len(ms), [[m if i == j else 0 for j in range(len(ms))] for i, m in enumerate(ms)])
        facts = [Fact("order", _prod(ms), "hand")]
        if ms == [4, 16, 64]:
            facts.append(Fact("fit_degrees", [3, 2, 1, 0], "oracle", {"radius": 128, "anchor": 1}))
            facts.append(Fact("relation_scales", [2, 4, 6], "oracle", {"n_max": 10}))
        if ms == [4, 64]:
            facts.append(Fact("relation_scales", [2, 6], "oracle", {"n_max": 10}))
        return CatalogEntry(name, g, _standard(g), facts)
    if key == "heisenberg" and not arg:
        g = HeisenbergQuotient("none", 0)
        return CatalogEntry(name, g, _standard(g), [
            Fact("profile_prefix", [1, 5, 17], "oracle"),
            Fact("growth_degree", 4, "literature", {"radius": 32, "anchor": 4}),
        ])
    if key in ("heisenberg-modz", "heisenberg-modxz", "heisenberg-full"):
        m = int(arg)
        kind = {"heisenberg-modz": "central", "heisenberg-modxz": "normal", "heisenberg-full": "full"}[key]
        g = HeisenbergQuotient(kind, m)
        facts = [Fact("profile_prefix", [1, 5, 17], "oracle")] if m > 8 else []
        if kind == "full":
            facts.append(Fact("order", m ** 3, "hand"))
        return CatalogEntry(name, g, _standard(g), facts)
    if key == "filiform":
        d = int(arg)
        g = filiform_group(d)
        return CatalogEntry(name, g, _standard(g), [])
    if key == "semidirect-sign":
        g = SemidirectZdByFinite(2, [[[-1, 0], [0, -1]]])
        return CatalogEntry(name, g, _standard(g), [])
    if key == "semidirect-square":
        g = SemidirectZdByFinite(2, [[[0, -1], [1, 0]], [[1, 0], [0, -1]]])
        return CatalogEntry(name, g, _standard(g), [])
    if key == "zpowers":
        m, d = _ints(arg)
        g = AbelianQuotient(1, [])
        return CatalogEntry(name, g, powers_set(g, m, d), [])
    if key == "thinbox":
        n = int(arg)
        return CatalogEntry(name, HeisenbergQuotient("none", 0), thin_box_set(n), [])
    if key == "free":
        r, c = _ints(arg)
        g = FreeNilpotentGroup(r, c)
        return CatalogEntry(name, g, _standard(g), [])
    raise KeyError(f"unknown catalog name {name!r}")


def _prod(ms):
    out = 1
    for m in ms:
        out *= m
    return out


def _cyclic_scales(m: int) -> list[int]:
    n = 0
    while 2 ** n < m:
        n += 1
    return [n] if n >= 2 else []


CATALOG = (
    "z", "z^2", "z^3", "zmod:6", "zmod:100", "zxzmod:64", "prod:4,64", "prod:8,16", "prod:4,16,64",
    "heisenberg", "heisenberg-modz:16", "heisenberg-modxz:12", "heisenberg-full:5", "filiform:4",
    "semidirect-sign", "semidirect-square", "zpowers:32,3", "thinbox:4", "free:2,3",
)


def entries() -> list[CatalogEntry]:
    return [lookup(n) for n in CATALOG]


def check_fact(entry: CatalogEntry, fact: Fact) -> tuple[bool, str]:
    """Evaluate one expected fact; returns (ok, observed)."""
    from .balls import ball_profile
    from .growth import fit_growth
    from .topology import new_relation_scales_abelian

    g, s = entry.group, entry.generators
    if fact.kind == "profile_prefix":
        beta = ball_profile(g, s, len(fact.value) - 1).beta
        return beta == list(fact.value), str(beta)
    if fact.kind == "saturation":
        beta = ball_profile(g, s, fact.value).beta
        return beta[-1] == fact.value, str(beta[-1])
    if fact.kind == "order":
        return g.order() == fact.value, str(g.order())
    if fact.kind == "fit_degrees":
        prof = ball_profile(g, s, fact.params["radius"])
        degrees = fit_growth(prof, fact.params.get("anchor", 1)).function.degrees
        return degrees == list(fact.value), str(degrees)
    if fact.kind == "growth_degree":
        prof = ball_profile(g, s, fact.params["radius"])
        degrees = fit_growth(prof, fact.params.get("anchor", 1)).function.degrees
        return degrees[-1] == fact.value, str(degrees[-1])
    if fact.kind == "relation_scales":
        scales = new_relation_scales_abelian(g, g.standard_generators(), fact.params.get("n_max", 10))
        return scales == list(fact.value), str(scales)
    raise ValueError(f"unknown fact kind {fact.kind!r}")


def catalog_progressions() -> dict[str, "Progression"]:
    """Small named progressions used by the containment suites."""
    from .progression import Progression, nilpotent_progression

    z1, z2 = AbelianQuotient(1, []), AbelianQuotient(2, [])
    h = HeisenbergQuotient("none", 0)
    f22 = FreeNilpotentGroup(2, 2)
    fil = filiform_group(4)
    return {
        "z:1,5": Progression(z1, ((1,), (5,)), (2, 1)),
        "z^2:box": Progression(z2, ((1, 0), (0, 1)), (3, 2)),
        "z^2:skew": Progression(z2, ((1, 0), (1, 1)), (2, 1)),
        "heisenberg:xyz": Progression(h, ((1, 0, 0), (0, 1, 0), (0, 0, 1)), (2, 2, 4)),
        "heisenberg:xy": Progression(h, ((1, 0, 0), (0, 1, 0)), (1, 1)),
        "free:2,2": nilpotent_progression(f22, f22.standard_generators(), (1, 2), 2),
        "filiform:4": Progression(fil, tuple(fil.standard_generators()), (1, 1)),
    }
