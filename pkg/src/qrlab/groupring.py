"""Group ring arithmetic, the augmentation filtration, and its subgroups.

Elements of ZG or (Z/m)G are coefficient vectors indexed by the table's
canonical element order.  Two independent routes to the same filtration
live here: dimension_subgroup() reads D_n = {g : g - 1 in Delta^n} off the
augmentation-ideal powers, jennings_series() runs the recursion
D_n = [D_{n-1}, G] * (D_ceil(n/p))^p on the bare multiplication table.
Agreement of the two is asserted by callers, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .enumeration import FiniteGroupTable, Subgroup, subgroup_closure, prime_power
from .intlinalg import ModpSpan
from .presentation import Presentation


@dataclass(frozen=True)
class GroupRingElement:
    """Coefficient vector over a fixed table; modulus None means Z."""

    tbl: FiniteGroupTable
    coeffs: tuple[int, ...]
    modulus: int | None = None

    def __post_init__(self):
        if len(self.coeffs) != self.tbl.order:
            raise ValueError("coefficient vector length != group order")
        if self.modulus is not None and any(
            not 0 <= c < self.modulus for c in self.coeffs
        ):
            raise ValueError("coefficients not reduced mod modulus")

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._check_compatible(other)
        out = [a + b for a, b in zip(self.coeffs, other.coeffs)]
        if self.modulus is not None:
            out = [c % self.modulus for c in out]
        return GroupRingElement(self.tbl, tuple(out), self.modulus)

    def __mul__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._check_compatible(other)
        out = gr_multiply(self.tbl, self.coeffs, other.coeffs, self.modulus)
        return GroupRingElement(self.tbl, tuple(out), self.modulus)

    def _check_compatible(self, other):
        if self.tbl is not other.tbl or self.modulus != other.modulus:
            raise ValueError("mixed group rings")

    def augmentation(self) -> int:
        s = sum(self.coeffs)
        return s % self.modulus if self.modulus is not None else s


def gr_multiply(tbl: FiniteGroupTable, u, v, modulus: int | None = None) -> list[int]:
    """Convolution product in the group ring (dense, O(|G|^2))."""
    out = [0] * tbl.order
    mult = tbl.mult
    for g, a in enumerate(u):
        if a:
            row = mult[g]
            for h, b in enumerate(v):
                if b:
                    out[row[h]] += a * b
    if modulus is not None:
        out = [c % modulus for c in out]
    return out


def augmentation(vec) -> int:
    return sum(vec)


def left_translate(tbl: FiniteGroupTable, g: int, vec) -> list[int]:
    """g * v: coefficient of h moves to g*h."""
    out = [0] * tbl.order
    row = tbl.mult[g]
    for h, c in enumerate(vec):
        if c:
            out[row[h]] = c
    return out


def right_translate(tbl: FiniteGroupTable, vec, g: int) -> list[int]:
    """v * g: coefficient of h moves to h*g."""
    out = [0] * tbl.order
    for h, c in enumerate(vec):
        if c:
            out[tbl.mult[h][g]] = c
    return out


# ---------------------------------------------------------------------------
# augmentation filtration

def delta_filtration(tbl: FiniteGroupTable, p: int, max_n: int | None = None) -> list[ModpSpan]:
    """Echelonized bases of Delta^1, Delta^2, ... over F_p.

    Stops after Delta^n = Delta^(n+1) (from there on the chain is constant:
    Delta^(n+2) = Delta*Delta^(n+1) = Delta*Delta^n = Delta^(n+1)), or after
    max_n steps.  For p-groups the chain reaches 0.
    """
    n = tbl.order
    spans: list[ModpSpan] = []
    delta1 = ModpSpan(n, p)
    for g in range(1, n):
        vec = [0] * n
        vec[g] = 1
        vec[0] -= 1
        delta1.add(vec)
    spans.append(delta1)
    while max_n is None or len(spans) < max_n:
        prev = spans[-1]
        nxt = ModpSpan(n, p)
        for g in range(1, n):
            for w in prev.rows:
                tw = left_translate(tbl, g, w)
                nxt.add([a - b for a, b in zip(tw, w)])
                if nxt.dim == prev.dim:
                    break
            if nxt.dim == prev.dim:
                break
        spans.append(nxt)
        if nxt.dim == prev.dim or nxt.dim == 0:
            break
    return spans


def delta_power_basis(tbl: FiniteGroupTable, p: int, n: int) -> list[list[int]]:
    """Echelon basis of Delta^n inside F_p G (deterministic order)."""
    if n < 1:
        raise InputError("Delta power index must be >= 1")
    spans = delta_filtration(tbl, p, max_n=n)
    # a shorter list means the chain went constant (or hit 0) before n
    return [row[:] for row in spans[min(n, len(spans)) - 1].rows]


def delta_dimension_sequence(tbl: FiniteGroupTable, p: int) -> list[int]:
    """dims of Delta^1, Delta^2, ... down to 0 or to the stable value."""
    return [s.dim for s in delta_filtration(tbl, p)]


def _generators_for(tbl: FiniteGroupTable, members: list[int]) -> tuple[int, ...]:
    gens: list[int] = []
    have = {0}
    for x in members:
        if x not in have:
            gens.append(x)
            have = set(subgroup_closure(tbl, tuple(gens)).members)
    return tuple(gens)


def dimension_subgroup(tbl: FiniteGroupTable, p: int, n: int) -> Subgroup:
    """D_n = {g : g - 1 in Delta^n(F_p G)}.  Requires |G| = p^a."""
    pp = prime_power(tbl.order) if tbl.order > 1 else (p, 0)
    if pp is None or pp[0] != p:
        raise InputError(
            f"dimension subgroups over F_{p} need a {p}-group; order is {tbl.order}"
        )
    if n == 1:
        return subgroup_closure(tbl, tbl.gen_images)
    basis = delta_power_basis(tbl, p, n)
    span = ModpSpan(tbl.order, p)
    for row in basis:
        span.add(row)
    members = []
    for g in range(tbl.order):
        vec = [0] * tbl.order
        vec[g] += 1
        vec[0] -= 1
        if span.contains(vec):
            members.append(g)
    return Subgroup(tuple(members), _generators_for(tbl, members))


def dimension_subgroup_chain(tbl: FiniteGroupTable, p: int) -> list[Subgroup]:
    """D_1 (= G), D_2, ... down to and including the first trivial term."""
    pp = prime_power(tbl.order) if tbl.order > 1 else (p, 0)
    if pp is None or pp[0] != p:
        raise InputError(
            f"dimension subgroups over F_{p} need a {p}-group; order is {tbl.order}"
        )
    chain = [subgroup_closure(tbl, tbl.gen_images)]
    if tbl.order == 1:
        return chain
    spans = delta_filtration(tbl, p)
    if spans[-1].dim != 0:
        raise AssertionError("augmentation filtration of a p-group did not reach 0")
    n = 2
    while True:
        span = spans[min(n, len(spans)) - 1]
        members = []
        for g in range(tbl.order):
            vec = [0] * tbl.order
            vec[g] += 1
            vec[0] -= 1
            if span.contains(vec):
                members.append(g)
        chain.append(Subgroup(tuple(members), _generators_for(tbl, members)))
        if len(members) == 1:
            return chain
        n += 1


def jennings_series(tbl: FiniteGroupTable, p: int) -> list[Subgroup]:
    """Independent oracle for the same chain, from the Jennings recursion."""
    pp = prime_power(tbl.order) if tbl.order > 1 else (p, 0)
    if pp is None or pp[0] != p:
        raise InputError(
            f"Jennings series over F_{p} needs a {p}-group; order is {tbl.order}"
        )
    full = subgroup_closure(tbl, tbl.gen_images)
    chain = [full]
    if tbl.order == 1:
        return chain
    guard = 0
    while chain[-1].order > 1:
        n = len(chain) + 1
        prev = chain[-1]
        frac = chain[(n + p - 1) // p - 1]  # D_ceil(n/p)
        gens = set()
        for d in prev.members:
            for g in range(tbl.order):
                gens.add(tbl.mult[tbl.mult[tbl.mult[d][g]][tbl.inv[d]]][tbl.inv[g]])
        for d in frac.members:
            gens.add(tbl.power(d, p))
        gens.discard(0)
        chain.append(subgroup_closure(tbl, tuple(sorted(gens))))
        guard += 1
        if guard > 2 * tbl.order + 4:
            raise AssertionError("Jennings recursion did not terminate")
    return chain


# ---------------------------------------------------------------------------
# Fox derivative rows

def fox_rows(pres: Presentation, tbl: FiniteGroupTable) -> list[list[int]]:
    """One integer row per relator: the images pi(dr/dx_i) laid out as
    |X| consecutive blocks of length |G|.

    Product rule dr(uv) = dr(u) + u*dr(v), with d(x)/dx = 1 and
    d(x^-1)/dx = -x^-1.  The fundamental identity
    sum_i pi(dr/dx_i) (pi(x_i) - 1) = pi(r) - 1 = 0 is asserted per row.
    """
    ngens = pres.ngens
    n = tbl.order
    rows = []
    for r in pres.relators:
        row = [0] * (ngens * n)
        prefix = 0
        for g, s in r:
            img = tbl.gen_images[g]
            if s > 0:
                row[g * n + prefix] += 1
                prefix = tbl.mult[prefix][img]
            else:
                prefix = tbl.mult[prefix][tbl.inv[img]]
                row[g * n + prefix] -= 1
        if prefix != 0:
            raise AssertionError("relator image is not the identity")
        total = [0] * n
        for g in range(ngens):
            block = row[g * n:(g + 1) * n]
            shifted = right_translate(tbl, block, tbl.gen_images[g])
            for k in range(n):
                total[k] += shifted[k] - block[k]
        if any(total):
            raise AssertionError("Fox fundamental identity fails")
        rows.append(row)
    return rows
