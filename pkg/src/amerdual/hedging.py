"""Primal superhedging linear programs.

Three variants of the same minimal-initial-capital problem: a European claim
hedged with predictable trading plus static option positions, an American
claim hedged with one strategy branch per exercise date under the usual
pre-exercise consistency constraints, and the European reformulation of the
American claim on the scenario x exercise-date product space.  The American
LP is built directly from the per-branch definition, with the consistency
equalities as explicit rows; cross-checking it against the product-space LP
is deliberate redundancy (the two are equal by the strategy bijection, and
tests lean on that).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnboundedBelow
from .lp import MIN, OPTIMAL, UNBOUNDED, LpBuilder, solve
from .market import (
    AmericanPayoff,
    EnlargedMarket,
    FiniteFilteredMarket,
    enlarge,
    normalize_statics,
)
from .scalar import is_neg_inf, zero


@dataclass
class EuropeanHedge:
    value: object
    strategy: dict  # (k, time-(k-1) atom node) -> position vector
    h: list


@dataclass
class AmericanHedge:
    value: object
    branches: dict  # exercise date j -> {(k, atom node) -> position vector}
    h: list


@dataclass
class EnlargedHedge:
    value: object
    strategy: dict  # (k, enlarged atom key at k-1) -> position vector
    h: list


def _add_strategy_vars(bld, keys):
    for key in keys:
        bld.var(key)


def _extract_vectors(bld, sol, keys, dim):
    out = {}
    for key in keys:
        k_atom = key[:-1]
        out.setdefault(k_atom, [None] * dim)[key[-1]] = bld.value_of(sol, key)
    return {ka[1:]: tuple(vec) for ka, vec in out.items()}


def price_european(m: FiniteFilteredMarket, xi, use_statics: bool = True) -> EuropeanHedge:
    """Minimal x with  x + (H o S)_N + h.g >= xi  on every scenario.

    Raises UnboundedBelow when no finite price exists (uniform arbitrage).
    """
    m = normalize_statics(m)
    d = m.asset_dim
    bld = LpBuilder(m.mode)
    bld.var("x", cost=1)
    keys = []
    for k in range(1, m.horizon + 1):
        for atom in m.nodes_at(k - 1):
            for c in range(d):
                keys.append(("H", k, atom, c))
    _add_strategy_vars(bld, keys)
    nstat = len(m.statics) if use_statics else 0
    for i in range(nstat):
        bld.var(("h", i))

    for p in m.paths:
        target = xi[p]
        if is_neg_inf(target):
            continue  # no requirement on masked scenarios
        terms = [("x", 1)]
        for k in range(1, m.horizon + 1):
            atom = m.ancestor(p, k - 1)
            for c, dc in enumerate(m.dS(p, k)):
                terms.append((("H", k, atom, c), dc))
        for i in range(nstat):
            terms.append((("h", i), m.statics[i].payoff[p]))
        bld.add_lb(terms, target)

    sol = solve(bld.problem(MIN))
    if sol.status == UNBOUNDED:
        raise UnboundedBelow("European superhedging LP is unbounded below")
    assert sol.status == OPTIMAL
    strategy = _extract_vectors(bld, sol, keys, d)
    h = [bld.value_of(sol, ("h", i)) for i in range(nstat)]
    if not use_statics:
        h = [zero(m.mode)] * len(m.statics)
    return EuropeanHedge(bld.value_of(sol, "x"), strategy, h)


def price_american(m: FiniteFilteredMarket, phi: AmericanPayoff,
                   use_statics: bool = True) -> AmericanHedge:
    """Minimal x dominating every exercise date with branch-consistent strategies.

    Branch j is the strategy used when exercise happens at date j; branches
    must agree at all dates up to and including the earlier exercise date.
    Masked (-inf) payoff entries generate no constraint rows.
    """
    m = normalize_statics(m)
    phi.validate_for(m)
    d = m.asset_dim
    N = m.horizon
    bld = LpBuilder(m.mode)
    bld.var("x", cost=1)
    branch_keys = {}
    for j in range(1, N + 1):
        keys = []
        for k in range(1, N + 1):
            for atom in m.nodes_at(k - 1):
                for c in range(d):
                    keys.append(("B", j, k, atom, c))
        _add_strategy_vars(bld, keys)
        branch_keys[j] = keys
    nstat = len(m.statics) if use_statics else 0
    for i in range(nstat):
        bld.var(("h", i))

    # consistency: consecutive branches share all positions up to the earlier date
    for j in range(1, N):
        for i in range(1, j + 1):
            for atom in m.nodes_at(i - 1):
                for c in range(d):
                    bld.add_eq(
                        [(("B", j, i, atom, c), 1), (("B", j + 1, i, atom, c), -1)], 0
                    )

    for k in range(1, N + 1):
        for p in m.paths:
            target = phi.value(k, p)
            if is_neg_inf(target):
                continue
            terms = [("x", 1)]
            for step in range(1, N + 1):
                atom = m.ancestor(p, step - 1)
                for c, dc in enumerate(m.dS(p, step)):
                    terms.append((("B", k, step, atom, c), dc))
            for i in range(nstat):
                terms.append((("h", i), m.statics[i].payoff[p]))
            bld.add_lb(terms, target)

    sol = solve(bld.problem(MIN))
    if sol.status == UNBOUNDED:
        raise UnboundedBelow("American superhedging LP is unbounded below")
    assert sol.status == OPTIMAL
    branches = {}
    for j in range(1, N + 1):
        vecs = {}
        for key in branch_keys[j]:
            _, _, k, atom, c = key
            vecs.setdefault((k, atom), [None] * d)[c] = bld.value_of(sol, key)
        branches[j] = {ka: tuple(v) for ka, v in vecs.items()}
    h = [bld.value_of(sol, ("h", i)) for i in range(nstat)]
    if not use_statics:
        h = [zero(m.mode)] * len(m.statics)
    return AmericanHedge(bld.value_of(sol, "x"), branches, h)


def price_european_enlarged(em: EnlargedMarket, phi: AmericanPayoff,
                            use_statics: bool = True) -> EnlargedHedge:
    """Same American claim priced as a European one on scenario x date points."""
    base = normalize_statics(em.base)
    em = enlarge(base)
    phi.validate_for(base)
    d = base.asset_dim
    N = base.horizon
    bld = LpBuilder(base.mode)
    bld.var("x", cost=1)
    keys = []
    for k in range(1, N + 1):
        for atom in em.atoms_at(k - 1):
            for c in range(d):
                keys.append(("H", k, atom, c))
    _add_strategy_vars(bld, keys)
    nstat = len(base.statics) if use_statics else 0
    for i in range(nstat):
        bld.var(("h", i))

    for point in em.points:
        path, theta = point
        target = phi.value(theta, path)
        if is_neg_inf(target):
            continue
        terms = [("x", 1)]
        for k in range(1, N + 1):
            atom = em.atom_of(point, k - 1)
            for c, dc in enumerate(em.dS(point, k)):
                terms.append((("H", k, atom, c), dc))
        for i in range(nstat):
            terms.append((("h", i), base.statics[i].payoff[path]))
        bld.add_lb(terms, target)

    sol = solve(bld.problem(MIN))
    if sol.status == UNBOUNDED:
        raise UnboundedBelow("enlarged superhedging LP is unbounded below")
    assert sol.status == OPTIMAL
    strategy = _extract_vectors(bld, sol, keys, d)
    h = [bld.value_of(sol, ("h", i)) for i in range(nstat)]
    if not use_statics:
        h = [zero(base.mode)] * len(base.statics)
    return EnlargedHedge(bld.value_of(sol, "x"), strategy, h)
