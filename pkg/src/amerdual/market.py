"""Finite filtered markets: event trees, statics, payoffs, and the time enlargement.

A market is a rooted tree over times 0..N.  Terminal (time-N) nodes are the
scenario set; the time-k ancestors partition scenarios into the time-k
information atoms, so the tree itself encodes the filtration.  Assets are
node-level vectors (an adapted process); statically traded options are maps
on terminal scenarios (measurable at N only, so American/European portfolio
mixes stay expressible).  The enlargement pairs every scenario with an
exercise date and refines atoms with the exercise history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ModelFormatError
from .lp import MIN, LpBuilder, check_feasible
from .scalar import (
    EPS,
    NEG_INF,
    RATIONAL,
    is_neg_inf,
    scalar_to_json,
    to_scalar,
    zero,
)

SCHEMA = "amerdual/1"


@dataclass
class Node:
    id: str
    time: int
    parent: str | None
    assets: tuple


@dataclass
class Static:
    payoff: dict  # terminal path id -> scalar
    price: object
    label: str = ""


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    node_ids: tuple = ()


class FiniteFilteredMarket:
    """Event tree + assets + statics.  Immutable after construction by convention."""

    def __init__(self, horizon, nodes, statics=(), name="", mode=RATIONAL):
        self.horizon = int(horizon)
        self.mode = mode
        self.name = name
        self.nodes = []
        for n in nodes:
            if isinstance(n, Node):
                nid, t, parent, assets = n.id, n.time, n.parent, n.assets
            else:
                nid, t, parent, assets = n["id"], n["time"], n.get("parent"), n["assets"]
            self.nodes.append(
                Node(str(nid), int(t), None if parent is None else str(parent),
                     tuple(to_scalar(a, mode) for a in assets))
            )
        self.statics = []
        for s in statics:
            if isinstance(s, Static):
                payoff, price, label = s.payoff, s.price, s.label
            else:
                payoff, price, label = s["payoff"], s["price"], s.get("label", "")
            self.statics.append(
                Static({str(p): to_scalar(v, mode) for p, v in payoff.items()},
                       to_scalar(price, mode), label)
            )
        self._indexed = False

    # -- structural indexes (built lazily; require a shape-valid tree) -------

    def _ensure_indexes(self):
        if self._indexed:
            return
        bad = validate(self)
        if bad:
            raise ModelFormatError("invalid market: " + "; ".join(v.message for v in bad))
        self._by_id = {n.id: n for n in self.nodes}
        self._children = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None:
                self._children[n.parent].append(n.id)
        self._levels = [[] for _ in range(self.horizon + 1)]
        for n in self.nodes:
            self._levels[n.time].append(n.id)
        self._paths = tuple(self._levels[self.horizon])
        self._ancestor = {}
        for p in self._paths:
            node = self._by_id[p]
            while True:
                self._ancestor[(p, node.time)] = node.id
                if node.parent is None:
                    break
                node = self._by_id[node.parent]
        self._atom_paths = {n.id: [] for n in self.nodes}
        for p in self._paths:
            for k in range(self.horizon + 1):
                self._atom_paths[self._ancestor[(p, k)]].append(p)
        self._indexed = True

    @property
    def paths(self):
        self._ensure_indexes()
        return self._paths

    @property
    def asset_dim(self):
        return len(self.nodes[0].assets) if self.nodes else 0

    def node(self, node_id):
        self._ensure_indexes()
        return self._by_id[node_id]

    def children(self, node_id):
        self._ensure_indexes()
        return tuple(self._children[node_id])

    def nodes_at(self, k):
        self._ensure_indexes()
        return tuple(self._levels[k])

    def atom_paths(self, node_id):
        self._ensure_indexes()
        return tuple(self._atom_paths[node_id])

    def ancestor(self, path_id, k):
        self._ensure_indexes()
        return self._ancestor[(path_id, k)]

    def S(self, path_id, k):
        return self.node(self.ancestor(path_id, k)).assets

    def dS(self, path_id, k):
        now = self.S(path_id, k)
        prev = self.S(path_id, k - 1)
        return tuple(a - b for a, b in zip(now, prev))

    def root(self):
        self._ensure_indexes()
        return self._levels[0][0]

    def with_statics(self, statics):
        return FiniteFilteredMarket(self.horizon, self.nodes, statics, self.name, self.mode)


def validate(m: FiniteFilteredMarket):
    """Invariant check; returns a list of violations (empty means valid)."""
    out = []
    if m.horizon < 1:
        out.append(Violation("Horizon", f"horizon {m.horizon} < 1"))
    seen = {}
    for n in m.nodes:
        if n.id in seen:
            out.append(Violation("DuplicateId", f"node id {n.id} repeated", (n.id,)))
        seen[n.id] = n
    roots = [n for n in m.nodes if n.time == 0]
    if len(roots) != 1:
        out.append(Violation(
            "RootCount", f"expected exactly one time-0 node, found {len(roots)}",
            tuple(n.id for n in roots)))
    dims = {len(n.assets) for n in m.nodes}
    if len(dims) > 1:
        out.append(Violation("AssetDim", f"inconsistent asset dimensions {sorted(dims)}"))
    has_child = set()
    for n in m.nodes:
        if n.time < 0 or n.time > m.horizon:
            out.append(Violation("TimeRange", f"node {n.id} at time {n.time}", (n.id,)))
            continue
        if n.time == 0:
            if n.parent is not None:
                out.append(Violation("TreeShape", f"root {n.id} has a parent", (n.id,)))
            continue
        parent = seen.get(n.parent)
        if parent is None:
            out.append(Violation("TreeShape", f"node {n.id} has unknown parent {n.parent}", (n.id,)))
        elif parent.time != n.time - 1:
            out.append(Violation(
                "TreeShape",
                f"node {n.id} at time {n.time} has parent {parent.id} at time {parent.time}",
                (n.id, parent.id)))
        else:
            has_child.add(parent.id)
    for n in m.nodes:
        if 0 <= n.time < m.horizon and n.id not in has_child:
            out.append(Violation("Childless", f"node {n.id} at time {n.time} has no children", (n.id,)))
    if not any(v.code in ("RootCount", "TreeShape", "TimeRange", "DuplicateId", "Childless")
               for v in out):
        paths = {n.id for n in m.nodes if n.time == m.horizon}
        for i, s in enumerate(m.statics):
            if set(s.payoff) != paths:
                out.append(Violation(
                    "StaticSupport",
                    f"static #{i} payoff keys do not match the terminal paths"))
    return out


def normalize_statics(m: FiniteFilteredMarket) -> FiniteFilteredMarket:
    """Shift every static payoff by its price; all prices become zero.

    Pricing and calibration code downstream assumes this zero-price form.
    Idempotent.
    """
    zr = zero(m.mode)
    statics = [
        Static({p: v - s.price for p, v in s.payoff.items()}, zr, s.label)
        for s in m.statics
    ]
    return m.with_statics(statics)


# ---------------------------------------------------------------------------
# payoffs


class AmericanPayoff:
    """Exercise-date x path payoff matrix; NEG_INF marks non-exercisable entries.

    Payoffs are delivered at the horizon and only need to be measurable at the
    horizon, so a row may depend on the whole scenario, not just the exercise
    date's information.
    """

    def __init__(self, values, mode=RATIONAL):
        self.mode = mode
        self.rows = {}
        for k, row in values.items():
            parsed = {}
            for p, v in row.items():
                sv = to_scalar(v, mode)
                if isinstance(sv, float) and sv == float("inf"):
                    raise ModelFormatError("+inf payoff entries are not allowed")
                parsed[str(p)] = sv
            self.rows[int(k)] = parsed

    def value(self, k, path):
        row = self.rows.get(k)
        if row is None:
            return NEG_INF
        return row.get(path, NEG_INF)

    def dates(self, horizon):
        return range(1, horizon + 1)

    def validate_for(self, m: FiniteFilteredMarket):
        paths = set(m.paths)
        for k, row in self.rows.items():
            if k < 1 or k > m.horizon:
                raise ModelFormatError(f"payoff date {k} outside 1..{m.horizon}")
            extra = set(row) - paths
            if extra:
                raise ModelFormatError(f"payoff row {k} has unknown paths {sorted(extra)}")
        if not any(
            not is_neg_inf(self.value(k, p))
            for k in self.dates(m.horizon)
            for p in m.paths
        ):
            raise ModelFormatError("payoff is -inf everywhere")


def european_payoff(m: FiniteFilteredMarket, xi, mode=None) -> AmericanPayoff:
    """Embed a terminal claim as an American payoff exercisable only at N."""
    mode = mode or m.mode
    rows = {k: {} for k in range(1, m.horizon)}
    rows[m.horizon] = dict(xi)
    return AmericanPayoff(rows, mode)


# ---------------------------------------------------------------------------
# the time enlargement


class EnlargedMarket:
    """Scenario x exercise-date product space with its refined atom structure.

    The time-k atom of a point (path, theta) is (time-k atom of path) x
    ({theta} if theta <= k else {k+1..N}); atom keys are (node_id, theta) for
    settled dates and (node_id, None) for the still-open part.
    """

    def __init__(self, base: FiniteFilteredMarket):
        base._ensure_indexes()
        self.base = base
        N = base.horizon
        self.points = tuple((p, th) for p in base.paths for th in range(1, N + 1))

    @property
    def horizon(self):
        return self.base.horizon

    @property
    def mode(self):
        return self.base.mode

    @property
    def statics(self):
        return self.base.statics

    def atom_of(self, point, k):
        path, theta = point
        node = self.base.ancestor(path, k)
        return (node, theta) if theta <= k else (node, None)

    def atoms_at(self, k):
        N = self.base.horizon
        out = []
        for node in self.base.nodes_at(k):
            for th in range(1, min(k, N) + 1):
                out.append((node, th))
            if k < N:
                out.append((node, None))
        return tuple(out)

    def atom_points(self, key, k):
        node, part = key
        N = self.base.horizon
        paths = self.base.atom_paths(node)
        if part is not None:
            return tuple((p, part) for p in paths)
        return tuple((p, th) for p in paths for th in range(k + 1, N + 1))

    def S(self, point, k):
        return self.base.S(point[0], k)

    def dS(self, point, k):
        return self.base.dS(point[0], k)


def enlarge(m: FiniteFilteredMarket) -> EnlargedMarket:
    return EnlargedMarket(m)


# ---------------------------------------------------------------------------
# measures


def _validate_weights(weights, mode):
    zr = zero(mode)
    tol = zr if mode == RATIONAL else EPS
    total = zr
    clean = {}
    for key, w in weights.items():
        if w < -tol:
            raise ValueError(f"negative weight {w} at {key}")
        if mode != RATIONAL and w < 0:
            w = 0.0
        clean[key] = w
        total += w
    if abs(total - 1) > tol:
        raise ValueError(f"weights sum to {total}, expected 1")
    return clean


class PathMeasure:
    """Probability weights on terminal scenarios."""

    def __init__(self, weights, mode=RATIONAL, validated=False):
        self.mode = mode
        w = {str(p): to_scalar(v, mode) for p, v in weights.items()}
        self.weights = w if validated else _validate_weights(w, mode)

    def mass(self, path):
        return self.weights.get(path, zero(self.mode))

    def support(self):
        zr = zero(self.mode)
        return tuple(p for p, w in self.weights.items() if w > zr)


class EnlargedMeasure:
    """Probability weights on (scenario, exercise date) points."""

    def __init__(self, weights, mode=RATIONAL, validated=False):
        self.mode = mode
        w = {(str(p), int(th)): to_scalar(v, mode) for (p, th), v in weights.items()}
        self.weights = w if validated else _validate_weights(w, mode)

    def mass(self, point):
        return self.weights.get(point, zero(self.mode))

    def support(self):
        zr = zero(self.mode)
        return tuple(pt for pt, w in self.weights.items() if w > zr)

    def marginal(self) -> PathMeasure:
        out = {}
        for (p, _), w in self.weights.items():
            out[p] = out.get(p, zero(self.mode)) + w
        return PathMeasure(out, self.mode, validated=True)


# ---------------------------------------------------------------------------
# pathwise no-arbitrage


@dataclass
class Arbitrage:
    strategy: dict  # (k, atom node at k-1) -> gain vector coefficients
    h: list
    gains: dict  # scenario (or point) -> realized gain


def _gain_terms_base(m, path):
    for k in range(1, m.horizon + 1):
        atom = m.ancestor(path, k - 1)
        d = m.dS(path, k)
        for c, dc in enumerate(d):
            yield ("H", k, atom, c), dc


def check_na(m: FiniteFilteredMarket):
    """Pathwise arbitrage scan: a strategy with gain >= 0 everywhere and total
    gain >= 1 if one exists, else None.  Statics enter with free weights."""
    m = normalize_statics(m)
    m._ensure_indexes()
    return _na_scan(
        mode=m.mode,
        carriers=m.paths,
        gain_terms=lambda p: _gain_terms_base(m, p),
        statics=m.statics,
        static_value=lambda s, p: s.payoff[p],
    )


def check_na_enlarged(m: FiniteFilteredMarket):
    """Same scan on the enlarged space with enlargement-predictable strategies."""
    em = enlarge(normalize_statics(m))

    def terms(point):
        for k in range(1, em.horizon + 1):
            atom = em.atom_of(point, k - 1)
            d = em.dS(point, k)
            for c, dc in enumerate(d):
                yield ("H", k, atom, c), dc

    return _na_scan(
        mode=em.mode,
        carriers=em.points,
        gain_terms=terms,
        statics=em.statics,
        static_value=lambda s, pt: s.payoff[pt[0]],
    )


def _na_scan(mode, carriers, gain_terms, statics, static_value):
    bld = LpBuilder(mode)
    rows = []
    for w in carriers:
        terms = []
        for key, coeff in gain_terms(w):
            if not bld.has(key):
                bld.var(key)
            terms.append((key, coeff))
        for i, s in enumerate(statics):
            key = ("h", i)
            if not bld.has(key):
                bld.var(key)
            terms.append((key, static_value(s, w)))
        rows.append((w, terms))
    for _, terms in rows:
        bld.add_lb(terms, 0)
    total = []
    for _, terms in rows:
        total.extend(terms)
    bld.add_lb(total, 1)
    feasible, x = check_feasible(bld.problem(MIN))
    if not feasible:
        return None
    strategy = {}
    h = [zero(mode)] * len(statics)
    sol_x = x
    for key, idx in bld._index.items():
        if key[0] == "H":
            _, k, atom, c = key
            strategy.setdefault((k, atom), {})[c] = sol_x[idx]
        else:
            h[key[1]] = sol_x[idx]
    gains = {}
    for w, terms in rows:
        g = zero(mode)
        for key, coeff in terms:
            g += coeff * sol_x[bld._index[key]]
        gains[w] = g
    strategy = {
        ka: tuple(coords[c] for c in sorted(coords)) for ka, coords in strategy.items()
    }
    return Arbitrage(strategy, h, gains)


# ---------------------------------------------------------------------------
# JSON model schema v1


def market_to_json(m: FiniteFilteredMarket, phi: AmericanPayoff | None = None) -> dict:
    data = {
        "schema": SCHEMA,
        "horizon": m.horizon,
        "nodes": [
            {"id": n.id, "time": n.time, "parent": n.parent,
             "assets": [scalar_to_json(a) for a in n.assets]}
            for n in m.nodes
        ],
        "statics": [
            {"payoff": {p: scalar_to_json(v) for p, v in s.payoff.items()},
             "price": scalar_to_json(s.price)}
            for s in m.statics
        ],
    }
    if m.name:
        data["name"] = m.name
    if phi is not None:
        data["american"] = {
            str(k): {p: scalar_to_json(v) for p, v in row.items()}
            for k, row in sorted(phi.rows.items())
        }
    return data


def market_from_json(data, mode=RATIONAL):
    """Parse a model dict (or JSON text); returns (market, payoff-or-None)."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelFormatError("model must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise ModelFormatError(f'expected "schema": "{SCHEMA}"')
    try:
        market = FiniteFilteredMarket(
            data["horizon"], data["nodes"], data.get("statics", ()),
            name=data.get("name", ""), mode=mode,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad model structure: {exc}") from exc
    bad = validate(market)
    if bad:
        raise ModelFormatError("invalid market: " + "; ".join(v.message for v in bad))
    phi = None
    if "american" in data:
        try:
            phi = AmericanPayoff(data["american"], mode)
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"bad american payoff: {exc}") from exc
        phi.validate_for(market)
    return market, phi
