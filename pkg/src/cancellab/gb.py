"""Buchberger engine with cofactor tracking, certificates, elimination tools.

Every basis element carries a *recipe*: an expression as a polynomial
combination of input generators and earlier basis elements.  Recipes are
expanded into explicit cofactor vectors only when a certificate needs them.
"""

from __future__ import annotations

import atexit
import heapq
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .errors import NoPreimage, NotMember, ResourceBudgetExceeded
from .poly import GREVLEX, MonomialOrder, Polynomial

DEFAULT_MAX_STEPS = 10 ** 6
DEFAULT_MAX_DEGREE = 64


@dataclass
class Budget:
    """Desk-scale guardrail for Groebner computations."""

    max_steps: int = DEFAULT_MAX_STEPS
    max_degree: int = DEFAULT_MAX_DEGREE
    steps: int = 0

    def spend(self, n: int = 1) -> None:
        self.steps += n
        if self.steps > self.max_steps:
            raise ResourceBudgetExceeded(f"more than {self.max_steps} reduction steps")


_default_budget = Budget()


def set_default_budget(max_steps: int | None = None, max_degree: int | None = None) -> None:
    if max_steps is not None:
        _default_budget.max_steps = max_steps
    if max_degree is not None:
        _default_budget.max_degree = max_degree


_default_workers = 1


def set_default_workers(n: int) -> None:
    """Worker processes used by :func:`buchberger` when not given explicitly."""
    global _default_workers
    _default_workers = max(1, int(n))


def default_budget() -> Budget:
    return Budget(_default_budget.max_steps, _default_budget.max_degree)


# --------------------------------------------------------------------------
# low-level reduction on term dicts


def _mask(e) -> int:
    m = 0
    for i, k in enumerate(e):
        if k:
            m |= 1 << i
    return m


def _divides(a, b) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _reduce(terms: dict, basis: Sequence[tuple], key, budget: Budget | None, track: bool):
    """Fully reduce ``terms`` by monic basis entries ``(lead, mask, tail)``.

    Returns ``(remainder, quotients)``; quotients map basis position to a term
    dict (only when ``track``).
    """
    p = dict(terms)
    heap = [(-key(e), e) for e in p]
    heapq.heapify(heap)
    rem: dict = {}
    quots: dict = {}
    steps = 0
    while heap:
        _, e = heapq.heappop(heap)
        c = p.pop(e, None)
        if c is None:
            continue
        em = _mask(e)
        hit = -1
        for pos, (lead, mask, _tail) in enumerate(basis):
            if mask & ~em == 0 and _divides(lead, e):
                hit = pos
                break
        if hit < 0:
            rem[e] = c
            continue
        lead, _mask_, tail = basis[hit]
        shift = tuple([a - b for a, b in zip(e, lead)])
        steps += 1
        for te, tc in tail:
            ne = tuple([a + b for a, b in zip(te, shift)])
            old = p.get(ne)
            if old is None:
                p[ne] = -c * tc
                heapq.heappush(heap, (-key(ne), ne))
            else:
                v = old - c * tc
                if v:
                    p[ne] = v
                else:
                    del p[ne]
        if track:
            q = quots.setdefault(hit, {})
            q[shift] = q.get(shift, 0) + c
    if budget is not None and steps:
        budget.spend(steps)
    return rem, quots


def _reduce_task(args):
    terms, basis, order, vars = args
    key = order.key_function(vars)
    return _reduce(terms, basis, key, None, True)


def _lcm(a, b):
    return tuple([x if x > y else y for x, y in zip(a, b)])


def _disjoint(a, b) -> bool:
    for x, y in zip(a, b):
        if x and y:
            return False
    return True


# --------------------------------------------------------------------------
# basis objects


class GroebnerBasis:
    """Reduced, monic Groebner basis with lazily expanded cofactor matrix.

    ``generators[i] == sum(cofactors[i][k] * inputs[k])`` holds exactly.
    """

    def __init__(self, vars, order, inputs, polys, recipes, basis_ids, budget):
        self.vars = tuple(vars)
        self.order = order
        self.inputs: list[Polynomial] = inputs
        self._polys = polys          # all intermediate polynomials (term dicts)
        self._recipes = recipes      # per intermediate: list of (Polynomial multiplier, source)
        self._ids = basis_ids        # intermediate indices forming the reduced basis
        self.generators = [Polynomial(self.vars, polys[i], _trusted=True) for i in basis_ids]
        self.budget = budget
        key = order.key_function(self.vars)
        self._key = key
        self._table = []
        for g in self.generators:
            lead = max(g.terms, key=key)
            tail = [(e, c) for e, c in g.terms.items() if e != lead]
            self._table.append((lead, _mask(lead), tail))
        self._cof_memo: dict = {}
        self._cofactors = None

    # -- queries
    def __len__(self):
        return len(self.generators)

    def is_unit(self) -> bool:
        return len(self.generators) == 1 and self.generators[0].is_constant()

    def leading_monomials(self) -> list[tuple]:
        return [t[0] for t in self._table]

    def is_standard(self, exp) -> bool:
        em = _mask(exp)
        return not any(mask & ~em == 0 and _divides(lead, exp) for lead, mask, _ in self._table)

    def _coerce(self, p: Polynomial) -> Polynomial:
        if p.vars != self.vars:
            p = p.to_ambient(self.vars)
        return p

    def reduce(self, p: Polynomial) -> Polynomial:
        """Normal form only (no quotient tracking)."""
        p = self._coerce(p)
        if not self._table or not p.terms:
            return p
        rem, _ = _reduce(p.terms, self._table, self._key, self.budget, False)
        return Polynomial(self.vars, rem, _trusted=True)

    def normal_form(self, p: Polynomial) -> tuple[Polynomial, list[Polynomial]]:
        """``p = sum(combiners[i] * generators[i]) + remainder`` exactly."""
        p = self._coerce(p)
        rem, quots = _reduce(p.terms, self._table, self._key, self.budget, True)
        comb = [Polynomial(self.vars, quots.get(i, {}), _trusted=True) for i in range(len(self._table))]
        return Polynomial(self.vars, rem, _trusted=True), comb

    def contains(self, p: Polynomial) -> bool:
        return self.reduce(p).is_zero()

    # -- cofactors
    def _expand(self, idx: int) -> dict:
        # iterative post-order walk; recipes only reference earlier indices
        stack = [idx]
        while stack:
            i = stack[-1]
            if i in self._cof_memo:
                stack.pop()
                continue
            missing = [s[1] for _, s in self._recipes[i] if s[0] == "g" and s[1] not in self._cof_memo]
            if missing:
                stack.extend(missing)
                continue
            stack.pop()
            out: dict[int, Polynomial] = {}
            for mult, src in self._recipes[i]:
                if src[0] == "in":
                    parts = {src[1]: Polynomial.const(1, self.vars)}
                else:
                    parts = self._cof_memo[src[1]]
                for k, c in parts.items():
                    term = mult * c
                    out[k] = out[k] + term if k in out else term
            self._cof_memo[i] = {k: v for k, v in out.items() if v}
        return self._cof_memo[idx]

    @property
    def cofactors(self) -> list[list[Polynomial]]:
        if self._cofactors is None:
            rows = []
            for i in self._ids:
                ex = self._expand(i)
                rows.append([ex.get(k, Polynomial.zero(self.vars)) for k in range(len(self.inputs))])
            self._cofactors = rows
        return self._cofactors

    def express(self, p: Polynomial) -> tuple[Polynomial, list[Polynomial]]:
        """Remainder and combiners with respect to the *input* generators."""
        rem, comb = self.normal_form(p)
        out = [Polynomial.zero(self.vars) for _ in self.inputs]
        rows = None
        for i, c in enumerate(comb):
            if not c:
                continue
            if rows is None:
                rows = self.cofactors
            for k, cf in enumerate(rows[i]):
                if cf:
                    out[k] = out[k] + c * cf
        return rem, out

    def check_cofactors(self) -> bool:
        for g, row in zip(self.generators, self.cofactors):
            acc = Polynomial.zero(self.vars)
            for c, f in zip(row, self.inputs):
                if c:
                    acc = acc + c * f
            if acc != g:
                return False
        return True

    def s_pairs_reduce_to_zero(self) -> bool:
        n = len(self._table)
        for i in range(n):
            for j in range(i + 1, n):
                li, lj = self._table[i][0], self._table[j][0]
                lcm = _lcm(li, lj)
                a = self.generators[i].mul_monomial(tuple(x - y for x, y in zip(lcm, li)))
                b = self.generators[j].mul_monomial(tuple(x - y for x, y in zip(lcm, lj)))
                if not self.reduce(a - b).is_zero():
                    return False
        return True

    def is_reduced(self) -> bool:
        for i, g in enumerate(self.generators):
            if self._table[i] and g.terms[self._table[i][0]] != 1:
                return False
            others = [t for j, t in enumerate(self._table) if j != i]
            for e in g.terms:
                em = _mask(e)
                if any(mask & ~em == 0 and _divides(lead, e) for lead, mask, _ in others):
                    return False
        return True

    def serialize(self) -> list[str]:
        return [g.format(self.order) for g in self.generators]


# --------------------------------------------------------------------------
# Buchberger


class _Builder:
    def __init__(self, vars, order, budget):
        self.vars = vars
        self.order = order
        self.key = order.key_function(vars)
        self.budget = budget
        self.polys: list[dict] = []
        self.recipes: list[list] = []
        self.lead: list[tuple] = []
        self.masks: list[int] = []
        self.tails: list[list] = []

    def table(self, ids):
        return [(self.lead[i], self.masks[i], self.tails[i]) for i in ids]

    def add(self, terms: dict, recipe: list) -> int:
        lead = max(terms, key=self.key)
        lc = terms[lead]
        if lc != 1:
            inv = 1 / lc
            terms = {e: c * inv for e, c in terms.items()}
            recipe = [(m.scale(inv), s) for m, s in recipe]
        if sum(lead) > self.budget.max_degree:
            raise ResourceBudgetExceeded(f"basis element of degree {sum(lead)} exceeds {self.budget.max_degree}")
        self.polys.append(terms)
        self.recipes.append(recipe)
        self.lead.append(lead)
        self.masks.append(_mask(lead))
        self.tails.append([(e, c) for e, c in terms.items() if e != lead])
        return len(self.polys) - 1

    def quot_recipe(self, quots: dict, ids: list) -> list:
        out = []
        for pos in sorted(quots):
            out.append((Polynomial(self.vars, {e: -c for e, c in quots[pos].items() if c}, _trusted=True),
                        ("g", ids[pos])))
        return out


_PARALLEL_MIN = 4
_pools: dict = {}


def _shared_pool(workers: int):
    pool = _pools.get(workers)
    if pool is None:
        pool = ProcessPoolExecutor(workers)
        _pools[workers] = pool
        atexit.register(pool.shutdown)
    return pool


def buchberger(gens: Sequence[Polynomial], order: MonomialOrder = GREVLEX, *,
               budget: Budget | None = None, workers: int | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of ``gens`` with cofactor recipes.

    Pairs are processed in batches of minimal lcm degree; within a batch the
    S-polynomials are reduced against a snapshot of the basis (optionally in
    worker processes) and inserted sequentially in (i, j) order, so the output
    does not depend on ``workers``.
    """
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator (use the zero polynomial for the zero ideal)")
    vars = gens[0].vars
    for g in gens:
        if g.vars != vars:
            from .errors import AmbientMismatch
            raise AmbientMismatch(f"{g.vars} vs {vars}")
    budget = budget or default_budget()
    b = _Builder(vars, order, budget)
    key = b.key
    G: list[int] = []
    B: list[tuple[int, int]] = []

    def insert(h: int) -> None:
        nonlocal G, B
        lh = b.lead[h]
        C = list(G)
        D: list[int] = []
        while C:
            g1 = C.pop(0)
            l1 = _lcm(lh, b.lead[g1])
            if _disjoint(lh, b.lead[g1]):
                D.append(g1)
                continue
            dominated = False
            for g2 in C + D:
                l2 = _lcm(lh, b.lead[g2])
                if _divides(l2, l1):
                    dominated = True
                    break
            if not dominated:
                D.append(g1)
        E = [(g, h) for g in D if not _disjoint(lh, b.lead[g])]
        newB = []
        for (g1, g2) in B:
            l12 = _lcm(b.lead[g1], b.lead[g2])
            if (_divides(lh, l12) and _lcm(b.lead[g1], lh) != l12 and _lcm(lh, b.lead[g2]) != l12):
                continue
            newB.append((g1, g2))
        B = newB + E
        G = [g for g in G if not _divides(lh, b.lead[g])] + [h]

    # seed with inputs, each reduced against the current basis
    for k, g in enumerate(gens):
        if not g.terms:
            continue
        rem, quots = _reduce(g.terms, b.table(G), key, budget, True)
        if rem:
            rec = [(Polynomial.const(1, vars), ("in", k))] + b.quot_recipe(quots, G)
            insert(b.add(rem, rec))

    workers = _default_workers if workers is None else workers
    pool = _shared_pool(workers) if workers > 1 else None
    while B:
        degs = {p: sum(_lcm(b.lead[p[0]], b.lead[p[1]])) for p in B}
        dmin = min(degs.values())
        batch = sorted(p for p in B if degs[p] == dmin)
        B = [p for p in B if degs[p] != dmin]
        snapshot = list(G)
        table = b.table(snapshot)
        spolys = []
        for (i, j) in batch:
            L = _lcm(b.lead[i], b.lead[j])
            ti = tuple(x - y for x, y in zip(L, b.lead[i]))
            tj = tuple(x - y for x, y in zip(L, b.lead[j]))
            s: dict = {}
            for e, c in b.tails[i]:
                s[tuple(x + y for x, y in zip(e, ti))] = c
            for e, c in b.tails[j]:
                ne = tuple(x + y for x, y in zip(e, tj))
                v = s.get(ne, 0) - c
                if v:
                    s[ne] = v
                else:
                    s.pop(ne, None)
            spolys.append((s, ti, tj))
        if pool is not None and len(spolys) >= _PARALLEL_MIN:
            results = list(pool.map(_reduce_task, [(s, table, order, vars) for s, _, _ in spolys]))
            budget.spend(len(results))
        else:
            results = [_reduce(s, table, key, budget, True) for s, _, _ in spolys]
        for (i, j), (s, ti, tj), (rem, quots) in zip(batch, spolys, results):
            rec = [(Polynomial.monomial(ti, vars), ("g", i)),
                   (Polynomial.monomial(tj, vars, -1), ("g", j))] + b.quot_recipe(quots, snapshot)
            if rem:
                # elements inserted earlier in this batch may reduce it further
                rem2, quots2 = _reduce(rem, b.table(G), key, budget, True)
                rec = rec + b.quot_recipe(quots2, G)
                rem = rem2
            if rem:
                insert(b.add(rem, rec))

    # minimal basis -> reduced basis
    G = sorted(G, key=lambda i: key(b.lead[i]))
    final: list[int] = []
    for pos, i in enumerate(G):
        others = [j for j in G if j != i]
        tail = {e: c for e, c in b.polys[i].items() if e != b.lead[i]}
        rem, quots = _reduce(tail, b.table(others), key, budget, True)
        if quots:
            rem[b.lead[i]] = mpq(1)
            rec = [(Polynomial.const(1, vars), ("g", i))] + b.quot_recipe(quots, others)
            final.append(b.add(rem, rec))
        else:
            final.append(i)
    final.sort(key=lambda i: key(b.lead[i]))
    if not final:
        # zero ideal
        return GroebnerBasis(vars, order, gens, b.polys, b.recipes, [], budget)
    return GroebnerBasis(vars, order, gens, b.polys, b.recipes, final, budget)


# --------------------------------------------------------------------------
# certificates


@dataclass
class MembershipCertificate:
    """``saturating ** exponent * target == sum(combiners[i] * generators[i])``."""

    target: Polynomial
    generators: list[Polynomial]
    combiners: list[Polynomial]
    exponent: int = 0
    saturating: Polynomial | None = None

    def lhs(self) -> Polynomial:
        if self.saturating is None or self.exponent == 0:
            return self.target
        return self.saturating ** self.exponent * self.target

    def residual(self) -> Polynomial:
        acc = self.lhs()
        for c, g in zip(self.combiners, self.generators):
            if c:
                acc = acc - c * g
        return acc

    def check(self) -> bool:
        return len(self.combiners) == len(self.generators) and self.residual().is_zero()

    def to_json(self) -> dict:
        return {
            "vars": list(self.target.vars),
            "target": self.target.format(),
            "generators": [g.format() for g in self.generators],
            "combiners": [c.format() for c in self.combiners],
            "exponent": self.exponent,
            "saturating": None if self.saturating is None else self.saturating.format(),
        }

    @classmethod
    def from_json(cls, obj: dict, field=None) -> "MembershipCertificate":
        from .coeff import QQ
        from .poly import parse_polynomial

        field = field or QQ
        vars = obj["vars"]
        parse = lambda s: parse_polynomial(s, vars, field)
        return cls(
            target=parse(obj["target"]),
            generators=[parse(s) for s in obj["generators"]],
            combiners=[parse(s) for s in obj["combiners"]],
            exponent=int(obj.get("exponent", 0)),
            saturating=None if obj.get("saturating") is None else parse(obj["saturating"]),
        )


def normal_form(p: Polynomial, gb: GroebnerBasis) -> tuple[Polynomial, list[Polynomial]]:
    return gb.normal_form(p)


def membership(p: Polynomial, gens: Sequence[Polynomial], saturate_by: Polynomial | None = None,
               max_n: int = 0, *, order: MonomialOrder = GREVLEX, gb: GroebnerBasis | None = None,
               budget: Budget | None = None) -> MembershipCertificate:
    """Smallest ``N <= max_n`` with ``saturate_by**N * p`` in ``(gens)``, with cofactors."""
    gens = list(gens)
    if gb is None:
        gb = buchberger(gens, order, budget=budget)
    t = p
    top = max_n if saturate_by is not None else 0
    for n in range(top + 1):
        if n:
            t = t * saturate_by
        rem, comb = gb.express(t)
        if rem.is_zero():
            cert = MembershipCertificate(p, gens, comb, n, saturate_by if saturate_by is not None else None)
            assert cert.check(), "membership certificate failed to re-expand"
            return cert
    raise NotMember(f"{p} not in ideal (saturation up to N={top})")


def fresh_name(base: str, taken: Sequence[str]) -> str:
    name = base
    k = 0
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def eliminate(gens: Sequence[Polynomial], eliminate_vars: Sequence[str], *, budget: Budget | None = None,
              keep_vars: Sequence[str] | None = None) -> list[Polynomial]:
    """Generators of the elimination ideal, in the ambient of remaining variables."""
    vars = gens[0].vars
    order = MonomialOrder.elimination(eliminate_vars)
    gb = buchberger(gens, order, budget=budget)
    keep = tuple(keep_vars) if keep_vars is not None else tuple(v for v in vars if v not in eliminate_vars)
    elim_idx = [vars.index(v) for v in eliminate_vars if v in vars]
    out = []
    for g in gb.generators:
        if all(e[i] == 0 for e in g.terms for i in elim_idx):
            out.append(g.to_ambient(keep))
    return out


def saturation(gens: Sequence[Polynomial], s: Polynomial, *, budget: Budget | None = None) -> list[Polynomial]:
    """Generators of ``(gens) : s^inf`` via an auxiliary inverse variable."""
    gens = [g for g in gens]
    vars = gens[0].vars
    t = fresh_name("T_sat", vars)
    ext = vars + (t,)
    lifted = [g.to_ambient(ext) for g in gens]
    T = Polynomial.var(t, ext)
    lifted.append(T * s.to_ambient(ext) - 1)
    out = eliminate(lifted, [t], budget=budget, keep_vars=vars)
    return out or [Polynomial.zero(vars)]


def ideal_equal(a: Sequence[Polynomial], b: Sequence[Polynomial]) -> bool:
    ga = buchberger(list(a))
    gb_ = buchberger(list(b))
    return ga.generators == gb_.generators


def preimage(f, target: Polynomial) -> Polynomial:
    """Element of ``f.source`` mapping to ``target`` under ``f`` (graph-ideal elimination)."""
    gbp, src_names, graph_vars = _graph_basis(f)
    t = target.to_ambient(graph_vars)
    rem = gbp.reduce(t)
    inv = {g: s for s, g in src_names.items()}
    allowed = set(inv)
    if not rem.used_vars() <= allowed:
        raise NoPreimage(f"{target} is not in the image of the map")
    rem = rem.to_ambient(tuple(src_names[s] for s in f.source.vars))
    out = rem.rename(inv)
    return f.source.normal(out)


def _graph_basis(f):
    cached = getattr(f, "_graph_cache", None)
    if cached is not None:
        return cached
    tgt = f.target
    taken = list(tgt.vars)
    src_names: dict[str, str] = {}
    graph_gens_extra = []
    used_targets: set[str] = set()
    for s in f.source.vars:
        img = f.images[s]
        single = None
        if len(img.terms) == 1:
            (e, c), = img.terms.items()
            if c == 1 and sum(e) == 1:
                single = tgt.vars[e.index(1)]
        if single is not None and single not in used_targets:
            src_names[s] = single
            used_targets.add(single)
        else:
            name = fresh_name(f"a_{s}".replace("'", "p"), taken)
            taken.append(name)
            src_names[s] = name
            graph_gens_extra.append((name, img))
    graph_vars = tuple(tgt.vars) + tuple(n for n, _ in graph_gens_extra)
    gens = [r.to_ambient(graph_vars) for r in tgt.relations]
    for name, img in graph_gens_extra:
        gens.append(Polynomial.var(name, graph_vars) - img.to_ambient(graph_vars))
    keep = set(src_names.values())
    elim = [v for v in tgt.vars if v not in keep]
    order = MonomialOrder("block", blocks=[elim, sorted(keep, key=graph_vars.index)])
    if not gens:
        gens = [Polynomial.zero(graph_vars)]
    gbp = buchberger(gens, order)
    result = (gbp, src_names, graph_vars)
    try:
        f._graph_cache = result
    except AttributeError:
        pass
    return result
