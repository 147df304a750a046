"""Brute-force membership oracle: search combiners of bounded degree by linear algebra.

Independent of the Groebner engine; uses sympy's exact domain matrices.
"""

import random
from itertools import product

from gmpy2 import mpq

from sympy import QQ as SQQ
from sympy.polys.matrices import DomainMatrix

from cancellab.poly import Polynomial


def _monomials(nvars, degree):
    return [e for e in product(range(degree + 1), repeat=nvars) if sum(e) <= degree]


def bounded_member(p: dict, gens: list[dict], nvars: int, degree: int) -> bool:
    """Is ``p = sum c_i g_i`` solvable with every ``deg c_i <= degree``?"""
    mons = _monomials(nvars, degree)
    columns = []
    for g in gens:
        for m in mons:
            columns.append({tuple(a + b for a, b in zip(e, m)): c for e, c in g.items()})
    rows = sorted({e for col in columns for e in col} | set(p))
    index = {e: i for i, e in enumerate(rows)}
    n = len(columns)
    mat = [[SQQ(0)] * (n + 1) for _ in rows]
    for j, col in enumerate(columns):
        for e, c in col.items():
            mat[index[e]][j] = SQQ(int(c.numerator), int(c.denominator))
    for e, c in p.items():
        mat[index[e]][n] = SQQ(int(c.numerator), int(c.denominator))
    rref, pivots = DomainMatrix(mat, (len(rows), n + 1), SQQ).rref()
    return n not in pivots


def _random_poly(rng, vars, max_deg, max_terms):
    terms = {}
    n = len(vars)
    for _ in range(rng.randint(1, max_terms)):
        e = [0] * n
        for _ in range(rng.randint(0, max_deg)):
            e[rng.randrange(n)] += 1
        terms[tuple(e)] = mpq(rng.randint(-3, 3), rng.randint(1, 2))
    return Polynomial(vars, terms)


def random_instances(count=200, seed=20240611):
    """Ideals in <= 3 variables, <= 3 generators of degree <= 3; about half the targets are members."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, 3)
        vars = ("x", "y", "z")[:n]
        gens = [_random_poly(rng, vars, 3, 3) for _ in range(rng.randint(1, 3))]
        gens = [g for g in gens if not g.is_zero()]
        if not gens:
            continue
        mults = [_random_poly(rng, vars, 1, 2) for _ in gens]
        p = Polynomial.zero(vars)
        for m, g in zip(mults, gens):
            p = p + m * g
        if rng.random() < 0.5:
            p = p + _random_poly(rng, vars, 2, 2)
        out.append((vars, gens, p))
    return out
