"""Memoized scheme scoring for the search loop.

``DeltaScorer`` computes the same operation count as ``cse.simplify`` but
skips materializing the intermediate tree and Dag objects: Horner recursion
interns nodes straight into a rewriter arena, pair elimination runs in
place, and only the counts survive. Results are cached per effective
extraction order, so re-scoring a revisited path is a dictionary lookup.

Node ids are assigned in exactly the order ``build_dag`` would assign them
when walking the equivalent tree; the pair-elimination tie-breaking is id
based, so this keeps the scorer bit-identical to the public pipeline
(enforced by randomized equivalence tests).
"""

from __future__ import annotations

from .cse import K_CONST, K_POW, K_PROD, K_SUM, K_VAR, _Rewriter
from .expr import Expression, OpCount, variables
from .horner import Direction, Scheme, effective_order


class DeltaScorer:
    """Scores full or partial extraction orders of one fixed expression."""

    def __init__(self, e: Expression):
        self.expr = e
        self.var_ids = variables(e)
        self._pos = {a: i for i, a in enumerate(self.var_ids)}
        n = len(self.var_ids)
        packed = []
        for t in e.terms:
            dense = [0] * n
            for a, exp in t.exponents:
                dense[self._pos[a]] = exp
            packed.append((t.coeff, tuple(dense)))
        self._terms = packed
        self._nvars = n
        # Order keys pack 4 bits per position when possible.
        self._int_keys = 0 < n <= 16
        self.cache: dict = {}

    def delta(self, order: tuple[int, ...]) -> tuple[int, int]:
        """(mul, add) after Horner with this effective order plus elimination.

        ``order`` is a tuple of atom ids, already direction-adjusted.
        """
        pos_order = tuple(self._pos[a] for a in order)
        if self._int_keys:
            key = 1
            for v in pos_order:
                key = (key << 4) | v
        else:
            key = pos_order
        hit = self.cache.get(key)
        if hit is None:
            hit = self._compute(pos_order)
            self.cache[key] = hit
        return hit

    def delta_scheme(self, s: Scheme) -> OpCount:
        mul, add = self.delta(effective_order(s))
        return OpCount(mul=mul, add=add)

    def _compute(self, order: tuple[int, ...]) -> tuple[int, int]:
        terms = self._terms
        if not terms:
            return (0, 0)
        kinds: list[int] = []
        args: list = []
        index: dict = {}

        def intern(key, kind, arg) -> int:
            i = index.get(key)
            if i is None:
                i = len(kinds)
                kinds.append(kind)
                args.append(arg)
                index[key] = i
            return i

        def const_node(c: int) -> int:
            return intern((K_CONST, c), K_CONST, (c,))

        def factor_node(v: int, e: int) -> int:
            b = intern((K_VAR, v), K_VAR, (v,))
            if e == 1:
                return b
            return intern((K_POW, b, e), K_POW, (b, e))

        def finalize(val) -> int:
            if isinstance(val, int):
                return val
            tag, parts = val
            kind = K_PROD if tag == "p" else K_SUM
            ch = sorted(parts)
            return intern((kind, tuple(ch)), kind, ch)

        def monomial(t):
            c, exps = t
            parts = []
            if c != 1:
                parts.append(const_node(c))
            nonconst = False
            for v, e in enumerate(exps):
                if e:
                    parts.append(factor_node(v, e))
                    nonconst = True
            if not nonconst:
                return const_node(c)
            if len(parts) == 1:
                return parts[0]
            return ("p", parts)

        def build(terms, order):
            if len(terms) == 1:
                return monomial(terms[0])
            for v in order:
                cnt = 0
                for t in terms:
                    if t[1][v]:
                        cnt += 1
                        if cnt == 2:
                            break
                if cnt < 2:
                    continue
                with_v = []
                rest = []
                for t in terms:
                    (with_v if t[1][v] else rest).append(t)
                # Interning order mirrors the tree walk: the variable-free
                # addend first, then the extracted factor, then the quotient.
                rest_val = build(rest, order) if rest else None
                e = min(t[1][v] for t in with_v)
                fid = factor_node(v, e)
                quotient = []
                for c, exps in with_v:
                    quotient.append((c, exps[:v] + (exps[v] - e,) + exps[v + 1 :]))
                inner = build(quotient, order)
                if type(inner) is tuple and inner[0] == "p":
                    parts = [fid] + inner[1]
                else:
                    parts = [fid, finalize(inner)]
                if rest_val is None:
                    return ("p", parts)
                if type(rest_val) is tuple and rest_val[0] == "s":
                    addends = rest_val[1]
                else:
                    addends = [finalize(rest_val)]
                addends.append(finalize(("p", parts)))
                return ("s", addends)
            return ("s", [finalize(monomial(t)) for t in terms])

        root = finalize(build(terms, order))
        rw = _Rewriter(kinds, args, [root])
        rw.run()
        return rw.live_op_count()


def score_scheme(e: Expression, order: tuple[int, ...], direction: Direction) -> OpCount:
    """One-shot convenience wrapper around a throwaway scorer."""
    return DeltaScorer(e).delta_scheme(Scheme(tuple(order), direction))
