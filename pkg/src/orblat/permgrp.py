"""Permutation groups on small integer domains: stabilizer chains (deterministic
Schreier-Sims for small degrees, randomized with a known target order for large
ones), membership, element enumeration, and structural invariants.

Permutations are numpy int64 arrays; p maps i to p[i], and compose(a, b) acts
b first.
"""

import random
from math import gcd

import numpy as np
from sympy import factorint


def perm(seq):
    a = np.asarray(seq, dtype=np.int64)
    if sorted(a.tolist()) != list(range(len(a))):
        raise ValueError("not a permutation")
    return a


def identity(degree):
    return np.arange(degree, dtype=np.int64)


def compose(a, b):
    """a after b: (a*b)[i] = a[b[i]]."""
    return a[b]


def inverse(p):
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p), dtype=np.int64)
    return inv


def is_identity(p):
    return bool(np.all(p == np.arange(len(p), dtype=np.int64)))


def first_moved(p):
    moved = np.nonzero(p != np.arange(len(p), dtype=np.int64))[0]
    return int(moved[0]) if len(moved) else None


def perm_order(p):
    """Order of a permutation (repeated composition; degrees here are small)."""
    ident = np.arange(len(p), dtype=np.int64)
    q = p
    o = 1
    while not np.array_equal(q, ident):
        q = q[p]
        o += 1
    return o


def orbit_of(gens, point):
    """Orbit of a point under generator arrays, as a sorted list."""
    seen = {point}
    queue = [point]
    while queue:
        x = queue.pop()
        for g in gens:
            y = int(g[x])
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return sorted(seen)


def orbits(gens, degree):
    """All orbits on [0, degree), sorted by least element."""
    left = set(range(degree))
    out = []
    while left:
        x = min(left)
        orb = orbit_of(gens, x)
        out.append(orb)
        left -= set(orb)
    return out


class _Level:
    __slots__ = ("base", "gens", "orbit", "store_perms")

    def __init__(self, base, store_perms):
        self.base = base
        self.gens = []
        self.orbit = {}
        self.store_perms = store_perms


class StabChain:
    """Stabilizer chain; transversals stored as perms or as Schreier vectors."""

    def __init__(self, degree, store_perms=True):
        self.degree = degree
        self.levels = []
        self.store_perms = store_perms

    def acting_gens(self, i):
        out = []
        for lvl in self.levels[i:]:
            out.extend(lvl.gens)
        return out

    def recompute_orbit(self, i):
        lvl = self.levels[i]
        gens = self.acting_gens(i)
        if lvl.store_perms:
            lvl.orbit = {lvl.base: identity(self.degree)}
            queue = [lvl.base]
            while queue:
                x = queue.pop(0)
                ux = lvl.orbit[x]
                for g in gens:
                    y = int(g[x])
                    if y not in lvl.orbit:
                        lvl.orbit[y] = compose(g, ux)
                        queue.append(y)
        else:
            lvl.orbit = {lvl.base: None}
            queue = [lvl.base]
            while queue:
                x = queue.pop(0)
                for gi, g in enumerate(gens):
                    y = int(g[x])
                    if y not in lvl.orbit:
                        lvl.orbit[y] = (x, gi)
                        queue.append(y)

    def transversal(self, i, pt):
        """Coset representative u with u[base_i] = pt."""
        lvl = self.levels[i]
        if lvl.store_perms:
            return lvl.orbit[pt]
        gens = self.acting_gens(i)
        factors = []
        cur = pt
        while cur != lvl.base:
            parent, gi = lvl.orbit[cur]
            factors.append(gens[gi])
            cur = parent
        u = identity(self.degree)
        for g in reversed(factors):
            u = compose(g, u)  # accumulated: later factors applied after earlier
        return u

    def strip(self, g, start=0):
        """Sift g through the chain; returns (residue, sticking level)."""
        cur = g
        for i in range(start, len(self.levels)):
            pt = int(cur[self.levels[i].base])
            if pt == self.levels[i].base:
                continue
            if pt not in self.levels[i].orbit:
                return cur, i
            u = self.transversal(i, pt)
            cur = compose(inverse(u), cur)
        return cur, len(self.levels)

    def order(self):
        out = 1
        for lvl in self.levels:
            out *= len(lvl.orbit)
        return out

    def add_base_point(self, pt):
        self.levels.append(_Level(pt, self.store_perms))
        self.recompute_orbit(len(self.levels) - 1)

    def insert_generator(self, g, level):
        """Register a strong generator fixing all bases before `level`."""
        if level == len(self.levels):
            self.add_base_point(first_moved(g))
        self.levels[level].gens.append(g)
        # the new generator acts at every level up to `level`
        for i in range(level, -1, -1):
            self.recompute_orbit(i)

    def elements(self):
        """Iterate over all group elements as products u_0 . u_1 . ... of
        transversal representatives (u_0 outermost)."""

        def rec(i, acc):
            if i == len(self.levels):
                yield acc
                return
            for pt in self.levels[i].orbit:
                u = self.transversal(i, pt)
                yield from rec(i + 1, compose(acc, u))

        yield from rec(0, identity(self.degree))


def deterministic_chain(gens, degree):
    """Complete stabilizer chain by the classical bottom-up verification loop."""
    chain = StabChain(degree, store_perms=True)
    gens = [g for g in gens if not is_identity(g)]
    for g in gens:
        r, lvl = chain.strip(g)
        if not is_identity(r):
            chain.insert_generator(r, lvl)
    i = len(chain.levels) - 1
    while i >= 0:
        chain.recompute_orbit(i)
        lvl = chain.levels[i]
        acting = chain.acting_gens(i)
        found = None
        for pt in list(lvl.orbit):
            u = chain.transversal(i, pt)
            for s in acting:
                target = int(s[pt])
                srg = compose(inverse(chain.transversal(i, target)), compose(s, u))
                if is_identity(srg):
                    continue
                r, j = chain.strip(srg, i + 1)
                if not is_identity(r):
                    found = (r, j)
                    break
            if found:
                break
        if found:
            r, j = found
            chain.insert_generator(r, j)
            i = j
        else:
            i -= 1
    for g in gens:
        r, _ = chain.strip(g)
        if not is_identity(r):
            raise ValueError("generator does not sift through the completed chain")
    return chain


class _Rattle:
    """Product-replacement random element stream, deterministic by seed."""

    def __init__(self, gens, degree, seed):
        self.rng = random.Random(seed)
        base = [g.copy() for g in gens] if gens else [identity(degree)]
        k = 0
        while len(base) < 10:
            base.append(base[k].copy())
            k = (k + 1) % len(base)
        self.slots = base
        self.acc = identity(degree)
        for _ in range(60):
            self.step()

    def step(self):
        rng = self.rng
        i = rng.randrange(len(self.slots))
        j = rng.randrange(len(self.slots) - 1)
        if j >= i:
            j += 1
        other = self.slots[j] if rng.random() < 0.5 else inverse(self.slots[j])
        if rng.random() < 0.5:
            self.slots[i] = compose(self.slots[i], other)
        else:
            self.slots[i] = compose(other, self.slots[i])
        self.acc = compose(self.acc, self.slots[i])
        return self.acc


def randomized_chain(gens, degree, target, seed=1, max_quiet=512, confirm=128):
    """Stabilizer chain built from random elements until the known target
    order is reached; raises if the target is exceeded or never attained.

    A partial chain's order is always a lower bound for the group order, and
    hitting the true order proves completeness; the extra `confirm` random
    sifts guard against a *wrong* target that matches a transient partial
    product.
    """
    chain = StabChain(degree, store_perms=False)
    for g in gens:
        r, lvl = chain.strip(g)
        if not is_identity(r):
            chain.insert_generator(r, lvl)
            if chain.order() > target:
                raise ValueError(
                    "chain order %d exceeds target %d" % (chain.order(), target)
                )
    stream = _Rattle(gens, degree, seed)
    quiet = 0
    while chain.order() < target and quiet < max_quiet:
        g = stream.step()
        r, lvl = chain.strip(g)
        if is_identity(r):
            quiet += 1
            continue
        quiet = 0
        chain.insert_generator(r, lvl)
        if chain.order() > target:
            raise ValueError("chain order %d exceeds target %d" % (chain.order(), target))
    if chain.order() != target:
        raise ValueError(
            "failed to reach target order %d (stalled at %d)" % (target, chain.order())
        )
    for g in gens:
        r, _ = chain.strip(g)
        if not is_identity(r):
            raise ValueError("chain order %d exceeds target %d" % (chain.order() + 1, target))
    for _ in range(confirm):
        r, _ = chain.strip(stream.step())
        if not is_identity(r):
            raise ValueError("target order %d is too small for the group" % target)
    return chain


class PermGroup:
    """Finite permutation group with a lazily built stabilizer chain."""

    DETERMINISTIC_DEGREE_CAP = 5000

    def __init__(self, gens, degree, known_order=None, seed=1):
        self.degree = degree
        self.gens = []
        seen = set()
        for g in gens:
            a = perm(g) if not isinstance(g, np.ndarray) else g.astype(np.int64)
            if len(a) != degree:
                raise ValueError("generator degree mismatch")
            key = a.tobytes()
            if key not in seen and not is_identity(a):
                seen.add(key)
                self.gens.append(a)
        self.known_order = known_order
        self.seed = seed
        self._chain = None

    def chain(self):
        if self._chain is None:
            if self.known_order is not None:
                self._chain = randomized_chain(
                    self.gens, self.degree, self.known_order, seed=self.seed
                )
            else:
                if self.degree > self.DETERMINISTIC_DEGREE_CAP:
                    raise ValueError(
                        "degree %d too large for deterministic chain; pass known_order"
                        % self.degree
                    )
                self._chain = deterministic_chain(self.gens, self.degree)
        return self._chain

    def order(self):
        return self.chain().order()

    def contains(self, p):
        if not isinstance(p, np.ndarray):
            p = perm(p)
        r, _ = self.chain().strip(p)
        return is_identity(r)

    def elements(self, cap=500000):
        if self.order() > cap:
            raise ValueError("group too large to enumerate (%d)" % self.order())
        return self.chain().elements()

    def random_word(self, seed, length):
        """Deterministic product of `length` random generators/inverses."""
        rng = random.Random(seed)
        out = identity(self.degree)
        if not self.gens:
            return out
        for _ in range(length):
            g = rng.choice(self.gens)
            if rng.random() < 0.5:
                g = inverse(g)
            out = compose(out, g)
        return out

    def is_abelian(self):
        return all(
            np.array_equal(compose(a, b), compose(b, a))
            for i, a in enumerate(self.gens)
            for b in self.gens[i + 1 :]
        )


def normal_closure_order(group, seed_gens):
    """Order of the normal closure of seed_gens in group (degree-capped)."""
    closure = [g for g in seed_gens if not is_identity(g)]
    if not closure:
        return 1, PermGroup([], group.degree)
    while True:
        sub = PermGroup(closure, group.degree)
        new = None
        for g in group.gens:
            ginv = inverse(g)
            for k in list(closure):
                conj = compose(ginv, compose(k, g))
                if not sub.contains(conj):
                    new = conj
                    break
            if new is not None:
                break
        if new is None:
            return sub.order(), sub
        closure.append(new)


def _abelian_invariants_from_counts(m, count_dividing):
    """Divisor chain of an abelian group of order m from the counting function
    d -> #{elements of order dividing d}.
    """
    parts_by_prime = {}
    for p, e in factorint(m).items():
        ranks = []
        prev = 0
        for k in range(1, e + 1):
            c = count_dividing(p**k)
            s = 0
            while p**s < c:
                s += 1
            if p**s != c:
                raise ValueError("inconsistent order counts")
            ranks.append(s - prev)
            prev = s
            if s == e:
                break
        # ranks[k-1] = #{cyclic factors with exponent >= k}; conjugate partition
        lam = []
        for k, r in enumerate(ranks, start=1):
            while len(lam) < r:
                lam.append(0)
            for idx in range(r):
                lam[idx] = k
        parts_by_prime[p] = sorted(lam, reverse=True)
    width = max((len(v) for v in parts_by_prime.values()), default=0)
    chain = []
    for idx in range(width):
        d = 1
        for p, lam in parts_by_prime.items():
            if idx < len(lam):
                d *= p ** lam[idx]
        chain.append(d)
    return sorted(chain)  # ascending divisor chain d_1 | d_2 | ...


def group_invariants(group, enum_cap=200000):
    """Structural invariants: order (factored), exponent, center order,
    abelianization invariants, derived subgroup order.  Beyond enum_cap only
    the order data is computed and the result is flagged partial.
    """
    order = group.order()
    out = {
        "order": order,
        "order_factored": {str(p): e for p, e in sorted(factorint(order).items())},
        "partial": False,
    }
    if order > enum_cap:
        out["partial"] = True
        return out
    exponent = 1
    center = 0
    for e in group.elements(cap=enum_cap):
        o = perm_order(e)
        exponent = exponent * o // gcd(exponent, o)
        if all(np.array_equal(compose(e, g), compose(g, e)) for g in group.gens):
            center += 1
    commutators = []
    for i, a in enumerate(group.gens):
        for b in group.gens[i + 1 :]:
            commutators.append(
                compose(inverse(a), compose(inverse(b), compose(a, b)))
            )
    derived_order, derived = normal_closure_order(group, commutators)
    ab_order = order // derived_order

    def count_dividing(d):
        cnt = 0
        for e in group.elements(cap=enum_cap):
            if derived.contains(_perm_power(e, d)):
                cnt += 1
        if cnt % derived_order:
            raise ValueError("coset counting inconsistency")
        return cnt // derived_order

    out.update(
        {
            "exponent": exponent,
            "center_order": center,
            "derived_order": derived_order,
            "abelianization": _abelian_invariants_from_counts(ab_order, count_dividing),
            "abelian": group.is_abelian(),
        }
    )
    return out


def _perm_power(p, k):
    out = identity(len(p))
    base = p
    while k:
        if k & 1:
            out = compose(out, base)
        base = compose(base, base)
        k >>= 1
    return out
