"""Automorphism groups of positive-definite form families by backtracking over
short-vector images, with exact orders certified by the level-orbit product.

This computes O(L), centralizers C_O(L)(g) (as the automorphism group of the
family {G g^k}), normalizers N_O(L)(<g>) (one family-isometry search per
exponent), induced discriminant-group images, and structural invariants.
"""

import json
import os
from fractions import Fraction
from itertools import product

import numpy as np

from .exactmat import IntMatrix, RatMatrix, rat_inverse
from .lattice import Isometry, discriminant_action
from .permgrp import PermGroup, group_invariants as perm_invariants, orbit_of
from .shortvec import lll_gram, short_vectors_gram


class FormFamily:
    """Ordered list of integral forms on a common module; first one positive
    definite (it drives the short-vector domain)."""

    def __init__(self, forms):
        forms = [f if isinstance(f, IntMatrix) else IntMatrix(f) for f in forms]
        if not forms:
            raise ValueError("family must contain at least one form")
        n = forms[0].rows
        for f in forms:
            if f.rows != n or f.cols != n:
                raise ValueError("family forms must share dimensions")
        # positive definiteness of the leading form
        for k in range(1, n + 1):
            if IntMatrix([row[:k] for row in forms[0].entries[:k]]).det() <= 0:
                raise ValueError("first form must be positive definite")
        self.forms = forms
        self.rank = n

    @staticmethod
    def centralizer_family(lat, g):
        """{G g^k : k} — commuting with g is equivalent to preserving G and
        G g, and the higher powers sharpen the backtrack fingerprints."""
        m = g.order()
        forms = []
        acc = IntMatrix.identity(lat.rank)
        for _ in range(m):
            forms.append(lat.gram @ acc)
            acc = acc @ g.matrix
        return FormFamily(forms)

    def preserved_by(self, mat):
        return all(mat.transpose() @ f @ mat == f for f in self.forms)


class _Domain:
    """Signed short-vector domain with per-form norm profiles and buckets."""

    def __init__(self, family, bound, threads=1):
        self.family = family
        self.bound = bound
        sv = short_vectors_gram(family.forms[0], bound, threads=threads)
        self.short_vectors = sv
        rows = []
        for v, _ in sv:
            rows.append(v)
            rows.append(tuple(-x for x in v))
        rows.sort()
        self.rows = (
            np.array(rows, dtype=np.int64)
            if rows
            else np.zeros((0, family.rank), dtype=np.int64)
        )
        self.size = len(rows)
        self.index = {r.tobytes(): i for i, r in enumerate(self.rows)}
        self.forms_np = [np.array(f.entries, dtype=np.int64) for f in family.forms]
        profiles = np.stack(
            [np.einsum("ij,jk,ik->i", self.rows, f, self.rows) for f in self.forms_np],
            axis=1,
        )
        self.profiles = profiles
        self.buckets = {}
        for i in range(self.size):
            self.buckets.setdefault(profiles[i].tobytes(), []).append(i)
        self.buckets = {k: np.array(v, dtype=np.int64) for k, v in self.buckets.items()}

    def spans(self):
        """Exact full-rank test of the row span."""
        n = self.rows.shape[1]
        return _select_independent(self.rows, n) is not None

    def perm_of(self, mat):
        """Permutation of domain indices induced by x -> mat @ x."""
        m = np.array(mat.entries, dtype=np.int64)
        imgs = self.rows @ m.T
        out = np.empty(self.size, dtype=np.int64)
        for i in range(self.size):
            j = self.index.get(imgs[i].tobytes())
            if j is None:
                raise ValueError("matrix does not permute the domain")
            out[i] = j
        return out


def _select_independent(rows, n, preferred=None):
    """Indices of n exactly independent rows (greedy, float-assisted)."""
    order = preferred if preferred is not None else range(len(rows))
    basis = []
    chosen = []
    for i in order:
        cand = [Fraction(int(x)) for x in rows[i]]
        for b in basis:
            piv, vec = b
            f = cand[piv]
            if f:
                cand = [c - f * v for c, v in zip(cand, vec)]
        piv = next((k for k, c in enumerate(cand) if c), None)
        if piv is None:
            continue
        inv = cand[piv]
        basis.append((piv, [c / inv for c in cand]))
        chosen.append(i)
        if len(chosen) == n:
            return chosen
    return None


class GroupHandle:
    """Sealed result of a form-family automorphism computation."""

    def __init__(self, family, domain, generators, order, orbit_sizes, base_ids):
        self.family = family
        self.domain = domain
        self.generators = generators  # list of IntMatrix
        self.order = order
        self.orbit_sizes = orbit_sizes
        self.base_ids = base_ids
        self._perm_group = None

    @property
    def action_domain(self):
        return self.domain.short_vectors

    def perms(self):
        return [self.domain.perm_of(g) for g in self.generators]

    def perm_group(self):
        if self._perm_group is None:
            self._perm_group = PermGroup(
                self.perms(), self.domain.size, known_order=self.order
            )
        return self._perm_group

    def contains(self, mat):
        if not self.family.preserved_by(mat):
            return False
        return self.perm_group().contains(self.domain.perm_of(mat))

    def quotient_order_by(self, mat, m):
        """|H| / m for a cyclic subgroup generated by mat (membership checked)."""
        if not self.contains(mat):
            raise ValueError("element not in the group")
        if self.order % m:
            raise ValueError("cyclic order does not divide the group order")
        return self.order // m

    def random_word(self, seed, length):
        """Deterministic product of random generators and inverses."""
        import random as _random

        rng = _random.Random(seed)
        out = IntMatrix.identity(self.family.rank)
        if not self.generators:
            return out
        for _ in range(length):
            g = rng.choice(self.generators)
            if rng.random() < 0.5:
                g = rat_inverse(g).to_int_matrix()
            out = out @ g
        return out

    def invariants(self, enum_cap=200000):
        return perm_invariants(self.perm_group(), enum_cap=enum_cap)

    def to_json(self):
        return {
            "order": self.order,
            "orbit_sizes": self.orbit_sizes,
            "bound": self.domain.bound,
            "base_ids": [int(i) for i in self.base_ids],
            "generators": [g.to_json() for g in self.generators],
        }


class _Search:
    """Backtracking engine: images of a fixed base under profile filtering.

    dst profiles/buckets come from the domain; src targets come from the
    source family (equal to the domain family for automorphisms).
    """

    def __init__(self, domain, src_forms):
        self.dom = domain
        self.n = domain.rows.shape[1]
        self.src_forms = list(src_forms)
        self.src_np = [np.array(f.entries, dtype=np.int64) for f in src_forms]
        if len(self.src_np) != len(domain.forms_np):
            raise ValueError("family size mismatch")

    def set_base(self, base_ids):
        self.base_ids = list(base_ids)
        rows = self.dom.rows
        self.base_rows = [rows[i] for i in self.base_ids]
        bmat = IntMatrix([[int(v[i]) for v in self.base_rows] for i in range(self.n)])
        self.base_inv = rat_inverse(bmat)
        # src profile of each base vector, and pairwise src targets
        self.base_profiles = [
            tuple(int(v @ f @ v) for f in self.src_np) for v in self.base_rows
        ]
        self.targets = [
            [
                [(int(bt @ f @ bi), int(bi @ f @ bt)) for f in self.src_np]
                for bi in self.base_rows
            ]
            for bt in self.base_rows
        ]

    def candidates(self, t, assigned, start=None, skip=0):
        """Domain indices that can be the image of base vector t, given the
        already assigned images of base vectors 0..len(assigned)-1.

        start/skip resume from a pre-filtered candidate set: start must be
        the result of filtering the bucket against assigned[:skip].
        """
        if start is None:
            key = np.array(self.base_profiles[t], dtype=np.int64).tobytes()
            cand = self.dom.buckets.get(key)
            if cand is None:
                return np.empty(0, dtype=np.int64)
        else:
            cand = start
        rows = self.dom.rows
        for i in range(skip, len(assigned)):
            wi = rows[assigned[i]]
            for k, f in enumerate(self.dom.forms_np):
                ab, ba = self.targets[t][i][k]
                cand = cand[rows[cand] @ (f @ wi) == ab]
                if len(cand) == 0:
                    return cand
                cand = cand[rows[cand] @ (f.T @ wi) == ba]
                if len(cand) == 0:
                    return cand
        return cand

    def prefix_sets(self, prefix):
        """Per-level candidate sets already filtered against a fixed prefix."""
        return {
            t: self.candidates(t, prefix) for t in range(len(prefix), self.n)
        }

    def complete(self, assigned):
        """Build the matrix sending base -> assigned images; None if invalid."""
        rows = self.dom.rows
        w = RatMatrix([[int(rows[a][i]) for a in assigned] for i in range(self.n)])
        h = w @ self.base_inv
        if not h.is_integral():
            return None
        h = h.to_int_matrix()
        ht = h.transpose()
        for f_src, f_dst in zip(self.src_forms, self.dom.family.forms):
            if ht @ f_dst @ h != f_src:
                return None
        return h

    def find(self, assigned, t, sets=None, skip=0):
        """Depth-first completion from level t; returns a matrix or None."""
        if t == self.n:
            return self.complete(assigned)
        start = sets[t] if sets is not None else None
        for w in self.candidates(t, assigned, start=start, skip=skip):
            res = self.find(assigned + [int(w)], t + 1, sets=sets, skip=skip)
            if res is not None:
                return res
        return None


def _auto_bound(gram):
    reduced, _ = lll_gram(gram)
    return max(reduced[i, i] for i in range(reduced.rows))


def automorphism_group(family, vector_bound=None, threads=1):
    """Full automorphism group of the form family, exact order.

    vector_bound=None picks the LLL max-diagonal bound and doubles it on
    spanning failure; an explicit bound that fails to span raises with a hint.
    """
    if not isinstance(family, FormFamily):
        family = FormFamily(family)
    auto = vector_bound is None
    bound = _auto_bound(family.forms[0]) if auto else vector_bound
    attempts = 3 if auto else 1
    domain = None
    for _ in range(attempts):
        domain = _Domain(family, bound, threads=threads)
        if domain.size and domain.spans():
            break
        if not auto:
            raise ValueError(
                "short vectors up to %d do not span; retry with vector_bound >= %d"
                % (bound, 2 * bound)
            )
        bound *= 2
    else:
        raise ValueError("short vectors up to %d do not span the module" % bound)

    search = _Search(domain, family.forms)
    n = family.rank
    bucket_size = {i: len(domain.buckets[domain.profiles[i].tobytes()]) for i in range(domain.size)}
    preferred = sorted(range(domain.size), key=lambda i: (bucket_size[i], i))
    base_ids = _select_independent(domain.rows, n, preferred=preferred)
    search.set_base(base_ids)

    found = []  # (level, matrix, perm)
    orbit_sizes = [0] * n
    for j in range(n - 1, -1, -1):
        stab_perms = [p for lvl, _, p in found if lvl >= j]
        orbit = set(orbit_of(stab_perms, base_ids[j]) if stab_perms else [base_ids[j]])
        prefix = [int(b) for b in base_ids[:j]]
        sets = search.prefix_sets(prefix)
        for w in sets[j]:
            w = int(w)
            if w in orbit:
                continue
            h = search.find(prefix + [w], j + 1, sets=sets, skip=j)
            if h is None:
                continue
            perm = domain.perm_of(h)
            found.append((j, h, perm))
            stab_perms.append(perm)
            orbit = set(orbit_of(stab_perms, base_ids[j]))
        orbit_sizes[j] = len(orbit)
    order = 1
    for s in orbit_sizes:
        order *= s
    gens = [h for _, h, _ in found]
    return GroupHandle(family, domain, gens, order, orbit_sizes, base_ids)


def _isometry_within_domain(domain, src_forms):
    """Search a prebuilt spanning domain for h with h^T F_dst,k h = F_src,k."""
    search = _Search(domain, src_forms)
    n = domain.family.rank
    bucket_size = {i: len(domain.buckets[domain.profiles[i].tobytes()]) for i in range(domain.size)}
    preferred = sorted(range(domain.size), key=lambda i: (bucket_size[i], i))
    base_ids = _select_independent(domain.rows, n, preferred=preferred)
    search.set_base(base_ids)
    return search.find([], 0, sets=search.prefix_sets([]), skip=0)


def find_family_isometry(dst_family, src_family, vector_bound=None):
    """A matrix h with h^T F_dst,k h = F_src,k for all k, or None (exhaustive).

    Requires the leading forms to coincide (searches within one domain).
    """
    if dst_family.forms[0] != src_family.forms[0]:
        raise ValueError("leading forms must agree")
    bound = vector_bound if vector_bound is not None else _auto_bound(dst_family.forms[0])
    domain = _Domain(dst_family, bound)
    if not domain.spans():
        raise ValueError(
            "short vectors up to %d do not span; retry with vector_bound >= %d"
            % (bound, 2 * bound)
        )
    return _isometry_within_domain(domain, src_family.forms)


def centralizer(lat, g, vector_bound=None, cache_dir=None, threads=1):
    """C_O(L)(g) as a GroupHandle; asserts commutation and that g is inside."""
    family = FormFamily.centralizer_family(lat, g)
    handle = _cached_automorphism_group(
        family,
        vector_bound,
        cache_dir,
        "cent-%s-%s" % (lat.content_hash()[:16], g.content_hash()[:16]),
        threads=threads,
    )
    for h in handle.generators:
        if h @ g.matrix != g.matrix @ h:
            raise ValueError("generator does not commute with g")
    if not handle.contains(g.matrix):
        raise ValueError("g is not in its own centralizer: backtracking bug")
    return handle


def normalizer(lat, g, vector_bound=None, cache_dir=None, threads=1):
    """N_O(L)(<g>) for prime-order g: (GroupHandle, sorted exponent list).

    Built as the centralizer extended by one family isometry per exponent k
    with h^-1 g h = g^k; an exhaustive failure proves the coset empty.  When
    the lattice is rank-one over Z[g] a direct semilinear scan replaces the
    coset searches (much faster emptiness proofs).
    """
    p = g.order()
    cent = centralizer(
        lat, g, vector_bound=vector_bound, cache_dir=cache_dir, threads=threads
    )
    cached = _load_normalizer_cache(lat, g, cent, cache_dir)
    if cached is not None:
        return cached
    if lat.rank == p - 1:
        result = _normalizer_rank_one(lat, g, cent, threads=threads)
        if result is not None:
            return _store_normalizer_cache(lat, g, cent, cache_dir, result)
    gram = lat.gram
    dst = FormFamily([gram, gram @ g.matrix])
    exponents = [1]
    extra = []
    # One shared short-vector domain for all coset searches (the destination
    # family is the same for every exponent; only the source forms change).
    domain = _Domain(dst, cent.domain.bound, threads=threads)
    if not domain.spans():
        raise ValueError("normalizer domain does not span; raise vector_bound")
    for k in range(2, p):
        h = _isometry_within_domain(domain, [gram, gram @ g.power(k).matrix])
        if h is None:
            continue
        hg = rat_inverse(h).to_int_matrix() @ g.matrix @ h
        if hg != g.power(k).matrix:
            raise ValueError("normalizer witness is inconsistent")
        exponents.append(k)
        extra.append(h)
    ks = sorted(exponents)
    for a in ks:
        for b in ks:
            if (a * b) % p not in ks:
                raise ValueError("normalizer exponents do not form a subgroup")
    order = cent.order * len(ks)
    gens = list(cent.generators) + extra
    handle = GroupHandle(cent.family, cent.domain, gens, order, None, cent.base_ids)
    return _store_normalizer_cache(lat, g, cent, cache_dir, (handle, ks))


def _normalizer_rank_one(lat, g, cent, threads=1):
    """Exhaustive normalizer scan when L is rank-one over Z[g].

    With rank(L) = p - 1 and g fixed-point free of prime order p, the
    rational span of L is a one-dimensional Q[g] =~ Q(zeta_p) vector space,
    so any isometry h with h^-1 g h = g^k is determined by the image
    w = h(v0) of a single Q[g]-generator v0 through h(g^j v0) = g^{jk} w.
    Scanning every lattice vector w with |w|^2 = |v0|^2 is therefore an
    exhaustive enumeration of N itself; the total number of verified pairs
    (k, w) is exactly |N|, and the count at k = 1 must reproduce the
    centralizer order.  Returns None when no standard basis vector of the
    reduced lattice generates (caller falls back to the coset search).
    """
    p = g.order()
    n = lat.rank
    reduced, transform = lll_gram(lat.gram)
    t_inv = rat_inverse(transform).to_int_matrix()
    g_red = t_inv @ g.matrix @ transform
    pows = [IntMatrix.identity(n)]
    for _ in range(p - 1):
        pows.append(pows[-1] @ g_red)
    # a generator v0 among the reduced basis vectors, preferring short ones
    v0_index = None
    for i in sorted(range(n), key=lambda t: reduced[t, t]):
        m_cols = IntMatrix([[pows[j][r, i] for j in range(n)] for r in range(n)])
        if m_cols.det() != 0:
            v0_index, m_mat = i, m_cols
            break
    if v0_index is None:
        return None
    m_inv = rat_inverse(m_mat)
    norm0 = reduced[v0_index, v0_index]
    cands = [
        v
        for v, nm in short_vectors_gram(reduced, int(norm0), threads=threads)
        if nm == norm0
    ]
    vecs = np.array(cands, dtype=np.int64)
    gj = [np.array((reduced @ pows[j]).entries, dtype=np.int64) for j in range(p)]
    prof = np.stack(
        [np.einsum("mi,ij,mj->m", vecs, gj[j], vecs) for j in range(p)], axis=1
    )
    target = np.array(
        [(reduced @ pows[j])[v0_index, v0_index] for j in range(p)], dtype=np.int64
    )
    exponents = []
    extra = []
    total = 0
    for e in range(1, p):
        # h(g^j v0) = g^{j k_c} w forces h g h^-1 = g^{k_c}, which realizes
        # the exponent e of the h^-1 g h = g^e convention for k_c = e^-1.
        k_c = pow(e, -1, p)
        cols_idx = (np.arange(p, dtype=np.int64) * k_c) % p
        mask = np.all(prof[:, cols_idx] == target[None, :], axis=1)
        found = None
        count_e = 0
        for w in vecs[np.flatnonzero(mask)]:
            w_cols = [w.tolist()]
            for j in range(1, n):
                w_cols.append(
                    (pows[(j * k_c) % p] @ IntMatrix.column([int(x) for x in w])).col(0)
                )
            h_rat = IntMatrix(list(zip(*w_cols))) @ m_inv
            if not h_rat.is_integral():
                continue
            h_red = h_rat.to_int_matrix()
            if h_red.transpose() @ reduced @ h_red != reduced:
                continue
            if h_red @ g_red != pows[k_c] @ h_red:
                continue
            count_e += 2  # w and -w give h and -h
            if found is None:
                found = h_red
        if found is None:
            continue
        if count_e != cent.order:
            raise ValueError(
                "coset at exponent %d has %d elements, expected |C| = %d"
                % (e, count_e, cent.order)
            )
        exponents.append(e)
        total += count_e
        if e != 1:
            h = transform @ found @ t_inv
            hg = rat_inverse(h).to_int_matrix() @ g.matrix @ h
            if hg != g.power(e).matrix:
                raise ValueError("rank-one normalizer witness is inconsistent")
            extra.append(h)
    ks = sorted(exponents)
    if 1 not in ks:
        raise ValueError("identity coset missing from rank-one scan")
    for a in ks:
        for b in ks:
            if (a * b) % p not in ks:
                raise ValueError("normalizer exponents do not form a subgroup")
    if total != cent.order * len(ks):
        raise ValueError(
            "rank-one scan count %d disagrees with |C| * #cosets = %d"
            % (total, cent.order * len(ks))
        )
    gens = list(cent.generators) + extra
    handle = GroupHandle(cent.family, cent.domain, gens, total, None, cent.base_ids)
    return handle, ks


def _normalizer_cache_path(lat, g, cache_dir):
    key = "norm-%s-%s" % (lat.content_hash()[:16], g.content_hash()[:16])
    return os.path.join(cache_dir, key + ".json")


def _load_normalizer_cache(lat, g, cent, cache_dir):
    """Rebuild a cached normalizer, re-verifying every generator and the
    exponent bookkeeping (the emptiness of absent cosets is trusted)."""
    if cache_dir is None:
        return None
    path = _normalizer_cache_path(lat, g, cache_dir)
    if not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            data = json.load(fh)
        extra = [IntMatrix.from_json(m) for m in data["extra"]]
        ks = [int(k) for k in data["ks"]]
        p = g.order()
        seen = {1}
        for h in extra:
            if h.transpose() @ lat.gram @ h != lat.gram:
                raise ValueError("cached normalizer generator is not an isometry")
            hg = rat_inverse(h).to_int_matrix() @ g.matrix @ h
            for k in range(2, p):
                if hg == g.power(k).matrix:
                    seen.add(k)
                    break
            else:
                raise ValueError("cached generator does not normalize <g>")
        if sorted(seen) != ks:
            raise ValueError("cached exponent list mismatch")
        if int(data["order"]) != cent.order * len(ks):
            raise ValueError("cached normalizer order mismatch")
    except (ValueError, KeyError) as exc:
        os.unlink(path)
        raise ValueError("normalizer cache rejected: %s" % exc) from exc
    gens = list(cent.generators) + extra
    handle = GroupHandle(
        cent.family, cent.domain, gens, int(data["order"]), None, cent.base_ids
    )
    return handle, ks


def _store_normalizer_cache(lat, g, cent, cache_dir, result):
    if cache_dir is None:
        return result
    handle, ks = result
    n_cent = len(cent.generators)
    data = {
        "order": handle.order,
        "ks": ks,
        "extra": [m.to_json() for m in handle.generators[n_cent:]],
    }
    os.makedirs(cache_dir, exist_ok=True)
    path = _normalizer_cache_path(lat, g, cache_dir)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(data, fh)
    os.replace(tmp, path)
    return result


class DiscriminantImage:
    """Image of a group on D(L): matrices, permutation action, elements."""

    def __init__(self, disc, matrices):
        self.disc = disc
        self.matrices = matrices
        self.elements = list(product(*(range(d) for d in disc.orders)))
        self.index = {e: i for i, e in enumerate(self.elements)}
        k = len(disc.orders)
        perms = []
        for m in matrices:
            imgs = []
            for e in self.elements:
                imgs.append(
                    self.index[
                        tuple(
                            sum(m[i, j] * e[j] for j in range(k)) % disc.orders[i]
                            for i in range(k)
                        )
                    ]
                )
            perms.append(np.array(imgs, dtype=np.int64))
        self.perm_group = PermGroup(perms, len(self.elements))

    def order(self):
        return self.perm_group.order()


def kernel_on_discriminant(handle, disc):
    """(kernel order, image) of the action of a GroupHandle on D(L)."""
    lat = disc.lattice
    mats = [
        discriminant_action(Isometry(lat, m), disc) for m in handle.generators
    ]
    if any(m is None for m in mats):
        image = DiscriminantImage(disc, [])
        return handle.order, image
    image = DiscriminantImage(disc, mats)
    im_order = image.order()
    if handle.order % im_order:
        raise ValueError("image order does not divide the group order")
    return handle.order // im_order, image


def group_invariants(handle, enum_cap=200000):
    """Structural invariants of a GroupHandle via its permutation action."""
    return handle.invariants(enum_cap=enum_cap)


def random_word(handle, seed, length=20):
    """Deterministic random element of the group, as a matrix."""
    return handle.random_word(seed, length)


def _cached_automorphism_group(family, vector_bound, cache_dir, key, threads=1):
    if cache_dir is None:
        return automorphism_group(family, vector_bound, threads=threads)
    path = os.path.join(cache_dir, key + ".json")
    if os.path.exists(path):
        with open(path) as fh:
            data = json.load(fh)
        gens = [IntMatrix.from_json(g) for g in data["generators"]]
        for h in gens:
            if not family.preserved_by(h):
                raise ValueError("cached generator fails form checks: %s" % path)
        domain = _Domain(family, data["bound"], threads=threads)
        handle = GroupHandle(
            family, domain, gens, data["order"], data.get("orbit_sizes"), data["base_ids"]
        )
        handle.perm_group()  # randomized chain to the cached order re-certifies
        return handle
    handle = automorphism_group(family, vector_bound, threads=threads)
    os.makedirs(cache_dir, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(handle.to_json(), fh)
    os.replace(tmp, path)
    return handle
