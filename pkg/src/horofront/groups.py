"""Exact arithmetic and normal forms for the supported group families.

Normal forms are plain hashable Python values so that balls of a million
elements stay cheap:

* free group ``F_d``: reduced tuple of nonzero ints, ``+i`` is the i-th basis
  letter and ``-i`` its inverse (letters print as ``a, b, ...`` and ``A, B, ...``);
* free abelian ``Z^d``: tuple of ``d`` ints;
* semidirect ``Z^d x| F``: pair ``(vector, label)`` with label ``0`` the identity
  of ``F``; ``(v, f)(w, g) = (v + A_f w, fg)``;
* finite-index subgroup: the ambient normal form.
"""

from __future__ import annotations

import hashlib
import json
import random
import string
from collections import deque
from itertools import product

from .errors import FamilyMismatch, HypothesisViolation, MemoryCapExceeded, SpecError

LETTERS = string.ascii_lowercase


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def spec_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# small exact integer linear algebra


def int_det(m) -> int:
    """Determinant of a square integer matrix (Bareiss, exact)."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(row) for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)) for i in range(n))


def mat_vec(a, v):
    return tuple(sum(row[k] * v[k] for k in range(len(v))) for row in a)


def lattice_is_full(vectors, dim: int) -> bool:
    """True iff the integer vectors span ``Z^dim`` as a lattice (Hermite reduction)."""
    rows = [list(v) for v in vectors if any(v)]
    pivot = 0
    det = 1
    for col in range(dim):
        while True:
            live = [i for i in range(pivot, len(rows)) if rows[i][col] != 0]
            if len(live) <= 1:
                break
            best = min(live, key=lambda i: abs(rows[i][col]))
            rows[pivot], rows[best] = rows[best], rows[pivot]
            for i in range(pivot + 1, len(rows)):
                if rows[i][col]:
                    q = rows[i][col] // rows[pivot][col]
                    rows[i] = [x - q * y for x, y in zip(rows[i], rows[pivot])]
        live = [i for i in range(pivot, len(rows)) if rows[i][col] != 0]
        if not live:
            return False
        rows[pivot], rows[live[0]] = rows[live[0]], rows[pivot]
        det *= rows[pivot][col]
        pivot += 1
    return abs(det) == 1


# ---------------------------------------------------------------------------
# free words


def free_reduce(word) -> tuple:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def free_mul(w: tuple, s: tuple) -> tuple:
    n, m = len(w), len(s)
    i = 0
    while i < n and i < m and w[n - 1 - i] == -s[i]:
        i += 1
    return w[: n - i] + s[i:]


def free_inv(w: tuple) -> tuple:
    return tuple(-x for x in reversed(w))


def letter_name(letter: int) -> str:
    c = LETTERS[abs(letter) - 1]
    return c if letter > 0 else c.upper()


def format_word(w: tuple) -> str:
    return "".join(letter_name(x) for x in w) if w else "1"


def parse_word(text: str, rank: int | None = None) -> tuple:
    if text in ("", "1", "e"):
        return ()
    letters = []
    for ch in text:
        if ch.lower() not in LETTERS:
            raise SpecError(f"bad letter {ch!r} in word {text!r}")
        i = LETTERS.index(ch.lower()) + 1
        if rank is not None and i > rank:
            raise SpecError(f"letter {ch!r} outside rank {rank}")
        letters.append(i if ch.islower() else -i)
    return free_reduce(letters)


def _stallings_whole(rank: int, words) -> bool:
    """Decide whether reduced ``words`` generate all of ``F_rank`` (Stallings folding)."""
    edges = []
    nxt = 1
    for w in words:
        v = 0
        for i, letter in enumerate(w):
            u = 0 if i == len(w) - 1 else nxt
            if u:
                nxt += 1
            edges.append((v, letter, u))
            v = u
    parent = list(range(nxt))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    folded = True
    while folded:
        folded = False
        out: dict[tuple[int, int], int] = {}
        for u, letter, v in edges:
            for a, lab, b in ((u, letter, v), (v, -letter, u)):
                key, t = (find(a), lab), find(b)
                if out.get(key, t) != t:
                    parent[max(t, out[key])] = min(t, out[key])
                    folded = True
                    break
                out[key] = t
            if folded:
                break
    root = find(0)
    loops = {}
    for u, letter, v in edges:
        for a, lab, b in ((u, letter, v), (v, -letter, u)):
            if find(a) == root:
                loops[lab] = find(b)
    return all(loops.get(s) == root for i in range(1, rank + 1) for s in (i, -i))


# ---------------------------------------------------------------------------
# finite part of a semidirect product


class FiniteGroup:
    """Finite group on labels ``0..n-1`` (0 = identity) with an integer action."""

    def __init__(self, table, matrices, dim: int):
        self.order = len(table)
        self.table = tuple(tuple(row) for row in table)
        self.dim = dim
        self.matrices = tuple(tuple(tuple(r) for r in m) for m in matrices)
        if len(self.matrices) != self.order:
            raise SpecError("need one action matrix per finite-group element")
        if any(self.table[0][i] != i or self.table[i][0] != i for i in range(self.order)):
            raise SpecError("label 0 must be the identity of the finite part")
        for i, j, k in product(range(self.order), repeat=3):
            if self.table[self.table[i][j]][k] != self.table[i][self.table[j][k]]:
                raise SpecError("finite-part table is not associative")
        self.inverse = []
        for i in range(self.order):
            inv = [j for j in range(self.order) if self.table[i][j] == 0]
            if len(inv) != 1:
                raise SpecError("finite-part table is not a group")
            self.inverse.append(inv[0])
        self.inverse = tuple(self.inverse)
        for m in self.matrices:
            if len(m) != dim or any(len(r) != dim for r in m):
                raise SpecError("action matrix has wrong shape")
            if abs(int_det(m)) != 1:
                raise SpecError("action matrix must have determinant +-1")
        for i, j in product(range(self.order), repeat=2):
            if mat_mul(self.matrices[i], self.matrices[j]) != self.matrices[self.table[i][j]]:
                raise SpecError("action is not a homomorphism F -> GL_d(Z)")
        self.is_trivial_action = all(
            m == tuple(tuple(int(r == c) for c in range(dim)) for r in range(dim)) for m in self.matrices
        )

    @classmethod
    def from_matrices(cls, matrices):
        """Faithful case: the group is the matrix group itself."""
        mats = [tuple(tuple(r) for r in m) for m in matrices]
        dim = len(mats[0])
        index = {m: i for i, m in enumerate(mats)}
        if len(index) != len(mats):
            raise SpecError("matrices must be distinct when no table is given")
        try:
            table = [[index[mat_mul(a, b)] for b in mats] for a in mats]
        except KeyError:
            raise SpecError("action matrices are not closed under multiplication") from None
        return cls(table, mats, dim)

    @classmethod
    def cyclic(cls, n: int, generator=None, dim: int | None = None):
        if generator is None:
            dim = dim or 0
            ident = tuple(tuple(int(r == c) for c in range(dim)) for r in range(dim))
            mats = [ident] * n
        else:
            dim = len(generator)
            g = tuple(tuple(r) for r in generator)
            mats = [tuple(tuple(int(r == c) for c in range(dim)) for r in range(dim))]
            for _ in range(n - 1):
                mats.append(mat_mul(mats[-1], g))
        table = [[(i + j) % n for j in range(n)] for i in range(n)]
        return cls(table, mats, dim)

    def spec(self) -> dict:
        return {
            "order": self.order,
            "table": [list(r) for r in self.table],
            "action_matrices": [[list(r) for r in m] for m in self.matrices],
        }


# ---------------------------------------------------------------------------
# marked groups


class MarkedGroup:
    """A group family instance with a finite symmetric generating set."""

    family = ""
    identity: object = None

    def __init__(self, generators, labels=None):
        gens = []
        for g in generators:
            if not self.contains(g):
                raise FamilyMismatch(f"generator {g!r} is not a {self.family} element")
            for x in (g, self.inv(g)):
                if x != self.identity and x not in gens:
                    gens.append(x)
        if not gens:
            raise SpecError("generating set is empty")
        self.generators = tuple(gens)
        self.labels = tuple(labels) if labels else tuple(self.format(g) for g in self.generators)
        self._check_generates()

    # family-specific primitives -------------------------------------------------
    def mul(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def contains(self, g) -> bool:
        raise NotImplementedError

    def sort_key(self, g):
        return g

    def format(self, g) -> str:
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def family_generators(self) -> list:
        """Canonical family generators, in which homomorphisms are specified."""
        raise NotImplementedError

    def family_word(self, g) -> list:
        """Canonical word ``[(index, exponent), ...]`` in :meth:`family_generators`."""
        raise NotImplementedError

    def relators(self) -> list:
        """Defining relators as words in family generators."""
        return []

    def _check_generates(self):
        pass

    def with_generators(self, generators) -> "MarkedGroup":
        raise NotImplementedError

    def spec(self) -> dict:
        raise NotImplementedError

    # derived ----------------------------------------------------------------------
    def check(self, *elements):
        for g in elements:
            if not self.contains(g):
                raise FamilyMismatch(f"{g!r} is not an element of {self.describe()}")

    def multiply(self, g, h):
        self.check(g, h)
        return self.mul(g, h)

    def invert(self, g):
        self.check(g)
        return self.inv(g)

    def power(self, g, n: int):
        if n < 0:
            g, n = self.inv(g), -n
        out = self.identity
        base = g
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def product(self, elements):
        out = self.identity
        for g in elements:
            out = self.mul(out, g)
        return out

    def evaluate_family_word(self, word):
        gens = self.family_generators()
        return self.product(self.power(gens[i], e) for i, e in word)

    def conjugate(self, g, t):
        """``g^t = t^-1 g t``."""
        return self.mul(self.mul(self.inv(t), g), t)

    def spec_hash(self) -> str:
        return spec_hash(self.spec())

    def describe(self) -> str:
        return canonical_json(self.spec())

    def __eq__(self, other):
        return isinstance(other, MarkedGroup) and self.spec() == other.spec()

    def __hash__(self):
        return hash(self.describe())

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


class FreeGroup(MarkedGroup):
    family = "free"
    identity = ()

    def __init__(self, rank: int, generators=None, labels=None):
        if rank < 1:
            raise SpecError("free group rank must be >= 1")
        self.rank = rank
        if generators is None:
            generators = [(i,) for i in range(1, rank + 1)]
        super().__init__([free_reduce(g) for g in generators], labels)
        self.is_standard = set(self.generators) == {(s,) for i in range(1, rank + 1) for s in (i, -i)}

    def mul(self, g, h):
        return free_mul(g, h)

    def inv(self, g):
        return free_inv(g)

    def contains(self, g) -> bool:
        return (
            isinstance(g, tuple)
            and all(isinstance(x, int) and 0 < abs(x) <= self.rank for x in g)
            and all(g[i] != -g[i + 1] for i in range(len(g) - 1))
        )

    def sort_key(self, g):
        return tuple((abs(x), x < 0) for x in g)

    def format(self, g) -> str:
        return format_word(g)

    def parse(self, text: str):
        return parse_word(text, self.rank)

    def family_generators(self):
        return [(i,) for i in range(1, self.rank + 1)]

    def family_word(self, g):
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in g]

    def basis_letters(self) -> list[int]:
        """Letters of ``A u A^-1`` in the deterministic order ``a, A, b, B, ...``."""
        return [s for i in range(1, self.rank + 1) for s in (i, -i)]

    def _check_generates(self):
        if not _stallings_whole(self.rank, self.generators):
            raise SpecError("generators do not generate the free group")

    def with_generators(self, generators, labels=None):
        return FreeGroup(self.rank, generators, labels)

    def spec(self):
        return {"family": "free", "rank": self.rank, "generators": [self.format(g) for g in self.generators]}


class FreeAbelianGroup(MarkedGroup):
    family = "free_abelian"

    def __init__(self, dim: int, generators=None, labels=None):
        if dim < 0:
            raise SpecError("dimension must be >= 0")
        self.dim = dim
        self.identity = (0,) * dim
        if generators is None:
            generators = [tuple(int(i == j) for i in range(dim)) for j in range(dim)]
        if dim == 0:
            # the trivial group has no nonempty symmetric generating set
            self.generators, self.labels, self.is_standard = (), (), True
            return
        super().__init__([tuple(g) for g in generators], labels)
        std = {tuple(s * int(i == j) for i in range(dim)) for j in range(dim) for s in (1, -1)}
        self.is_standard = set(self.generators) == std

    def mul(self, g, h):
        return tuple(x + y for x, y in zip(g, h))

    def inv(self, g):
        return tuple(-x for x in g)

    def contains(self, g) -> bool:
        return isinstance(g, tuple) and len(g) == self.dim and all(isinstance(x, int) for x in g)

    def format(self, g) -> str:
        return "(" + ",".join(map(str, g)) + ")"

    def parse(self, text: str):
        body = text.strip().strip("()")
        return tuple(int(x) for x in body.split(",")) if body else ()

    def family_generators(self):
        return [tuple(int(i == j) for i in range(self.dim)) for j in range(self.dim)]

    def family_word(self, g):
        return [(j, x) for j, x in enumerate(g) if x]

    def relators(self):
        return [
            [(i, 1), (j, 1), (i, -1), (j, -1)] for i in range(self.dim) for j in range(i + 1, self.dim)
        ]

    def _check_generates(self):
        if not lattice_is_full(self.generators, self.dim):
            raise SpecError("generators do not span Z^d")

    def with_generators(self, generators, labels=None):
        return FreeAbelianGroup(self.dim, generators, labels)

    def spec(self):
        return {"family": "free_abelian", "dim": self.dim, "generators": [list(g) for g in self.generators]}


class SemidirectGroup(MarkedGroup):
    """``Z^d x| F`` with ``F`` acting on the left by integer matrices."""

    family = "semidirect"

    def __init__(self, dim: int, finite: FiniteGroup, generators=None, labels=None):
        if finite.dim != dim:
            raise SpecError("finite-part matrices do not match the lattice dimension")
        self.dim = dim
        self.finite = finite
        self.identity = ((0,) * dim, 0)
        if generators is None:
            generators = [(tuple(int(i == j) for i in range(dim)), 0) for j in range(dim)]
            generators += [((0,) * dim, f) for f in range(1, finite.order)]
        super().__init__([(tuple(v), int(f)) for v, f in generators], labels)

    def mul(self, g, h):
        v, f = g
        w, k = h
        if f:
            w = mat_vec(self.finite.matrices[f], w)
        return (tuple(x + y for x, y in zip(v, w)), self.finite.table[f][k])

    def inv(self, g):
        v, f = g
        fi = self.finite.inverse[f]
        w = mat_vec(self.finite.matrices[fi], v) if fi else v
        return (tuple(-x for x in w), fi)

    def contains(self, g) -> bool:
        return (
            isinstance(g, tuple)
            and len(g) == 2
            and isinstance(g[0], tuple)
            and len(g[0]) == self.dim
            and all(isinstance(x, int) for x in g[0])
            and isinstance(g[1], int)
            and 0 <= g[1] < self.finite.order
        )

    def format(self, g) -> str:
        return "(" + ",".join(map(str, g[0])) + "|" + str(g[1]) + ")"

    def parse(self, text: str):
        body = text.strip().strip("()")
        vec, _, lab = body.partition("|")
        return (tuple(int(x) for x in vec.split(",")) if vec else (), int(lab))

    def family_generators(self):
        lat = [(tuple(int(i == j) for i in range(self.dim)), 0) for j in range(self.dim)]
        return lat + [((0,) * self.dim, f) for f in range(1, self.finite.order)]

    def family_word(self, g):
        v, f = g
        word = [(j, x) for j, x in enumerate(v) if x]
        if f:
            word.append((self.dim + f - 1, 1))
        return word

    def _label_word(self, f):
        return [(self.dim + f - 1, 1)] if f else []

    def relators(self):
        d, fin = self.dim, self.finite
        rels = [[(i, 1), (j, 1), (i, -1), (j, -1)] for i in range(d) for j in range(i + 1, d)]
        for f, g in product(range(1, fin.order), repeat=2):
            fg = fin.table[f][g]
            rels.append(self._label_word(f) + self._label_word(g) + [(x, -e) for x, e in self._label_word(fg)])
        for f in range(1, fin.order):
            for j in range(d):
                col = [fin.matrices[f][i][j] for i in range(d)]
                rel = self._label_word(f) + [(j, 1)] + [(self.dim + f - 1, -1)]
                rel += [(i, -c) for i, c in enumerate(col) if c]
                rels.append(rel)
        return rels

    def _check_generates(self):
        fin = self.finite
        # BFS over F with the projections of S, keeping a representative per label
        reps = {0: self.identity}
        queue = deque([0])
        while queue:
            f = queue.popleft()
            for s in self.generators:
                g = self.mul(reps[f], s)
                if g[1] not in reps:
                    reps[g[1]] = g
                    queue.append(g[1])
        if len(reps) != fin.order:
            raise SpecError("generators do not project onto the finite part")
        # Schreier generators of <S> n Z^d
        vectors = []
        for f, rep in reps.items():
            for s in self.generators:
                g = self.mul(rep, s)
                x = self.mul(g, self.inv(reps[g[1]]))
                vectors.append(x[0])
        if not lattice_is_full(vectors, self.dim):
            raise SpecError("generators do not span the lattice")

    def lattice_element(self, v):
        return (tuple(v), 0)

    def with_generators(self, generators, labels=None):
        return SemidirectGroup(self.dim, self.finite, generators, labels)

    def spec(self):
        return {
            "family": "semidirect",
            "dim": self.dim,
            "finite_part": self.finite.spec(),
            "generators": [[list(v), f] for v, f in self.generators],
        }


# ---------------------------------------------------------------------------
# finite-index subgroups


class LatticeMembership:
    """``(v, f)`` with every ``v_j`` divisible by ``modulus`` (and ``f`` trivial if asked)."""

    kind = "lattice"

    def __init__(self, modulus: int, finite_part: str = "trivial"):
        if modulus < 1:
            raise SpecError("lattice modulus must be positive")
        if finite_part not in ("trivial", "any"):
            raise SpecError("finite_part must be 'trivial' or 'any'")
        self.modulus = modulus
        self.finite_part = finite_part

    def __call__(self, ambient: MarkedGroup, g) -> bool:
        if isinstance(ambient, SemidirectGroup):
            v, f = g
            if self.finite_part == "trivial" and f != 0:
                return False
        elif isinstance(ambient, FreeAbelianGroup):
            v = g
        else:
            raise SpecError("lattice membership needs an abelian or semidirect ambient group")
        return all(x % self.modulus == 0 for x in v)

    def index(self, ambient: MarkedGroup) -> int:
        idx = self.modulus ** ambient.dim
        if isinstance(ambient, SemidirectGroup) and self.finite_part == "trivial":
            idx *= ambient.finite.order
        return idx

    def spec(self):
        return {"kind": "lattice", "modulus": self.modulus, "finite_part": self.finite_part}


class ExponentMembership:
    """Kernel of ``g -> sum_i w_i * (exponent sum of family generator i) mod m``."""

    kind = "exponent_mod"

    def __init__(self, weights, modulus: int):
        self.weights = tuple(weights)
        self.modulus = modulus

    def __call__(self, ambient: MarkedGroup, g) -> bool:
        if isinstance(ambient, SemidirectGroup):
            raise SpecError("exponent_mod membership is not a homomorphism on semidirect groups")
        total = sum(self.weights[i] * e for i, e in ambient.family_word(g))
        return total % self.modulus == 0

    def index(self, ambient) -> int:
        from math import gcd

        g = self.modulus
        for w in self.weights:
            g = gcd(g, w)
        return self.modulus // g

    def spec(self):
        return {"kind": "exponent_mod", "weights": list(self.weights), "modulus": self.modulus}


class FiniteIndexSubgroup(MarkedGroup):
    """Subgroup given by a membership predicate on ambient normal forms."""

    family = "subgroup"

    def __init__(self, ambient: MarkedGroup, membership, generators, labels=None):
        self.ambient = ambient
        self.membership = membership
        self.identity = ambient.identity
        super().__init__([g for g in generators], labels)
        self.index = membership.index(ambient)

    def mul(self, g, h):
        return self.ambient.mul(g, h)

    def inv(self, g):
        return self.ambient.inv(g)

    def contains(self, g) -> bool:
        return self.ambient.contains(g) and self.membership(self.ambient, g)

    def sort_key(self, g):
        return self.ambient.sort_key(g)

    def format(self, g) -> str:
        return self.ambient.format(g)

    def parse(self, text: str):
        return self.ambient.parse(text)

    def family_generators(self):
        raise SpecError("homomorphisms out of subgroup families are not supported")

    def family_word(self, g):
        raise SpecError("homomorphisms out of subgroup families are not supported")

    def _check_generates(self):
        amb = self.ambient
        if isinstance(self.membership, LatticeMembership):
            k = self.membership.modulus
            if isinstance(amb, SemidirectGroup) and self.membership.finite_part == "any":
                return
            vecs = [g[0] if isinstance(amb, SemidirectGroup) else g for g in self.generators]
            if not lattice_is_full([tuple(x // k for x in v) for v in vecs], amb.dim):
                raise SpecError("generators do not generate the lattice subgroup")

    def with_generators(self, generators, labels=None):
        return FiniteIndexSubgroup(self.ambient, self.membership, generators, labels)

    def spec(self):
        return {
            "family": "subgroup",
            "ambient": self.ambient.spec(),
            "membership": self.membership.spec(),
            "generators": [spec_element(self.ambient, g) for g in self.generators],
        }


# ---------------------------------------------------------------------------
# JSON specs


def spec_element(group: MarkedGroup, g):
    if isinstance(group, FiniteIndexSubgroup):
        return spec_element(group.ambient, g)
    if isinstance(group, FreeGroup):
        return format_word(g) if g else "1"
    if isinstance(group, FreeAbelianGroup):
        return list(g)
    if isinstance(group, SemidirectGroup):
        return [list(g[0]), g[1]]
    raise SpecError(f"unknown group {group!r}")


def element_from_spec(group: MarkedGroup, raw):
    if isinstance(group, FiniteIndexSubgroup):
        g = element_from_spec(group.ambient, raw)
        group.check(g)
        return g
    if isinstance(group, FreeGroup):
        if not isinstance(raw, str):
            raise SpecError(f"free-group element must be a word string, got {raw!r}")
        return parse_word(raw, group.rank)
    if isinstance(group, FreeAbelianGroup):
        g = tuple(int(x) for x in raw)
    elif isinstance(group, SemidirectGroup):
        try:
            v, f = raw
            g = (tuple(int(x) for x in v), int(f))
        except (TypeError, ValueError):
            raise SpecError(f"semidirect element must be [vector, label], got {raw!r}") from None
    else:
        raise SpecError(f"unknown group {group!r}")
    group.check(g)
    return g


def _finite_from_spec(raw: dict, dim: int) -> FiniteGroup:
    mats = raw.get("action_matrices")
    table = raw.get("table")
    order = raw.get("order")
    if table is None and mats is None:
        return FiniteGroup.cyclic(order or 1, dim=dim)
    if table is None:
        fin = FiniteGroup.from_matrices(mats)
    else:
        if mats is None:
            ident = [[int(r == c) for c in range(dim)] for r in range(dim)]
            mats = [ident] * len(table)
        fin = FiniteGroup(table, mats, dim)
    if order is not None and fin.order != order:
        raise SpecError("finite_part order does not match its table")
    if fin.dim != dim:
        raise SpecError("finite_part matrices do not match dim")
    return fin


def group_from_spec(raw: dict) -> MarkedGroup:
    try:
        family = raw["family"]
    except (KeyError, TypeError):
        raise SpecError("group spec needs a 'family'") from None
    gens = raw.get("generators")
    labels = raw.get("labels")
    if family == "free":
        rank = int(raw.get("rank", 0))
        g = FreeGroup(rank)
        return g if gens is None else FreeGroup(rank, [parse_word(w, rank) for w in gens], labels)
    if family == "free_abelian":
        dim = int(raw.get("dim", 0))
        return FreeAbelianGroup(dim, None if gens is None else [tuple(v) for v in gens], labels)
    if family == "semidirect":
        dim = int(raw.get("dim", 0))
        fin = _finite_from_spec(raw.get("finite_part", {}), dim)
        g = SemidirectGroup(dim, fin)
        if gens is None:
            return g
        return SemidirectGroup(dim, fin, [element_from_spec(g, x) for x in gens], labels)
    if family == "subgroup":
        ambient = group_from_spec(raw["ambient"])
        mem = raw.get("membership") or raw.get("subgroup") or {}
        kind = mem.get("kind", "lattice")
        if kind == "lattice":
            membership = LatticeMembership(int(mem["modulus"]), mem.get("finite_part", "trivial"))
        elif kind == "exponent_mod":
            membership = ExponentMembership(mem["weights"], int(mem["modulus"]))
        else:
            raise SpecError(f"unknown membership kind {kind!r}")
        if gens is None:
            raise SpecError("subgroup spec needs explicit generators")
        elements = [element_from_spec(ambient, x) for x in gens]
        return FiniteIndexSubgroup(ambient, membership, elements, labels)
    raise SpecError(f"unknown group family {family!r}")


# ---------------------------------------------------------------------------
# built-in examples


def free_group(rank: int = 2, generators=None) -> FreeGroup:
    if generators is not None:
        generators = [parse_word(w, rank) if isinstance(w, str) else w for w in generators]
    return FreeGroup(rank, generators)


def free_abelian(dim: int, generators=None) -> FreeAbelianGroup:
    return FreeAbelianGroup(dim, generators)


def infinite_dihedral() -> SemidirectGroup:
    """``D_inf = Z x| Z/2`` marked by ``{s, r, r^-1}``; ``r = ((1,), 0)``, ``s = ((0,), 1)``."""
    fin = FiniteGroup.cyclic(2, [[-1]])
    return SemidirectGroup(1, fin, [((0,), 1), ((1,), 0)])


def rotation_semidirect(order: int = 4) -> SemidirectGroup:
    """``Z^2 x| Z/order`` by the rotation of the lattice (order 2, 3, 4 or 6)."""
    gens = {2: [[-1, 0], [0, -1]], 3: [[0, -1], [1, -1]], 4: [[0, -1], [1, 0]], 6: [[1, -1], [1, 0]]}
    if order not in gens:
        raise SpecError("lattice rotations exist only for orders 2, 3, 4, 6")
    fin = FiniteGroup.cyclic(order, gens[order])
    return SemidirectGroup(2, fin, [((0, 0), 1), ((1, 0), 0)])


def finite_cyclic(n: int) -> SemidirectGroup:
    """``Z/n`` as the rank-0 semidirect family."""
    return SemidirectGroup(0, FiniteGroup.cyclic(n, dim=0), [((), 1)] if n > 1 else None)


# ---------------------------------------------------------------------------
# quotient maps


class QuotientMap:
    """Surjective homomorphism given by images of the source's family generators.

    ``target`` carries the marking ``pi(S)`` unless another one is passed.
    ``constant`` is the compatibility constant ``C`` (1 for the ``pi(S)`` marking).
    """

    def __init__(self, source: MarkedGroup, target: MarkedGroup, images, constant: int = 1,
                 check_samples: int = 1000, seed: int = 0, target_marking="pi"):
        images = list(images)
        if len(images) != len(source.family_generators()):
            raise SpecError("need one image per family generator of the source")
        for x in images:
            target.check(x)
        self.source = source
        self.images = tuple(images)
        gen_images = [self._apply_unchecked(s, target) for s in source.generators]
        pis = []
        for x in gen_images:
            if x != target.identity and x not in pis:
                pis.append(x)
        if target_marking == "pi" and pis:
            target = target.with_generators(pis)
        self.target = target
        self.generator_images = tuple(gen_images)
        if constant < 1:
            raise SpecError("compatibility constant must be >= 1")
        self.constant = int(constant)
        self._check_relations(check_samples, seed)
        self._check_surjective()
        self._section_tree = None

    def _apply_unchecked(self, g, target=None):
        target = target or self.target
        mul, imgs = target.mul, self.images
        inv = getattr(self, "_inv_images", None)
        if inv is None:
            inv = self._inv_images = tuple(target.inv(x) for x in imgs)
        out = target.identity
        for i, e in self.source.family_word(g):
            if e == 1:
                out = mul(out, imgs[i])
            elif e == -1:
                out = mul(out, inv[i])
            else:
                out = mul(out, target.power(imgs[i], e))
        return out

    def apply(self, g):
        self.source.check(g)
        return self._apply_unchecked(g)

    __call__ = apply

    def _check_relations(self, samples, seed):
        src, tgt = self.source, self.target
        for rel in src.relators():
            img = tgt.product(tgt.power(self.images[i], e) for i, e in rel)
            if img != tgt.identity:
                raise SpecError(f"image assignment violates relator {rel}")
        rng = random.Random(seed)
        n = len(src.generators)
        for _ in range(samples):
            word = [rng.randrange(n) for _ in range(rng.randrange(1, 12))]
            g = src.product(src.generators[i] for i in word)
            lhs = tgt.product(self.generator_images[i] for i in word)
            if lhs != self._apply_unchecked(g):
                raise SpecError("image assignment is not a homomorphism on sampled words")

    def _check_surjective(self):
        tgt = self.target
        if not tgt.generators:
            return
        # the pi(S)-marking generates by construction; a user marking must be reached
        reached = set(self.generator_images)
        for t in tgt.generators:
            if t not in reached:
                try:
                    self.section(t)
                except HypothesisViolation:
                    raise SpecError(f"target generator {tgt.format(t)} is not in the image") from None

    def section(self, q, cap: int = 10**6):
        """Lift ``q`` along a geodesic word in the ``pi(S)``-marked target."""
        self.target.check(q)
        tree = self._section_tree
        if tree is None:
            tree = self._section_tree = {"parent": {self.target.identity: None}, "frontier": [self.target.identity]}
        parent = tree["parent"]
        tgt, imgs = self.target, self.generator_images
        while q not in parent:
            if not tree["frontier"] or len(parent) > cap:
                raise HypothesisViolation(f"no lift of {tgt.format(q)} found", "section")
            nxt = []
            for x in tree["frontier"]:
                for i, p in enumerate(imgs):
                    y = tgt.mul(x, p)
                    if y not in parent:
                        parent[y] = (x, i)
                        nxt.append(y)
            tree["frontier"] = nxt
        letters = []
        while parent[q] is not None:
            q, i = parent[q]
            letters.append(i)
        return self.source.product(self.source.generators[i] for i in reversed(letters))

    def spec(self) -> dict:
        return {
            "source": self.source.spec(),
            "target": self.target.spec(),
            "images": [spec_element(self.target, x) for x in self.images],
            "constant": self.constant,
        }

    def spec_hash(self) -> str:
        return spec_hash(self.spec())


def quotient_from_spec(raw: dict, source: MarkedGroup | None = None) -> QuotientMap:
    src = source or group_from_spec(raw["source"])
    tgt = group_from_spec(raw["target"])
    images = [element_from_spec(tgt, x) for x in raw["images"]]
    marking = "given" if raw.get("target_marking") == "given" else "pi"
    return QuotientMap(src, tgt, images, constant=int(raw.get("constant", 1)), target_marking=marking)


def abelianization(group: FreeGroup) -> QuotientMap:
    """``F_d -> Z^d`` sending the i-th letter to ``e_i``."""
    tgt = FreeAbelianGroup(group.rank)
    return QuotientMap(group, tgt, tgt.family_generators())


# ---------------------------------------------------------------------------
# module-level operations


def multiply(group: MarkedGroup, g, h):
    return group.multiply(g, h)


def invert(group: MarkedGroup, g):
    return group.invert(g)


def quotient_apply(pi: QuotientMap, g):
    return pi.apply(g)


def quotient_section(pi: QuotientMap, q):
    return pi.section(q)


def enumerate_by_length(group: MarkedGroup, radius: int, cap: int = 10**7):
    """Yield ``(element, word length)`` layer by layer (plain BFS over the marking)."""
    seen = {group.identity}
    frontier = [group.identity]
    yield group.identity, 0
    for r in range(1, radius + 1):
        nxt = []
        for x in frontier:
            for s in group.generators:
                y = group.mul(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise MemoryCapExceeded("BFS cap exceeded", r - 1, len(seen))
        nxt.sort(key=group.sort_key)
        for y in nxt:
            yield y, r
        frontier = nxt
