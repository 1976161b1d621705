"""Finite group families, subgroup towers and coset factorization.

Composition convention: ``mul(g, h)`` is the element that applies ``h`` first
and then ``g``.  For permutations this means ``mul(g, h)(x) == g(h(x))``.

Three families are supported: cyclic ``Z_n``, symmetric ``S_n`` and metacyclic
``Z_q ⋉ Z_p``.  New families plug in by subclassing :class:`GroupFamily`.
"""

from __future__ import annotations

import itertools
import json
import re
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Hashable, Sequence

from .errors import CapabilityError, DomainError, EncodingError

Element = Hashable
# (generator index, inverted)
Letter = tuple[int, bool]
Word = tuple[Letter, ...]


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class GroupFamily(ABC):
    """Plugin interface for a finite group with a fixed subgroup tower.

    Levels run ``0..num_levels``; level 0 is the trivial subgroup and the top
    level is the whole group.  Subclasses supply arithmetic, the tower
    (membership and transversals) and a strong generating set.  Everything
    else (factorization, BFS words, diameters) is derived by :class:`Tower`.
    """

    family: str = "abstract"

    @property
    @abstractmethod
    def num_levels(self) -> int: ...

    @property
    @abstractmethod
    def order(self) -> int: ...

    @abstractmethod
    def identity(self) -> Element: ...

    @abstractmethod
    def mul(self, g: Element, h: Element) -> Element: ...

    @abstractmethod
    def inverse(self, g: Element) -> Element: ...

    @abstractmethod
    def check(self, g: Any) -> Element:
        """Return ``g`` in canonical form or raise :class:`EncodingError`."""

    @abstractmethod
    def in_level(self, level: int, g: Element) -> bool: ...

    @abstractmethod
    def transversal(self, level: int) -> list[Element]:
        """Left coset representatives of ``G_{level-1}`` in ``G_level``, identity first."""

    @abstractmethod
    def generators(self) -> list[Element]: ...

    @abstractmethod
    def format(self, g: Element) -> str: ...

    @abstractmethod
    def parse(self, text: str) -> Element: ...

    @abstractmethod
    def to_json(self) -> dict: ...

    def coset_index(self, level: int, g: Element) -> int:
        """Index of the transversal element whose coset contains ``g``."""
        for k, alpha in enumerate(self.transversal(level)):
            if self.in_level(level - 1, self.mul(self.inverse(alpha), g)):
                return k
        raise DomainError(f"{self.format(g)} not in level {level}")

    def elements(self) -> list[Element]:
        raise NotImplementedError

    def generator_name(self, index: int) -> str:
        return self.format(self.generators()[index])

    @property
    def label(self) -> str:
        return self.family


class CyclicGroup(GroupFamily):
    """``Z_n`` with the tower of subgroups of orders ``f1, f1*f2, ...``.

    Elements are integers mod ``n``.  The default step sizes are the prime
    factors of ``n`` in descending order, which gives ``Z_6 > Z_3 > 1``.
    """

    family = "cyclic"

    def __init__(self, n: int, factors: Sequence[int] | None = None):
        if n < 1:
            raise EncodingError("cyclic order must be >= 1")
        if factors is None:
            factors = sorted(prime_factors(n), reverse=True)
        factors = [int(f) for f in factors]
        prod = 1
        for f in factors:
            if f < 2:
                raise EncodingError("tower step sizes must be >= 2")
            prod *= f
        if prod != n:
            raise EncodingError(f"tower steps {factors} do not multiply to {n}")
        self.n = n
        self.factors = factors
        # level_orders[i] = |G_i|
        self.level_orders = [1]
        for f in factors:
            self.level_orders.append(self.level_orders[-1] * f)

    @property
    def num_levels(self) -> int:
        return len(self.factors)

    @property
    def order(self) -> int:
        return self.n

    def identity(self):
        return 0

    def mul(self, g, h):
        return (g + h) % self.n

    def inverse(self, g):
        return (-g) % self.n

    def check(self, g):
        if isinstance(g, bool) or not isinstance(g, int) or not 0 <= g < self.n:
            raise EncodingError(f"{g!r} is not an element of Z_{self.n}")
        return g

    def level_step(self, level: int) -> int:
        """Generator of ``G_level`` as an element of ``Z_n``."""
        return self.n // self.level_orders[level]

    def in_level(self, level, g):
        return g % self.level_step(level) == 0

    def transversal(self, level):
        step = self.level_step(level)
        return [k * step for k in range(self.factors[level - 1])]

    def coset_index(self, level, g):
        step = self.level_step(level)
        if g % step:
            raise DomainError(f"{g} not in level {level}")
        return (g // step) % self.factors[level - 1]

    def generators(self):
        return [self.level_step(i) for i in range(1, self.num_levels + 1)]

    def elements(self):
        return list(range(self.n))

    def format(self, g):
        return str(g)

    def parse(self, text):
        try:
            return self.check(int(str(text).strip()))
        except ValueError as exc:
            raise EncodingError(f"cannot parse {text!r} as an integer") from exc

    def to_json(self):
        return {"family": "cyclic", "n": self.n, "factors": list(self.factors)}

    @property
    def label(self):
        return f"Z{self.n}"


class SymmetricGroup(GroupFamily):
    """``S_n`` on points ``0..n-1`` with the tower ``S_n > S_{n-1} > ... > S_1``.

    Elements are image tuples.  Level ``i`` is ``S_{i+1}`` (fixes points
    ``> i``).  Transversal of ``S_{k-1}`` in ``S_k`` is ``e, (k-1 k), ..., (1 k)``
    in 1-based cycle notation; generators are the adjacent transpositions.
    """

    family = "symmetric"

    def __init__(self, n: int):
        if n < 1:
            raise EncodingError("symmetric degree must be >= 1")
        self.n = n

    @property
    def num_levels(self):
        return self.n - 1

    @property
    def order(self):
        out = 1
        for k in range(2, self.n + 1):
            out *= k
        return out

    def identity(self):
        return tuple(range(self.n))

    def mul(self, g, h):
        return tuple(g[x] for x in h)

    def inverse(self, g):
        out = [0] * self.n
        for i, x in enumerate(g):
            out[x] = i
        return tuple(out)

    def check(self, g):
        try:
            g = tuple(int(x) for x in g)
        except (TypeError, ValueError) as exc:
            raise EncodingError(f"{g!r} is not a permutation tuple") from exc
        if sorted(g) != list(range(self.n)):
            raise EncodingError(f"{g!r} is not a permutation of 0..{self.n - 1}")
        return g

    def transposition(self, a: int, b: int) -> tuple:
        """Transposition of 0-based points ``a`` and ``b``."""
        p = list(range(self.n))
        p[a], p[b] = p[b], p[a]
        return tuple(p)

    def in_level(self, level, g):
        return all(g[x] == x for x in range(level + 1, self.n))

    def transversal(self, level):
        k = level  # 0-based point moved into place at this level
        return [self.identity()] + [self.transposition(j, k) for j in range(k - 1, -1, -1)]

    def coset_index(self, level, g):
        k = level
        if not self.in_level(level, g):
            raise DomainError(f"{self.format(g)} not in level {level}")
        j = g[k]
        return 0 if j == k else k - j

    def generators(self):
        return [self.transposition(j, j + 1) for j in range(self.n - 1)]

    def elements(self):
        return list(itertools.permutations(range(self.n)))

    def format(self, g):
        seen = set()
        cycles = []
        for start in range(self.n):
            if start in seen or g[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            x = g[start]
            while x != start:
                cyc.append(x)
                seen.add(x)
                x = g[x]
            cycles.append("(" + " ".join(str(c + 1) for c in cyc) + ")")
        return "".join(cycles) or "e"

    def parse(self, text):
        text = str(text).strip()
        if text in ("", "e", "()", "id"):
            return self.identity()
        if not re.fullmatch(r"(\(\s*\d+(\s+\d+)*\s*\))+", text):
            raise EncodingError(f"bad cycle notation {text!r}")
        g = list(range(self.n))
        # rightmost cycle acts first
        for cyc_text in reversed(re.findall(r"\(([^)]*)\)", text)):
            pts = [int(x) - 1 for x in cyc_text.split()]
            if any(not 0 <= x < self.n for x in pts) or len(set(pts)) != len(pts):
                raise EncodingError(f"bad cycle {cyc_text!r} for S_{self.n}")
            c = list(range(self.n))
            for a, b in zip(pts, pts[1:] + pts[:1]):
                c[a] = b
            g = [c[x] for x in g]
        return tuple(g)

    def to_json(self):
        return {"family": "symmetric", "n": self.n}

    @property
    def label(self):
        return f"S{self.n}"


class MetacyclicGroup(GroupFamily):
    """``Z_q ⋉ Z_p`` generated by ``x`` (order ``p``) and ``y`` (order ``q``)
    with ``y x y^-1 = x^r``.

    Elements are pairs ``(a, b)`` meaning ``x^a y^b``.  Tower:
    ``1 < <x> < G``; transversals are powers of ``x`` and of ``y``.
    """

    family = "metacyclic"

    def __init__(self, p: int, q: int, r: int):
        if p < 2 or q < 1:
            raise EncodingError("metacyclic needs p >= 2, q >= 1")
        r %= p
        if pow(r, q, p) != 1 % p:
            raise EncodingError(f"action exponent {r} does not satisfy r^{q} = 1 mod {p}")
        self.p, self.q, self.r = p, q, r
        self._rpow = [pow(r, k, p) for k in range(q)]

    @property
    def num_levels(self):
        return 2 if self.q > 1 else 1

    @property
    def order(self):
        return self.p * self.q

    def identity(self):
        return (0, 0)

    def mul(self, g, h):
        return ((g[0] + self._rpow[g[1]] * h[0]) % self.p, (g[1] + h[1]) % self.q)

    def inverse(self, g):
        a, b = g
        return ((-a * self._rpow[(-b) % self.q]) % self.p, (-b) % self.q)

    def check(self, g):
        try:
            a, b = (int(v) for v in g)
        except (TypeError, ValueError) as exc:
            raise EncodingError(f"{g!r} is not an (a, b) pair") from exc
        if not (0 <= a < self.p and 0 <= b < self.q):
            raise EncodingError(f"{g!r} out of range for p={self.p}, q={self.q}")
        return (a, b)

    def in_level(self, level, g):
        if level <= 0:
            return g == (0, 0)
        if level == 1:
            return g[1] == 0
        return True

    def transversal(self, level):
        if level == 1:
            return [(a, 0) for a in range(self.p)]
        return [(0, b) for b in range(self.q)]

    def coset_index(self, level, g):
        if not self.in_level(level, g):
            raise DomainError(f"{self.format(g)} not in level {level}")
        return g[0] if level == 1 else g[1]

    def generators(self):
        gens = [(1 % self.p, 0)]
        if self.q > 1:
            gens.append((0, 1))
        return gens

    def elements(self):
        return [(a, b) for a in range(self.p) for b in range(self.q)]

    def format(self, g):
        return f"({g[0]},{g[1]})"

    def parse(self, text):
        m = re.fullmatch(r"\s*\(?\s*(-?\d+)\s*,\s*(-?\d+)\s*\)?\s*", str(text))
        if not m:
            raise EncodingError(f"bad metacyclic element {text!r}; expected (a,b)")
        return self.check((int(m.group(1)) % self.p, int(m.group(2)) % self.q))

    def to_json(self):
        return {"family": "metacyclic", "p": self.p, "q": self.q, "r": self.r}

    @property
    def is_dihedral(self) -> bool:
        return self.q == 2 and self.r == self.p - 1

    @property
    def label(self):
        if self.is_dihedral:
            return f"D{self.p}"
        return f"M({self.p},{self.q},{self.r})"


def dihedral(p: int) -> MetacyclicGroup:
    return MetacyclicGroup(p, 2, p - 1)


def group_from_json(spec: dict) -> GroupFamily:
    """Build a family from a spec such as ``{"family": "symmetric", "n": 4}``."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise EncodingError("group spec must be an object with a 'family' key")
    fam = spec["family"]
    try:
        if fam == "cyclic":
            return CyclicGroup(int(spec["n"]), spec.get("factors"))
        if fam == "symmetric":
            return SymmetricGroup(int(spec["n"]))
        if fam == "dihedral":
            return dihedral(int(spec.get("p", spec.get("n"))))
        if fam == "metacyclic":
            return MetacyclicGroup(int(spec["p"]), int(spec["q"]), int(spec["r"]))
    except KeyError as exc:
        raise EncodingError(f"group spec missing field {exc}") from exc
    raise CapabilityError(f"unsupported group family {fam!r}")


def load_group(path: str | Path) -> GroupFamily:
    return group_from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Generator:
    index: int
    element: Element
    level: int
    # greatest j with the generator in the centralizer of G_j
    centralized_level: int
    name: str


@dataclass
class Tower:
    """Subgroup tower data derived from a family: transversals, strong
    generating set annotations and BFS words for every transversal element.

    Immutable after construction.
    """

    group: GroupFamily
    transversals: list[list[Element]] = field(init=False)
    generators: list[Generator] = field(init=False)
    words: list[dict[Element, Word]] = field(init=False)

    def __post_init__(self):
        g = self.group
        m = g.num_levels
        self.transversals = [[]] + [g.transversal(i) for i in range(1, m + 1)]
        for i in range(1, m + 1):
            t = self.transversals[i]
            if t[0] != g.identity():
                raise DomainError(f"transversal at level {i} must start with the identity")
        self._level_elements = [[g.identity()]]
        for i in range(1, m + 1):
            self._level_elements.append(
                [g.mul(a, h) for a in self.transversals[i] for h in self._level_elements[i - 1]]
            )
        gens = []
        for k, el in enumerate(g.generators()):
            level = next(i for i in range(m + 1) if g.in_level(i, el))
            cz = 0
            for j in range(m, -1, -1):
                if all(g.mul(el, h) == g.mul(h, el) for h in self._level_elements[j]):
                    cz = j
                    break
            gens.append(Generator(k, el, level, cz, g.format(el)))
        self.generators = gens
        self.words = [{}] + [self._bfs(i) for i in range(1, m + 1)]

    @property
    def num_levels(self) -> int:
        return self.group.num_levels

    def level_elements(self, level: int) -> list[Element]:
        return self._level_elements[level]

    def level_order(self, level: int) -> int:
        return len(self._level_elements[level])

    def index(self, level: int) -> int:
        return len(self.transversals[level])

    def generators_in(self, level: int) -> list[Generator]:
        return [s for s in self.generators if s.level <= level]

    def _moves(self, level):
        g = self.group
        out = []
        for s in self.generators_in(level):
            out.append(((s.index, False), s.element))
            inv = g.inverse(s.element)
            if inv != s.element:
                out.append(((s.index, True), inv))
        return out

    def _bfs(self, level: int) -> dict[Element, Word]:
        # appending moves in fixed order makes the first word found for each
        # element the lexicographically least shortest word
        g = self.group
        moves = self._moves(level)
        best: dict[Element, Word] = {g.identity(): ()}
        queue = deque([g.identity()])
        while queue:
            cur = queue.popleft()
            w = best[cur]
            for letter, el in moves:
                nxt = g.mul(cur, el)
                if nxt not in best:
                    best[nxt] = w + (letter,)
                    queue.append(nxt)
        if len(best) != self.level_order(level):
            raise DomainError(f"generators do not generate level {level}")
        return {a: best[a] for a in self.transversals[level]}

    def evaluate_word(self, word: Word) -> Element:
        g = self.group
        out = g.identity()
        for idx, inv in word:
            el = self.generators[idx].element
            out = g.mul(out, g.inverse(el) if inv else el)
        return out

    def transversal_word(self, alpha: Element, level: int) -> Word:
        try:
            return self.words[level][alpha]
        except KeyError:
            raise DomainError(f"{self.group.format(alpha)} is not in T_{level}") from None

    def level_diameter(self, level: int) -> int:
        return max(len(w) for w in self.words[level].values())

    def adapted_diameter(self) -> int:
        return sum(self.level_diameter(i) for i in range(1, self.num_levels + 1))

    def max_index(self) -> int:
        return max((self.index(i) for i in range(1, self.num_levels + 1)), default=1)

    def tower_stats(self) -> tuple[int, int]:
        return self.max_index(), self.adapted_diameter()

    def coset_digits(self, g: Element, level: int | None = None) -> tuple[int, ...]:
        """Transversal indices ``(k_level, ..., k_1)`` with ``g = T[k_level] ... T[k_1]``."""
        grp = self.group
        if level is None:
            level = self.num_levels
        out = []
        cur = g
        for i in range(level, 0, -1):
            k = grp.coset_index(i, cur)
            out.append(k)
            cur = grp.mul(grp.inverse(self.transversals[i][k]), cur)
        if cur != grp.identity():
            raise DomainError(f"{grp.format(g)} not in level {level}")
        return tuple(out)

    def coset_factorize(self, g: Element, level: int | None = None) -> tuple[Element, ...]:
        """Transversal string ``(alpha_level, ..., alpha_1)`` multiplying back to ``g``."""
        digits = self.coset_digits(g, level)
        top = len(digits)
        return tuple(self.transversals[top - n][k] for n, k in enumerate(digits))

    def element_word(self, g: Element, level: int | None = None) -> Word:
        """Generator word for ``g``: concatenated BFS words of its transversal string."""
        if level is None:
            level = self.num_levels
        word: Word = ()
        for n, alpha in enumerate(self.coset_factorize(g, level)):
            word += self.transversal_word(alpha, level - n)
        return word

    @cached_property
    def element_index(self) -> dict[Element, int]:
        return {el: k for k, el in enumerate(self.group.elements())}


def build_tower(group: GroupFamily) -> Tower:
    return Tower(group)
