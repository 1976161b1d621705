"""Tower-adapted irreducible representations and everything built on them.

Row order convention: the basis of an irreducible ``rho`` at level ``i`` is
the concatenation of the bases of its parents at level ``i-1`` (in parent
node order), recursively.  Restricting ``rho`` to ``G_{i-1}`` is therefore
block diagonal with contiguous blocks, and row ``j`` of ``rho`` corresponds
to a unique root-to-``rho`` path in the Bratteli diagram.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Mapping

import numpy as np

from .errors import CapabilityError, CertificationError, ConstructionError, DomainError
from .groups import (
    CyclicGroup,
    Element,
    Generator,
    MetacyclicGroup,
    SymmetricGroup,
    Tower,
    Word,
)

Label = Hashable
Path = tuple[int, ...]

BUILD_TOL = 1e-12
CHECK_TOL = 1e-10


@lru_cache(maxsize=None)
def _roots(order: int) -> np.ndarray:
    k = np.arange(order)
    out = np.exp(2j * np.pi * k / order)
    # pin the exactly representable points
    for num, val in ((0, 1), (1, 1j), (2, -1), (3, -1j)):
        if (num * order) % 4 == 0:
            out[(num * order) // 4] = val
    out.setflags(write=False)
    return out


def root_of_unity(order: int, k: int) -> complex:
    """``exp(2 pi i k / order)`` taken from a per-order table."""
    return complex(_roots(order)[k % order])


def format_label(label: Label) -> str:
    if isinstance(label, tuple):
        return "(" + ",".join(str(x) for x in label) + ")"
    return str(label)


@dataclass
class AdaptedRep:
    level: int
    label: Label
    dim: int
    # generator index -> unitary image, for generators in G_level
    images: dict[int, np.ndarray]
    # parent labels at level-1 in row-block order (repeated for multiplicity)
    parents: list[Label]

    @property
    def name(self) -> str:
        return format_label(self.label)


# ---------------------------------------------------------------- partitions


def partitions(n: int) -> list[tuple[int, ...]]:
    """Partitions of ``n`` in reverse lexicographic order: ``(n), ..., (1,...,1)``."""
    out = []

    def rec(rem, maxpart, prefix):
        if rem == 0:
            out.append(tuple(prefix))
            return
        for part in range(min(rem, maxpart), 0, -1):
            rec(rem - part, part, prefix + [part])

    rec(n, n, [])
    return out


def remove_corners(shape: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Shapes obtained by decrementing one part (the Young-lattice covers)."""
    out = []
    for i, part in enumerate(shape):
        nxt = shape[i + 1] if i + 1 < len(shape) else 0
        if part > nxt:
            child = list(shape)
            child[i] -= 1
            if child[i] == 0:
                child.pop()
            out.append(tuple(child))
    return out


def added_box(big: tuple[int, ...], small: tuple[int, ...]) -> tuple[int, int]:
    for row, part in enumerate(big):
        if row >= len(small) or small[row] < part:
            return row, part - 1
    raise ValueError("shapes do not differ by a box")


def standard_tableaux(shape: tuple[int, ...]) -> list[tuple[tuple[int, int], ...]]:
    """Standard tableaux as position tuples ``pos[v] = (row, col)`` for
    values ``0..n-1``, in the recursive block (last-letter) order."""
    return list(_tableaux(shape))


@lru_cache(maxsize=None)
def _tableaux(shape):
    n = sum(shape)
    if n == 1:
        return (((0, 0),),)
    order = {p: k for k, p in enumerate(partitions(n - 1))}
    parents = sorted(remove_corners(shape), key=order.__getitem__)
    out = []
    for mu in parents:
        box = added_box(shape, mu)
        out.extend(t + (box,) for t in _tableaux(mu))
    return tuple(out)


def young_orthogonal_image(shape: tuple[int, ...], k: int) -> np.ndarray:
    """Young orthogonal form of the transposition of values ``k, k+1``."""
    tabs = standard_tableaux(shape)
    where = {t: a for a, t in enumerate(tabs)}
    dim = len(tabs)
    mat = np.zeros((dim, dim))
    for a, t in enumerate(tabs):
        (r0, c0), (r1, c1) = t[k], t[k + 1]
        axial = (c1 - r1) - (c0 - r0)
        mat[a, a] = 1.0 / axial
        if abs(axial) > 1:
            swapped = list(t)
            swapped[k], swapped[k + 1] = swapped[k + 1], swapped[k]
            mat[a, where[tuple(swapped)]] = np.sqrt(1.0 - 1.0 / axial**2)
    return mat


# ------------------------------------------------------- family constructors


def _cyclic_irreps(tower: Tower, level: int) -> list[AdaptedRep]:
    g: CyclicGroup = tower.group
    if level == 0:
        return [AdaptedRep(0, 0, 1, {}, [])]
    size = g.level_orders[level]
    below = g.level_orders[level - 1]
    reps = []
    for j in range(size):
        images = {
            s.index: np.array([[root_of_unity(g.n, j * s.element)]])
            for s in tower.generators_in(level)
        }
        reps.append(AdaptedRep(level, j, 1, images, [j % below]))
    return reps


def _symmetric_irreps(tower: Tower, level: int) -> list[AdaptedRep]:
    reps = []
    order = {p: k for k, p in enumerate(partitions(level))} if level else {}
    for shape in partitions(level + 1):
        parents = sorted(remove_corners(shape), key=order.__getitem__) if level else []
        dim = len(standard_tableaux(shape))
        images = {
            s.index: young_orthogonal_image(shape, s.index).astype(complex)
            for s in tower.generators_in(level)
        }
        reps.append(AdaptedRep(level, shape, dim, images, parents))
    return reps


def metacyclic_orbits(g: MetacyclicGroup) -> list[list[int]]:
    """Orbits of characters of ``Z_p`` under ``chi_j -> chi_{j r^-1}``, each
    listed in conjugation order starting from its least member."""
    rinv = pow(g.r, -1, g.p)
    seen = set()
    orbits = []
    for j in range(g.p):
        if j in seen:
            continue
        orbit = [j]
        c = (j * rinv) % g.p
        while c != j:
            orbit.append(c)
            c = (c * rinv) % g.p
        seen.update(orbit)
        orbits.append(orbit)
    return orbits


def _metacyclic_irreps(tower: Tower, level: int) -> list[AdaptedRep]:
    g: MetacyclicGroup = tower.group
    if level == 0:
        return [AdaptedRep(0, 0, 1, {}, [])]
    if level == 1:
        return [
            AdaptedRep(1, j, 1, {0: np.array([[root_of_unity(g.p, j)]])}, [0])
            for j in range(g.p)
        ]
    reps = []
    for orbit in metacyclic_orbits(g):
        o = len(orbit)
        rows = sorted(orbit)
        pos = {c: rows.index(c) for c in orbit}
        x_img = np.diag([root_of_unity(g.p, c) for c in rows])
        for b in range(g.q // o):
            # y w_i = omega_q^b w_{i+1}, w_i spanning the chi_{orbit[i]} block
            phase = root_of_unity(g.q, b)
            y_img = np.zeros((o, o), dtype=complex)
            for i, c in enumerate(orbit):
                y_img[pos[orbit[(i + 1) % o]], pos[c]] = phase
            reps.append(AdaptedRep(2, (orbit[0], b), o, {0: x_img, 1: y_img}, rows))
    return reps


_BUILDERS: dict[type, Callable[[Tower, int], list[AdaptedRep]]] = {
    CyclicGroup: _cyclic_irreps,
    SymmetricGroup: _symmetric_irreps,
    MetacyclicGroup: _metacyclic_irreps,
}


def register_family(cls: type, builder: Callable[[Tower, int], list[AdaptedRep]]) -> None:
    """Plug in the irreducible-representation builder for a new family."""
    _BUILDERS[cls] = builder


# ----------------------------------------------------------------- diagrams


@dataclass
class BratteliDiagram:
    """Leveled multigraph of irreducibles.

    ``children[i][sigma]`` lists the level-``i+1`` labels reached by the
    out-edges of ``sigma`` in edge order (edge ``e`` is ``children[...][e-1]``).
    ``rows[i][rho]`` lists the paths (edge-index tuples) indexing the rows of
    ``rho`` in basis order.
    """

    nodes: list[list[tuple[Label, int]]]
    children: list[dict[Label, list[Label]]]
    rows: list[dict[Label, list[Path]]]
    _path_lookup: dict[Path, tuple[Label, int]] = field(default_factory=dict, repr=False)

    @classmethod
    def from_irreps(cls, levels: list[list[AdaptedRep]]) -> "BratteliDiagram":
        nodes = [[(r.label, r.dim) for r in lvl] for lvl in levels]
        if len(nodes[0]) != 1:
            raise ConstructionError("level 0 must have a single node")
        children: list[dict] = [{} for _ in levels]
        for i in range(1, len(levels)):
            order = {lab: k for k, (lab, _) in enumerate(nodes[i - 1])}
            dims = dict(nodes[i - 1])
            for lab, _ in nodes[i - 1]:
                children[i - 1][lab] = []
            for rho in levels[i]:
                if any(p not in order for p in rho.parents):
                    raise ConstructionError(f"unknown parent of {rho.name}")
                if sum(dims[p] for p in rho.parents) != rho.dim:
                    raise ConstructionError(f"branching dims do not add up for {rho.name}")
                if [order[p] for p in rho.parents] != sorted(order[p] for p in rho.parents):
                    raise ConstructionError(f"parents of {rho.name} not in node order")
                for p in rho.parents:
                    children[i - 1][p].append(rho.label)
        root = nodes[0][0][0]
        rows: list[dict] = [{root: [()]}]
        for i in range(1, len(levels)):
            level_rows = {}
            for rho in levels[i]:
                paths = []
                seen: dict[Label, int] = {}
                for p in rho.parents:
                    copy = seen.get(p, 0)
                    seen[p] = copy + 1
                    kids = children[i - 1][p]
                    edge = [k for k, c in enumerate(kids) if c == rho.label][copy] + 1
                    paths.extend(path + (edge,) for path in rows[i - 1][p])
                level_rows[rho.label] = paths
            rows.append(level_rows)
        for i, lvl in enumerate(nodes):
            for lab, dim in lvl:
                if len(rows[i][lab]) != dim:
                    raise ConstructionError(f"path count != dim at {format_label(lab)}")
        lookup = {}
        for lvl_rows in rows:
            for lab, paths in lvl_rows.items():
                for j, path in enumerate(paths):
                    lookup[path] = (lab, j)
        return cls(nodes, children, rows, lookup)

    @property
    def depth(self) -> int:
        return len(self.nodes) - 1

    def labels(self, level: int) -> list[Label]:
        return [lab for lab, _ in self.nodes[level]]

    def dim(self, level: int, label: Label) -> int:
        return dict(self.nodes[level])[label]

    def out_degree(self, level: int, label: Label) -> int:
        return len(self.children[level].get(label, []))

    def max_out_degree(self, level: int) -> int:
        return max((len(v) for v in self.children[level].values()), default=0)

    def path_count(self, level: int, label: Label) -> int:
        return len(self.rows[level][label])

    def paths(self, level: int) -> list[Path]:
        """All length-``level`` paths, grouped by terminal node in node order."""
        return [p for lab in self.labels(level) for p in self.rows[level][lab]]

    def terminal(self, path: Path) -> Label:
        return self._path_lookup[tuple(path)][0]

    def path_to_index(self, path: Path) -> tuple[Label, int]:
        try:
            return self._path_lookup[tuple(path)]
        except KeyError:
            raise DomainError(f"{path} is not a path in the diagram") from None

    def index_to_path(self, level: int, label: Label, row: int) -> Path:
        return self.rows[level][label][row]

    def extend(self, path: Path, edge: int) -> Path:
        return tuple(path) + (edge,)

    def child(self, level: int, label: Label, edge: int) -> Label:
        return self.children[level][label][edge - 1]

    def to_json(self) -> dict:
        return {
            "levels": [
                [
                    {
                        "label": format_label(lab),
                        "dim": dim,
                        "paths": len(self.rows[i][lab]),
                        "children": [format_label(c) for c in self.children[i].get(lab, [])],
                    }
                    for lab, dim in lvl
                ]
                for i, lvl in enumerate(self.nodes)
            ]
        }


# ---------------------------------------------------------- certificates


@dataclass
class SchurBlock:
    eta: Label
    zeta: Label
    m: int
    d: int
    matrix: np.ndarray


@dataclass
class SchurCertificate:
    """Block structure ``⊕ (X ⊗ I_d)`` of a generator image.

    ``row_keys[r] = (block, outer, mid, inner)``: entry ``(a, b)`` of the
    certified matrix is ``blocks[block].matrix[mid_a, mid_b]`` when block,
    outer and inner agree and zero otherwise.
    """

    blocks: list[SchurBlock]
    row_keys: list[tuple[int, int, int, int]]
    residual: float

    @property
    def max_m(self) -> int:
        return max((b.m for b in self.blocks), default=0)

    def expected(self) -> np.ndarray:
        return reconstruct_certified(self.blocks, self.row_keys)

    def shifted(self, offset_block: int, offset_outer: int) -> "SchurCertificate":
        return SchurCertificate(
            self.blocks,
            [(b + offset_block, o + offset_outer, m, i) for b, o, m, i in self.row_keys],
            self.residual,
        )


def reconstruct_certified(blocks, row_keys) -> np.ndarray:
    n = len(row_keys)
    out = np.zeros((n, n), dtype=complex)
    keys = np.array(row_keys, dtype=np.int64).reshape(n, 4)
    for a in range(n):
        same = (
            (keys[:, 0] == keys[a, 0]) & (keys[:, 1] == keys[a, 1]) & (keys[:, 3] == keys[a, 3])
        )
        for b in np.nonzero(same)[0]:
            out[a, b] = blocks[keys[a, 0]].matrix[keys[a, 2], keys[b, 2]]
    return out


# ------------------------------------------------------------ rep system


class RepresentationSystem:
    """Irreducibles at every tower level plus the Bratteli diagram.

    Immutable after construction.
    """

    def __init__(self, tower: Tower):
        builder = _BUILDERS.get(type(tower.group))
        if builder is None:
            raise CapabilityError(f"no representation builder for {tower.group.family}")
        self.tower = tower
        self.levels = [builder(tower, i) for i in range(tower.num_levels + 1)]
        self.diagram = BratteliDiagram.from_irreps(self.levels)
        self._by_label = [{r.label: r for r in lvl} for lvl in self.levels]
        for lvl in self.levels:
            for rho in lvl:
                for k, mat in rho.images.items():
                    err = np.abs(mat @ mat.conj().T - np.eye(rho.dim)).max()
                    if err > BUILD_TOL:
                        raise ConstructionError(f"image of generator {k} in {rho.name} not unitary")
        self._cache: dict = {}

    @property
    def top(self) -> int:
        return self.tower.num_levels

    def irreps(self, level: int | None = None) -> list[AdaptedRep]:
        return self.levels[self.top if level is None else level]

    def rep(self, level: int, label: Label) -> AdaptedRep:
        return self._by_label[level][label]

    def letter_image(self, rho: AdaptedRep, letter) -> np.ndarray:
        idx, inv = letter
        try:
            mat = rho.images[idx]
        except KeyError:
            raise DomainError(f"generator {idx} not in level {rho.level}") from None
        return mat.conj().T if inv else mat

    def word_image(self, rho: AdaptedRep, word: Word) -> np.ndarray:
        out = np.eye(rho.dim, dtype=complex)
        for letter in word:
            out = out @ self.letter_image(rho, letter)
        return out

    def evaluate(self, rho: AdaptedRep, g: Element) -> np.ndarray:
        key = (rho.level, rho.label, g)
        hit = self._cache.get(key)
        if hit is None:
            if not self.tower.group.in_level(rho.level, g):
                raise DomainError(f"{self.tower.group.format(g)} not in level {rho.level}")
            hit = self.word_image(rho, self.tower.element_word(g, rho.level))
            self._cache[key] = hit
        return hit

    def branching(self, rho: AdaptedRep) -> list[tuple[Label, int, list[int]]]:
        if rho.level == 0:
            return []
        dims = dict(self.diagram.nodes[rho.level - 1])
        out: dict[Label, list[int]] = {}
        offset = 0
        for p in rho.parents:
            out.setdefault(p, []).append(offset)
            offset += dims[p]
        return [(lab, len(offs), offs) for lab, offs in out.items()]

    # ---- Fourier transform

    def elements(self, level: int | None = None) -> list[Element]:
        if level is None or level == self.top:
            return self.tower.group.elements()
        return sorted(self.tower.level_elements(level), key=repr)

    def row_offsets(self, level: int | None = None) -> dict[Label, int]:
        out, off = {}, 0
        for rho in self.irreps(level):
            out[rho.label] = off
            off += rho.dim**2
        return out

    def fourier_row(self, label: Label, j: int, k: int, level: int | None = None) -> int:
        lvl = self.top if level is None else level
        return self.row_offsets(lvl)[label] + j * self.rep(lvl, label).dim + k

    def dense_qft_matrix(self, level: int | None = None) -> np.ndarray:
        """``F[(rho,j,k), g] = sqrt(d_rho/|G|) rho(g)_{jk}``; rows by irreducible
        in node order then row-major ``(j, k)``; columns follow :meth:`elements`."""
        elems = self.elements(level)
        size = len(elems)
        out = np.zeros((size, size), dtype=complex)
        row = 0
        for rho in self.irreps(level):
            scale = np.sqrt(rho.dim / size)
            for col, g in enumerate(elems):
                out[row : row + rho.dim**2, col] = scale * self.evaluate(rho, g).reshape(-1)
            row += rho.dim**2
        if row != size:
            raise ConstructionError(f"sum of d^2 is {row}, group order {size}")
        return out

    def fourier(self, f: Mapping[Element, complex] | np.ndarray, level: int | None = None) -> dict:
        elems = self.elements(level)
        vals = _as_values(f, elems)
        out = {}
        for rho in self.irreps(level):
            acc = np.zeros((rho.dim, rho.dim), dtype=complex)
            for g, v in zip(elems, vals):
                if v != 0:
                    acc += v * self.evaluate(rho, g)
            out[rho.label] = np.sqrt(rho.dim / len(elems)) * acc
        return out

    def inverse_fourier(self, coeffs: Mapping[Label, np.ndarray], level: int | None = None) -> np.ndarray:
        """``f(s) = sum_rho sqrt(d/|G|) tr(rho(s)^dagger fhat(rho))``, aligned with :meth:`elements`."""
        elems = self.elements(level)
        out = np.zeros(len(elems), dtype=complex)
        for rho in self.irreps(level):
            fhat = coeffs[rho.label]
            scale = np.sqrt(rho.dim / len(elems))
            for n, g in enumerate(elems):
                out[n] += scale * np.vdot(self.evaluate(rho, g), fhat)
        return out

    # ---- Schur blocks

    def schur_blocks(
        self, rho: AdaptedRep, gen: Generator, k_level: int | None = None, tol: float = CHECK_TOL
    ) -> SchurCertificate:
        """Certify ``rho(gen)`` as ``⊕ (X ⊗ I_{d_eta})`` over pairs ``(eta, zeta)``
        of nodes at the centralized level and at the generator's level."""
        lg = gen.level
        if k_level is None:
            k_level = gen.centralized_level
        if k_level > gen.centralized_level:
            raise CertificationError(f"{gen.name} does not centralize level {k_level}")
        k_level = min(k_level, lg)
        if rho.level < lg:
            raise DomainError(f"{gen.name} not in level {rho.level}")
        mat = rho.images[gen.index]
        paths = self.diagram.rows[rho.level][rho.label]
        diag = self.diagram
        pair_ids: dict[tuple, int] = {}
        outer_ids: dict[tuple, int] = {}
        inner_ids: dict[tuple, int] = {}
        mids: list[dict[Path, int]] = []
        keys = []
        for path in paths:
            eta = diag.terminal(path[:k_level])
            zeta = diag.terminal(path[:lg])
            pid = pair_ids.setdefault((eta, zeta), len(pair_ids))
            if pid == len(mids):
                mids.append({})
            mid = mids[pid].setdefault(path[k_level:lg], len(mids[pid]))
            outer = outer_ids.setdefault((zeta, path[lg:]), len(outer_ids))
            inner = inner_ids.setdefault((eta, path[:k_level]), len(inner_ids))
            keys.append((pid, outer, mid, inner))
        blocks = []
        for (eta, zeta), pid in pair_ids.items():
            m = len(mids[pid])
            rows = {}
            ref_inner = ref_outer = None
            for r, (p, o, mid, inner) in enumerate(keys):
                if p != pid:
                    continue
                if ref_inner is None:
                    ref_inner, ref_outer = inner, o
                if inner == ref_inner and o == ref_outer:
                    rows[mid] = r
            idx = [rows[i] for i in range(m)]
            x = mat[np.ix_(idx, idx)]
            blocks.append(SchurBlock(eta, zeta, m, diag.dim(k_level, eta), np.array(x, dtype=complex)))
        cert = SchurCertificate(blocks, keys, 0.0)
        cert.residual = float(np.abs(cert.expected() - mat).max()) if len(paths) else 0.0
        if cert.residual > tol:
            raise CertificationError(
                f"{gen.name} in {rho.name}: off-block residual {cert.residual:.3e}"
            )
        return cert

    def multiplicity_paths(self, lo: int, eta: Label, hi: int, zeta: Label) -> int:
        """Number of diagram paths from ``eta`` at level ``lo`` to ``zeta`` at ``hi``."""
        counts = {eta: 1}
        for lvl in range(lo, hi):
            nxt: dict = {}
            for lab, c in counts.items():
                for child in self.diagram.children[lvl].get(lab, []):
                    nxt[child] = nxt.get(child, 0) + c
            counts = nxt
        return counts.get(zeta, 0)

    def generator_multiplicity(self, gen: Generator) -> int:
        lo = min(gen.centralized_level, gen.level)
        return max(
            (
                self.multiplicity_paths(lo, eta, gen.level, zeta)
                for eta in self.diagram.labels(lo)
                for zeta in self.diagram.labels(gen.level)
            ),
            default=1,
        )

    def max_multiplicity(self, exclude_levels=()) -> int:
        """Largest Schur block size ``M`` over generators whose levels are not
        in ``exclude_levels`` (levels realised without Schur-block twiddles)."""
        return max(
            (
                self.generator_multiplicity(s)
                for s in self.tower.generators
                if s.level not in set(exclude_levels)
            ),
            default=1,
        )

    def scale_factor(self, level: int, sigma: Label, rho: Label) -> float:
        """``A_{sigma,rho} = sqrt(|G_{i-1}|/|G_i| * d_rho/d_sigma)`` for the step into ``level``."""
        ratio = self.tower.level_order(level - 1) / self.tower.level_order(level)
        return float(np.sqrt(ratio * self.diagram.dim(level, rho) / self.diagram.dim(level - 1, sigma)))

    def scale_factor_table(self, level: int) -> dict[tuple[Label, int], float]:
        table = {}
        for sigma in self.diagram.labels(level - 1):
            for e, rho in enumerate(self.diagram.children[level - 1][sigma], start=1):
                table[(sigma, e)] = self.scale_factor(level, sigma, rho)
        return table


def _as_values(f, elems) -> np.ndarray:
    if isinstance(f, Mapping):
        return np.array([complex(f.get(g, 0)) for g in elems])
    arr = np.asarray(f, dtype=complex)
    if arr.shape != (len(elems),):
        raise DomainError(f"function has shape {arr.shape}, expected ({len(elems)},)")
    return arr


def build_reps(tower: Tower) -> RepresentationSystem:
    return RepresentationSystem(tower)


def orthogonality_residual(reps: RepresentationSystem, level: int | None = None) -> float:
    """Max deviation of ``<rho_ij, sigma_kl>`` from ``delta/d_rho`` over all matrix elements."""
    elems = reps.elements(level)
    cols = []
    dims = []
    for rho in reps.irreps(level):
        vals = np.stack([reps.evaluate(rho, g) for g in elems])
        cols.append(vals.reshape(len(elems), -1))
        dims.extend([rho.dim] * rho.dim**2)
    mat = np.concatenate(cols, axis=1)
    gram = mat.T @ mat.conj() / len(elems)
    return float(np.abs(gram - np.diag(1.0 / np.array(dims))).max())


def gelfand_tsetlin_residual(reps: RepresentationSystem) -> float:
    """Max deviation from block-diagonal restriction with equal blocks for
    equal parents, over every level and every element of the level below."""
    worst = 0.0
    for level in range(1, reps.top + 1):
        lower = reps.tower.level_elements(level - 1)
        for rho in reps.irreps(level):
            blocks = reps.branching(rho)
            for h in lower:
                mat = reps.evaluate(rho, h)
                expect = np.zeros_like(mat)
                for lab, _, offs in blocks:
                    sub = reps.evaluate(reps.rep(level - 1, lab), h)
                    d = sub.shape[0]
                    for off in offs:
                        expect[off : off + d, off : off + d] = sub
                worst = max(worst, float(np.abs(mat - expect).max()))
    return worst


def homomorphism_residual(reps: RepresentationSystem, pairs=None) -> float:
    elems = reps.elements()
    grp = reps.tower.group
    if pairs is None:
        pairs = itertools.product(elems, elems)
    worst = 0.0
    for g, h in pairs:
        gh = grp.mul(g, h)
        for rho in reps.irreps():
            diff = reps.evaluate(rho, gh) - reps.evaluate(rho, g) @ reps.evaluate(rho, h)
            worst = max(worst, float(np.abs(diff).max()))
    return worst
