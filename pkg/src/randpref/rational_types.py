"""Axiom-consistent choice types and the binary type matrix.

A type picks one patch on every budget. Its *below-digraph* has an edge
``u -> v`` whenever the patch picked on budget ``v`` lies below budget ``u``
(so the choice at ``u`` is directly revealed preferred to the one at ``v``).
WARP forbids 2-cycles in that digraph; SARP forbids every cycle.
"""

from __future__ import annotations

import io
import json
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .axioms import Axiom
from .budgets import Patch, PatchPartition, Side
from .errors import ColumnCapExceeded, ValidationError

DEFAULT_COLUMN_CAP = 2_000_000

_MAGIC = b"RPGM"
_VERSION = 1
_AXIOM_CODES = {None: 0, Axiom.WARP: 1, Axiom.SARP: 2, Axiom.WGARP: 3}
_CODE_AXIOMS = {v: k for k, v in _AXIOM_CODES.items()}


@dataclass(frozen=True)
class TypeMatrix:
    """Binary matrix with patches as rows and types as columns.

    Attributes
    ----------
    entries : ndarray of uint8, shape (d_rho, H)
    choices : ndarray of int, shape (H, T) or None
        Local patch index chosen on each budget, one row per column.
    axiom : Axiom or None
    row_keys : tuple of (period, sign label) or None
    block_sizes : tuple of int
        Number of rows belonging to each budget, in row order.
    """

    entries: np.ndarray
    choices: Optional[np.ndarray] = None
    axiom: Optional[Axiom] = None
    row_keys: Optional[Tuple[Tuple[int, str], ...]] = None
    block_sizes: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2:
            raise ValidationError(f"type matrix must be 2-D, got shape {e.shape}")
        if not np.all((e == 0) | (e == 1)):
            raise ValidationError("type matrix entries must be 0 or 1")
        object.__setattr__(self, "entries", e.astype(np.uint8))
        if not self.block_sizes:
            object.__setattr__(self, "block_sizes", tuple(infer_blocks(e)))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def d_rho(self) -> int:
        return self.entries.shape[0]

    @property
    def n_types(self) -> int:
        return self.entries.shape[1]

    def column_set(self) -> set:
        return {tuple(c) for c in self.entries.T.tolist()}

    def as_float(self) -> np.ndarray:
        return self.entries.astype(float)


def infer_blocks(entries) -> List[int]:
    """Split rows into consecutive blocks in which every column sums to one."""
    e = np.asarray(entries, dtype=np.int64)
    d, H = e.shape
    sizes = []
    start = 0
    acc = np.zeros(H, dtype=np.int64)
    for r in range(d):
        acc += e[r]
        if np.all(acc == 1):
            sizes.append(r + 1 - start)
            start = r + 1
            acc[:] = 0
        elif np.any(acc > 1):
            raise ValidationError(
                f"rows {start}..{r} do not form a block with one 1 per column"
            )
    if start != d:
        raise ValidationError("trailing rows do not form a complete budget block")
    return sizes


def pairwise_consistent(patch_a: Patch, patch_b: Patch) -> bool:
    """False iff each patch lies below the other's budget."""
    t, s = patch_a.owner_budget, patch_b.owner_budget
    if t == s:
        raise ValidationError("pairwise consistency needs patches of two budgets")
    return not (patch_b.side(t) is Side.BELOW and patch_a.side(s) is Side.BELOW)


def _has_cycle_through(below: List[List[int]], fixed: Sequence[int], start: int) -> bool:
    # below[u] lists v with edge u -> v among fixed periods.
    stack = [start]
    seen = set()
    while stack:
        u = stack.pop()
        for v in below[u]:
            if v == start:
                return True
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return False


def iter_types(partition: PatchPartition, axiom) -> Iterable[Tuple[int, ...]]:
    """Yield consistent choice tuples in lexicographic order."""
    axiom = Axiom.parse(axiom)
    if axiom is Axiom.WGARP:
        axiom = Axiom.WARP  # no ties on patch interiors, so the two coincide
    sides = partition.side_table()
    T = partition.n_budgets
    sizes = partition.block_sizes
    choice = [0] * T
    below: List[List[int]] = [[] for _ in range(T)]

    def rec(t: int):
        if t == T:
            yield tuple(choice)
            return
        for i in range(sizes[t]):
            row = sides[t][i]
            ok = True
            new_out, new_in = [], []
            for u in range(t):
                # u -> t iff patch at t is below budget u
                u_to_t = row[u] == Side.BELOW
                t_to_u = sides[u][choice[u], t] == Side.BELOW
                if u_to_t and t_to_u:
                    ok = False
                    break
                if u_to_t:
                    new_in.append(u)
                if t_to_u:
                    new_out.append(u)
            if not ok:
                continue
            choice[t] = i
            for u in new_in:
                below[u].append(t)
            below[t] = list(new_out)
            if axiom is Axiom.SARP and new_in and new_out:
                if _has_cycle_through(below, range(t + 1), t):
                    ok = False
            if ok:
                yield from rec(t + 1)
            for u in new_in:
                below[u].pop()
            below[t] = []

    yield from rec(0)


def enumerate_types(
    partition: PatchPartition,
    axiom,
    cap: int = DEFAULT_COLUMN_CAP,
    visitor: Optional[Callable[[Tuple[int, ...]], None]] = None,
) -> TypeMatrix:
    """Build the type matrix for WARP (RPM) or SARP (RUM).

    If ``visitor`` is given it is called on each choice tuple as it is
    produced and the dense matrix is still assembled; pass ``cap`` to bound
    memory in either case.
    """
    axiom = Axiom.parse(axiom)
    offsets = partition.offsets
    choices = []
    for c in iter_types(partition, axiom):
        if len(choices) >= cap:
            raise ColumnCapExceeded(cap, len(choices))
        if visitor is not None:
            visitor(c)
        choices.append(c)
    T = partition.n_budgets
    ch = np.array(choices, dtype=np.int64).reshape(len(choices), T)
    entries = np.zeros((partition.n_rows, len(choices)), dtype=np.uint8)
    cols = np.arange(len(choices))
    for t in range(T):
        entries[offsets[t] + ch[:, t], cols] = 1
    return TypeMatrix(
        entries=entries,
        choices=ch,
        axiom=axiom,
        row_keys=tuple(partition.row_keys()),
        block_sizes=tuple(partition.block_sizes),
    )


@dataclass(frozen=True)
class PairwiseTypeMatrix:
    """Types of a two-budget subproblem over aggregated patch groups.

    ``groups[k]`` holds the global row indices pooled into aggregated row
    ``k``; ``group_keys[k]`` is ``(owner, side relative to the other)``.
    """

    t: int
    s: int
    entries: np.ndarray
    groups: Tuple[Tuple[int, ...], ...]
    group_keys: Tuple[Tuple[int, str], ...]

    def aggregate(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return np.array([rho[list(g)].sum() for g in self.groups])

    @property
    def nested(self) -> bool:
        return self.entries.shape[1] == 1


def pairwise_type_matrix(partition: PatchPartition, t: int, s: int) -> PairwiseTypeMatrix:
    if t == s:
        raise ValidationError("pairwise type matrix needs two distinct budgets")
    groups = {}
    for owner, other in ((t, s), (s, t)):
        base = partition.offsets[owner]
        for p in partition.patches_by_budget[owner]:
            groups.setdefault((owner, p.side(other)), []).append(base + p.local_index)
    t_sides = [sd for sd in (Side.BELOW, Side.ABOVE) if (t, sd) in groups]
    s_sides = [sd for sd in (Side.BELOW, Side.ABOVE) if (s, sd) in groups]
    keys = [(t, sd) for sd in t_sides] + [(s, sd) for sd in s_sides]
    cols = [
        (a, b)
        for a in t_sides
        for b in s_sides
        if not (a is Side.BELOW and b is Side.BELOW)
    ]
    entries = np.zeros((len(keys), len(cols)), dtype=np.uint8)
    for j, (a, b) in enumerate(cols):
        entries[keys.index((t, a)), j] = 1
        entries[keys.index((s, b)), j] = 1
    return PairwiseTypeMatrix(
        t=t,
        s=s,
        entries=entries,
        groups=tuple(tuple(groups[k]) for k in keys),
        group_keys=tuple((o, sd.letter) for o, sd in keys),
    )


# ---------------------------------------------------------------- comparison


def canonical_form(gamma: Union[TypeMatrix, np.ndarray], row_keys=None) -> np.ndarray:
    """Rows sorted by key (or kept in order), columns sorted lexicographically."""
    e = np.asarray(getattr(gamma, "entries", gamma), dtype=np.uint8)
    keys = row_keys if row_keys is not None else getattr(gamma, "row_keys", None)
    if keys is not None:
        order = sorted(range(e.shape[0]), key=lambda r: keys[r])
        e = e[order]
    cols = sorted(range(e.shape[1]), key=lambda j: tuple(e[:, j]))
    return e[:, cols]


def equal_up_to_permutation(a, b) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Find row and column permutations mapping ``a`` onto ``b``.

    Returns ``(row_perm, col_perm)`` with ``a[row_perm][:, col_perm] == b``,
    or None if the matrices are not permutation-equivalent. Rows are matched
    by backtracking; a partial row map survives only if the multiset of
    column restrictions agrees on the rows mapped so far.
    """
    A = np.asarray(getattr(a, "entries", a), dtype=np.uint8)
    B = np.asarray(getattr(b, "entries", b), dtype=np.uint8)
    if A.shape != B.shape:
        return None
    d, H = A.shape
    if Counter(A.sum(1).tolist()) != Counter(B.sum(1).tolist()):
        return None
    a_rows = [tuple(r) for r in A.tolist()]
    b_rows = [tuple(r) for r in B.tolist()]
    mapping: List[int] = []  # mapping[k] = row of A placed at row k of B
    used = [False] * d

    def signature(rows_a: List[int], k: int) -> Tuple[Counter, Counter]:
        ca = Counter(zip(*[A[r] for r in rows_a])) if rows_a else Counter()
        cb = Counter(zip(*[B[r] for r in range(k)])) if k else Counter()
        return ca, cb

    def rec(k: int) -> bool:
        if k == d:
            return True
        target_sum = int(B[k].sum())
        for r in range(d):
            if used[r] or int(A[r].sum()) != target_sum:
                continue
            mapping.append(r)
            ca, cb = signature(mapping, k + 1)
            if ca == cb:
                used[r] = True
                if rec(k + 1):
                    return True
                used[r] = False
            mapping.pop()
        return False

    if not rec(0):
        return None
    row_perm = np.array(mapping)
    Ar = A[row_perm]
    remaining = {}
    for j in range(H):
        remaining.setdefault(tuple(Ar[:, j]), []).append(j)
    col_perm = np.array([remaining[tuple(B[:, j])].pop() for j in range(H)])
    return row_perm, col_perm


# -------------------------------------------------------------------- export


def _parse_dims(line: str) -> Tuple[int, int]:
    parts = [x.strip() for x in line.split(",")]
    if len(parts) != 2:
        raise ValidationError(f"expected 'd_rho,H' dimensions, got {line!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(f"dimensions must be integers, got {line!r}") from None


def write_gamma_csv(gamma, path_or_buf) -> None:
    """CSV: a ``d_rho,H`` dimension line followed by one 0/1 row per patch."""
    e = np.asarray(getattr(gamma, "entries", gamma), dtype=np.uint8)
    lines = [f"{e.shape[0]},{e.shape[1]}"]
    lines += [",".join(str(int(v)) for v in row) for row in e]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_gamma_csv(path_or_buf) -> TypeMatrix:
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, encoding="utf-8") as fh:
            text = fh.read()
    lines = [(n, ln.strip()) for n, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if lines and lines[0][1].replace(" ", "").lower() == "d_rho,h":
        lines = lines[1:]
    if not lines:
        raise ValidationError("type matrix file is empty")
    d, H = _parse_dims(lines[0][1])
    body = lines[1:]
    if len(body) != d:
        raise ValidationError(f"header announces {d} rows, file has {len(body)}")
    rows = []
    for n, ln in body:
        try:
            vals = [int(v) for v in ln.split(",")]
        except ValueError:
            raise ValidationError(f"line {n}: non-integer entry in {ln!r}") from None
        if len(vals) != H or any(v not in (0, 1) for v in vals):
            raise ValidationError(f"line {n}: expected {H} entries of 0/1")
        rows.append(vals)
    return TypeMatrix(np.array(rows, dtype=np.uint8).reshape(d, H))


def write_gamma_bitset(gamma: TypeMatrix, path_or_buf) -> None:
    """Binary layout (little endian).

    ``b"RPGM"``, uint8 version, uint8 axiom code, uint32 d_rho, uint64 H,
    uint32 key length, UTF-8 JSON list of row keys (``[period, label]``),
    then each column as ``ceil(d_rho / 8)`` bytes of big-endian packed bits.
    """
    e = np.asarray(gamma.entries, dtype=np.uint8)
    d, H = e.shape
    keys = json.dumps([list(k) for k in gamma.row_keys] if gamma.row_keys else None)
    kb = keys.encode("utf-8")
    head = _MAGIC + struct.pack(
        "<BBIQI", _VERSION, _AXIOM_CODES[gamma.axiom], d, H, len(kb)
    )
    payload = np.packbits(e.T, axis=1).tobytes()
    data = head + kb + payload
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(data)
    else:
        with open(path_or_buf, "wb") as fh:
            fh.write(data)


def read_gamma_bitset(path_or_buf) -> TypeMatrix:
    if hasattr(path_or_buf, "read"):
        data = path_or_buf.read()
    else:
        with open(path_or_buf, "rb") as fh:
            data = fh.read()
    if data[:4] != _MAGIC:
        raise ValidationError("not a type-matrix bitset file")
    version, code, d, H, klen = struct.unpack_from("<BBIQI", data, 4)
    if version != _VERSION:
        raise ValidationError(f"unsupported bitset version {version}")
    off = 4 + struct.calcsize("<BBIQI")
    keys = json.loads(data[off : off + klen].decode("utf-8"))
    off += klen
    nbytes = (d + 7) // 8
    packed = np.frombuffer(data, dtype=np.uint8, count=H * nbytes, offset=off)
    cols = np.unpackbits(packed.reshape(H, nbytes), axis=1, count=d)
    return TypeMatrix(
        entries=cols.T.copy(),
        axiom=_CODE_AXIOMS[code],
        row_keys=tuple((int(t), str(lbl)) for t, lbl in keys) if keys else None,
    )
