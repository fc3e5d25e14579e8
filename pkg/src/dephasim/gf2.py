"""Bit-exact GF(2) linear algebra and Pauli-string bookkeeping.

Values are immutable and int-backed: bit i of the backing integer is bit i
of the BitString (least index first, addressing qubit i). Byte packing puts
bit i at byte i // 8, bit position i % 8; this little-endian-within-byte
layout is the normative encoding for every hex, file, and wire format in
the repository.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "BitString",
    "Gf2Matrix",
    "PauliString",
    "RngFault",
    "sample_invertible",
    "mat_vec_mul",
    "pauli_multiply",
    "cnot_synthesis",
    "cnot_count",
]


class RngFault(RuntimeError):
    """Rejection sampling exhausted its retry guard; the RNG is suspect."""


@dataclass(frozen=True)
class BitString:
    """Fixed-length bit vector over GF(2). Bit i addresses qubit i."""

    n: int
    value: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("bit length must be >= 0")
        if not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value out of range for {self.n} bits")

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        value = 0
        n = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError("bits must be 0 or 1")
            value |= b << i
            n = i + 1
        return cls(n, value)

    @classmethod
    def from_str(cls, s: str) -> "BitString":
        return cls.from_bits(int(c) for c in s)

    @classmethod
    def from_bytes(cls, n: int, data: bytes) -> "BitString":
        if len(data) != (n + 7) // 8:
            raise ValueError(f"expected {(n + 7) // 8} bytes for {n} bits, got {len(data)}")
        value = int.from_bytes(data, "little")
        if value >> n:
            raise ValueError("nonzero padding bits")
        return cls(n, value)

    @classmethod
    def from_hex(cls, n: int, s: str) -> "BitString":
        return cls.from_bytes(n, bytes.fromhex(s))

    @classmethod
    def random(cls, n: int, rng) -> "BitString":
        if n == 0:
            return cls(0, 0)
        raw = int.from_bytes(rng.bytes((n + 7) // 8), "little")
        return cls(n, raw & ((1 << n) - 1))

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"bit index {i} out of range for length {self.n}")
        return (self.value >> i) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> i) & 1 for i in range(self.n))

    def weight(self) -> int:
        return self.value.bit_count()

    def inner(self, other: "BitString") -> int:
        """GF(2) inner product."""
        self._check_len(other)
        return (self.value & other.value).bit_count() & 1

    def concat(self, other: "BitString") -> "BitString":
        return BitString(self.n + other.n, self.value | (other.value << self.n))

    def take(self, m: int) -> "BitString":
        """First m bits (lowest indices)."""
        if not 0 <= m <= self.n:
            raise ValueError("take length out of range")
        return BitString(m, self.value & ((1 << m) - 1))

    def drop(self, m: int) -> "BitString":
        """All bits after the first m."""
        if not 0 <= m <= self.n:
            raise ValueError("drop length out of range")
        return BitString(self.n - m, self.value >> m)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes((self.n + 7) // 8, "little")

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def is_zero(self) -> bool:
        return self.value == 0

    def _check_len(self, other: "BitString") -> None:
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")

    def __xor__(self, other: "BitString") -> "BitString":
        self._check_len(other)
        return BitString(self.n, self.value ^ other.value)

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits())

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits())

    def __repr__(self) -> str:
        return f"BitString('{self}')" if self.n else "BitString('')"


@dataclass(frozen=True)
class Gf2Matrix:
    """Binary matrix; row i is stored as an int with bit j = entry (i, j)."""

    rows: int
    cols: int
    row_bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be >= 0")
        if len(self.row_bits) != self.rows:
            raise ValueError("row count mismatch")
        limit = 1 << self.cols
        if any(not 0 <= r < limit for r in self.row_bits):
            raise ValueError("row entries out of range")

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_entries(cls, entries: Iterable[Iterable[int]]) -> "Gf2Matrix":
        rows = []
        cols = None
        for row in entries:
            row = list(row)
            if cols is None:
                cols = len(row)
            elif len(row) != cols:
                raise ValueError("ragged rows")
            if any(b not in (0, 1) for b in row):
                raise ValueError("entries must be 0 or 1")
            rows.append(sum(b << j for j, b in enumerate(row)))
        return cls(len(rows), cols or 0, tuple(rows))

    def entry(self, i: int, j: int) -> int:
        return (self.row_bits[i] >> j) & 1

    def entries(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple((r >> j) & 1 for j in range(self.cols)) for r in self.row_bits)

    def row(self, i: int) -> BitString:
        return BitString(self.cols, self.row_bits[i])

    def mat_vec(self, x: BitString) -> BitString:
        return mat_vec_mul(self, x)

    def matmul(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        out = []
        for r in self.row_bits:
            acc = 0
            j = 0
            while r:
                if r & 1:
                    acc ^= other.row_bits[j]
                r >>= 1
                j += 1
            out.append(acc)
        return Gf2Matrix(self.rows, other.cols, tuple(out))

    def rank(self) -> int:
        pivots: dict[int, int] = {}
        rank = 0
        for r in self.row_bits:
            while r:
                p = r.bit_length() - 1
                q = pivots.get(p)
                if q is None:
                    pivots[p] = r
                    rank += 1
                    break
                r ^= q
        return rank

    def is_invertible(self) -> bool:
        return self.rows == self.cols and _rows_full_rank(self.row_bits, self.rows)

    def inverse(self) -> "Gf2Matrix":
        if self.rows != self.cols:
            raise ValueError("only square matrices can be inverted")
        n = self.rows
        aug = [self.row_bits[i] | (1 << (n + i)) for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if (aug[r] >> col) & 1), None)
            if piv is None:
                raise ValueError("matrix is singular")
            aug[col], aug[piv] = aug[piv], aug[col]
            for r in range(n):
                if r != col and (aug[r] >> col) & 1:
                    aug[r] ^= aug[col]
        return Gf2Matrix(n, n, tuple(row >> n for row in aug))

    def __str__(self) -> str:
        return "\n".join("".join(str(self.entry(i, j)) for j in range(self.cols)) for i in range(self.rows))


@dataclass(frozen=True)
class PauliString:
    """n-qubit Pauli operator i^phase_exp * prod_i X^{x_i} Z^{z_i}."""

    x_part: BitString
    z_part: BitString
    phase_exp: int = 0

    def __post_init__(self) -> None:
        if self.x_part.n != self.z_part.n:
            raise ValueError("x and z parts must have equal length")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(BitString.zeros(n), BitString.zeros(n))

    @classmethod
    def from_x(cls, bits: BitString) -> "PauliString":
        return cls(bits, BitString.zeros(bits.n))

    @classmethod
    def from_z(cls, bits: BitString) -> "PauliString":
        return cls(BitString.zeros(bits.n), bits)

    @property
    def n(self) -> int:
        return self.x_part.n

    def is_identity(self) -> bool:
        """True iff both parts vanish; the global phase is ignored."""
        return self.x_part.is_zero() and self.z_part.is_zero()

    def __str__(self) -> str:
        letters = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        body = "".join(letters[(self.x_part.bit(i), self.z_part.bit(i))] for i in range(self.n))
        prefix = {0: "", 1: "i*", 2: "-", 3: "-i*"}[self.phase_exp]
        return prefix + body


def _rows_full_rank(rows: tuple[int, ...], n: int) -> bool:
    pivots = [0] * n
    for r in rows:
        while r:
            p = r.bit_length() - 1
            q = pivots[p]
            if not q:
                pivots[p] = r
                break
            r ^= q
        if not r:
            return False
    return True


def sample_invertible(n: int, rng, max_rejections: int = 1000) -> Gf2Matrix:
    """Uniformly random invertible n x n GF(2) matrix.

    Rejection sampling: draw uniform entries, accept iff full rank. The
    acceptance probability prod_{i=1..n}(1 - 2^-i) exceeds 0.288, so the
    guard of 1000 rejections is unreachable for a healthy generator.
    """
    if n < 1:
        raise ValueError("matrix size must be >= 1")
    nbytes = (n + 7) // 8
    step = 8 * nbytes
    mask = (1 << n) - 1
    # draw several attempts per generator call; acceptance is ~0.29 so a
    # batch of four almost always contains a full-rank draw
    batch = 4
    rejected = 0
    while rejected < max_rejections:
        big = int.from_bytes(rng.bytes(batch * n * nbytes), "little")
        for a in range(batch):
            base = a * n * step
            rows = tuple((big >> (base + i * step)) & mask for i in range(n))
            if _rows_full_rank(rows, n):
                return Gf2Matrix(n, n, rows)
            rejected += 1
            if rejected >= max_rejections:
                break
    raise RngFault(f"no invertible {n}x{n} matrix after {max_rejections} attempts")


def mat_vec_mul(m: Gf2Matrix, x: BitString) -> BitString:
    """Matrix-vector product over GF(2)."""
    if m.cols != x.n:
        raise ValueError(f"dimension mismatch: {m.rows}x{m.cols} matrix, length-{x.n} vector")
    v = x.value
    out = 0
    for i, row in enumerate(m.row_bits):
        out |= ((row & v).bit_count() & 1) << i
    return BitString(m.rows, out)


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product a * b in canonical X-before-Z form.

    Commuting b's X block past a's Z block picks up (-1) per overlapping
    position, i.e. phase_exp grows by 2 * |{i : a.z_i = b.x_i = 1}|.
    """
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    phase = (a.phase_exp + b.phase_exp + 2 * (a.z_part.value & b.x_part.value).bit_count()) % 4
    return PauliString(a.x_part ^ b.x_part, a.z_part ^ b.z_part, phase)


def cnot_synthesis(m: Gf2Matrix) -> tuple[tuple[int, int], ...]:
    """Row-addition sequence building m from the identity.

    Each (target, source) op is row_target ^= row_source, the classical
    shadow of CNOT(control=source, target=target) on a computational-basis
    map |z> -> |Mz>. Length is at most rows^2.
    """
    return tuple(reversed(_reduction_ops(m)))


def cnot_count(m: Gf2Matrix) -> int:
    """Number of row-addition ops in the synthesis of m (count only)."""
    if m.rows != m.cols:
        raise ValueError("synthesis requires a square matrix")
    n = m.rows
    work = list(m.row_bits)
    count = 0
    for col in range(n):
        bit = 1 << col
        if not work[col] & bit:
            src = next((r for r in range(col + 1, n) if work[r] & bit), None)
            if src is None:
                raise ValueError("matrix is singular")
            work[col] ^= work[src]
            count += 1
        pivot = work[col]
        for r in range(col + 1, n):
            if work[r] & bit:
                work[r] ^= pivot
                count += 1
    for col in range(n - 1, 0, -1):
        bit = 1 << col
        pivot = work[col]
        for r in range(col):
            if work[r] & bit:
                work[r] ^= pivot
                count += 1
    return count


def _reduction_ops(m: Gf2Matrix) -> list[tuple[int, int]]:
    """Row ops (target, source) reducing m to the identity; swap-free."""
    if m.rows != m.cols:
        raise ValueError("synthesis requires a square matrix")
    n = m.rows
    work = list(m.row_bits)
    ops: list[tuple[int, int]] = []
    for col in range(n):
        if not (work[col] >> col) & 1:
            src = next((r for r in range(col + 1, n) if (work[r] >> col) & 1), None)
            if src is None:
                raise ValueError("matrix is singular")
            work[col] ^= work[src]
            ops.append((col, src))
        for r in range(col + 1, n):
            if (work[r] >> col) & 1:
                work[r] ^= work[col]
                ops.append((r, col))
    for col in range(n - 1, 0, -1):
        for r in range(col):
            if (work[r] >> col) & 1:
                work[r] ^= work[col]
                ops.append((r, col))
    return ops
