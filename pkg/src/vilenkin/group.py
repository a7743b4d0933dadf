"""Mixed-radix arithmetic for the Vilenkin group and its index set.

Everything in this module is exact integer arithmetic: the generalized
number system M_0 = 1, M_{k+1} = m_k * M_k, digit expansions with their
statistics (top, bottom, rho and the variation counts), and the
coordinatewise modular group law.  All values are immutable; functions
are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Scaled bases are kept inside the signed 64-bit range so that index
# arrays stay plain int64 end to end.
_INT64_MAX = 2**63 - 1


class BaseOverflowError(OverflowError):
    """A scaled base M_k left the 64-bit integer range."""


@dataclass(frozen=True)
class GeneratorSequence:
    """Bounded sequence of radices m = (m_0, m_1, ...), every m_k >= 2.

    Only a finite pattern is stored; it extends to an unbounded sequence
    either cyclically (``cyclic=True``, text form ``"2,3^"``) or by
    repeating the last entry (text form ``"2,3,4"``).  ``"2^"`` is the
    constant-2 Walsh-Paley case.
    """

    pattern: tuple[int, ...]
    cyclic: bool = False

    def __post_init__(self) -> None:
        if not self.pattern:
            raise ValueError("generator sequence needs at least one radix")
        for k, mk in enumerate(self.pattern):
            if mk < 2:
                raise ValueError(f"radix m_{k} = {mk}, but every radix must be >= 2")

    @classmethod
    def parse(cls, text: str) -> "GeneratorSequence":
        """Parse the compact text form used by CLI flags and config files."""
        body = text.strip()
        cyclic = body.endswith("^")
        if cyclic:
            body = body[:-1]
        if not body:
            raise ValueError(f"cannot parse generator sequence {text!r}")
        try:
            pattern = tuple(int(tok) for tok in body.split(","))
        except ValueError:
            raise ValueError(f"cannot parse generator sequence {text!r}") from None
        return cls(pattern, cyclic=cyclic)

    def format(self) -> str:
        """Inverse of :meth:`parse`; used when embedding configs in output files."""
        return ",".join(str(mk) for mk in self.pattern) + ("^" if self.cyclic else "")

    def radix(self, k: int) -> int:
        """m_k for any k >= 0."""
        if k < len(self.pattern):
            return self.pattern[k]
        if self.cyclic:
            return self.pattern[k % len(self.pattern)]
        return self.pattern[-1]

    def radices(self, count: int) -> tuple[int, ...]:
        return tuple(self.radix(k) for k in range(count))

    @property
    def max_radix(self) -> int:
        """lambda = sup_k m_k; finite because the tail repeats the pattern."""
        return max(self.pattern)

    def scaled_bases(self, resolution: int) -> list[int]:
        """M_0..M_N with M_0 = 1 and M_{k+1} = m_k * M_k, overflow-checked."""
        if resolution < 0:
            raise ValueError("resolution must be nonnegative")
        bases = [1]
        for k in range(resolution):
            nxt = bases[-1] * self.radix(k)
            if nxt > _INT64_MAX:
                raise BaseOverflowError(
                    f"M_{k + 1} exceeds the 64-bit integer width for m={self.format()}"
                )
            bases.append(nxt)
        return bases

    def base(self, k: int) -> int:
        """M_k."""
        return self.scaled_bases(k)[-1]

    def size(self, resolution: int) -> int:
        """Number of rank-N cosets, M_N."""
        return self.base(resolution)


WALSH = GeneratorSequence((2,), cyclic=True)


@dataclass(frozen=True)
class VIndex:
    """A positive integer together with its mixed-radix digit expansion.

    ``digits`` is little-endian and trimmed to length ``top + 1``.
    ``top`` is |n| (highest nonzero digit position), ``bottom`` is <n>
    (lowest nonzero position).
    """

    value: int
    digits: tuple[int, ...]
    top: int
    bottom: int

    @property
    def rho(self) -> int:
        """rho(n) = |n| - <n>, the digit-spread divergence gauge."""
        return self.top - self.bottom

    def digit(self, j: int) -> int:
        return self.digits[j] if j <= self.top else 0


def decompose(n: int, m: GeneratorSequence) -> VIndex:
    """Digit expansion of n >= 1 with its statistics.

    n = 0 has no highest/lowest nonzero digit, so it is rejected; callers
    treat S_0 f = 0 as a separate trivial case.
    """
    if n < 1:
        raise ValueError("digit statistics are undefined for n = 0")
    if n > _INT64_MAX:
        raise BaseOverflowError("index exceeds the 64-bit integer width")
    digits: list[int] = []
    rest = n
    k = 0
    while rest:
        mk = m.radix(k)
        digits.append(rest % mk)
        rest //= mk
        k += 1
    top = len(digits) - 1
    bottom = next(j for j, d in enumerate(digits) if d)
    return VIndex(value=n, digits=tuple(digits), top=top, bottom=bottom)


def compose(digits: tuple[int, ...] | list[int], m: GeneratorSequence) -> int:
    """Reconstruct n = sum_j n_j M_j from little-endian digits."""
    bases = m.scaled_bases(len(digits))
    for j, d in enumerate(digits):
        if not 0 <= d < m.radix(j):
            raise ValueError(f"digit {d} out of range for radix m_{j} = {m.radix(j)}")
    return sum(d * bases[j] for j, d in enumerate(digits))


def variation(n: VIndex, m: GeneratorSequence, convention: str = "from1") -> tuple[int, int]:
    """Variation counts (v, v*) controlling the Lebesgue constant bracket.

    With delta_j = sign(n_j) and delta*_j = |(-n_j mod m_j) - 1| * delta_j:

        v  = sum_j |delta_{j+1} - delta_j| + delta_0
        v* = sum_j delta*_j

    ``convention`` selects whether the sums start at j = 1 (the printed
    form) or at j = 0; the discrepancy is decided empirically by the
    exact-Lebesgue-constant oracle, so both stay available.
    """
    if convention not in ("from0", "from1"):
        raise ValueError(f"unknown variation convention {convention!r}")
    start = 0 if convention == "from0" else 1

    def delta(j: int) -> int:
        return 1 if n.digit(j) else 0

    v = delta(0)
    for j in range(start, n.top + 1):
        v += abs(delta(j + 1) - delta(j))
    v_star = 0
    for j in range(start, n.top + 1):
        dj = n.digit(j)
        if dj:
            # |(-n_j mod m_j) - 1| = m_j - n_j - 1 for 1 <= n_j < m_j
            v_star += m.radix(j) - dj - 1
    return v, v_star


@dataclass(frozen=True)
class GroupPoint:
    """Element of G_m truncated to a finite resolution: coords x_k in Z_{m_k}."""

    coords: tuple[int, ...]
    generators: GeneratorSequence

    def __post_init__(self) -> None:
        for k, xk in enumerate(self.coords):
            if not 0 <= xk < self.generators.radix(k):
                raise ValueError(
                    f"coordinate x_{k} = {xk} out of range for radix {self.generators.radix(k)}"
                )

    @property
    def resolution(self) -> int:
        return len(self.coords)


def _check_compatible(x: GroupPoint, y: GroupPoint) -> None:
    if x.resolution != y.resolution:
        raise ValueError("group points have mismatched resolutions")
    if x.generators.radices(x.resolution) != y.generators.radices(y.resolution):
        raise ValueError("group points have mismatched radices")


def group_add(x: GroupPoint, y: GroupPoint) -> GroupPoint:
    """Coordinatewise sum modulo the radices."""
    _check_compatible(x, y)
    coords = tuple(
        (a + b) % x.generators.radix(k) for k, (a, b) in enumerate(zip(x.coords, y.coords))
    )
    return GroupPoint(coords, x.generators)


def group_sub(x: GroupPoint, y: GroupPoint) -> GroupPoint:
    """Coordinatewise difference modulo the radices (inverse of group_add)."""
    _check_compatible(x, y)
    coords = tuple(
        (a - b) % x.generators.radix(k) for k, (a, b) in enumerate(zip(x.coords, y.coords))
    )
    return GroupPoint(coords, x.generators)


def point_to_index(x: GroupPoint) -> int:
    """Little-endian mixed-radix place value: the coset enumeration order."""
    bases = x.generators.scaled_bases(x.resolution)
    return sum(xk * bases[k] for k, xk in enumerate(x.coords))


def index_to_point(i: int, m: GeneratorSequence, resolution: int) -> GroupPoint:
    if not 0 <= i < m.size(resolution):
        raise ValueError(f"coset index {i} out of range at resolution {resolution}")
    coords = []
    rest = i
    for k in range(resolution):
        mk = m.radix(k)
        coords.append(rest % mk)
        rest //= mk
    return GroupPoint(tuple(coords), m)


@lru_cache(maxsize=16)
def _digit_table(pattern: tuple[int, ...], cyclic: bool, resolution: int) -> np.ndarray:
    m = GeneratorSequence(pattern, cyclic)
    bases = np.asarray(m.scaled_bases(resolution), dtype=np.int64)
    radices = np.asarray(m.radices(resolution), dtype=np.int64)
    idx = np.arange(bases[-1], dtype=np.int64)
    table = (idx[:, None] // bases[None, :-1]) % radices[None, :]
    table.setflags(write=False)
    return table


def digit_table(m: GeneratorSequence, resolution: int) -> np.ndarray:
    """(M_N, N) int64 array; row i holds the digits of i, x_0 first.

    This single table backs coset enumeration for transforms, kernels and
    I/O, so every component sees the same ordering.
    """
    return _digit_table(m.pattern, m.cyclic, resolution)


def digits_of(indices: np.ndarray, m: GeneratorSequence, resolution: int) -> np.ndarray:
    """Vectorized digit expansion (no statistics) for an int64 index array."""
    idx = np.asarray(indices, dtype=np.int64)
    bases = np.asarray(m.scaled_bases(resolution), dtype=np.int64)
    radices = np.asarray(m.radices(resolution), dtype=np.int64)
    return (idx[..., None] // bases[:-1]) % radices


def index_add(i, j, m: GeneratorSequence, resolution: int) -> np.ndarray:
    """Group law on coset indices, broadcasting over array arguments."""
    di = digits_of(np.asarray(i), m, resolution)
    dj = digits_of(np.asarray(j), m, resolution)
    radices = np.asarray(m.radices(resolution), dtype=np.int64)
    bases = np.asarray(m.scaled_bases(resolution), dtype=np.int64)
    return ((di + dj) % radices) @ bases[:-1]


def index_sub(i, j, m: GeneratorSequence, resolution: int) -> np.ndarray:
    di = digits_of(np.asarray(i), m, resolution)
    dj = digits_of(np.asarray(j), m, resolution)
    radices = np.asarray(m.radices(resolution), dtype=np.int64)
    bases = np.asarray(m.scaled_bases(resolution), dtype=np.int64)
    return ((di - dj) % radices) @ bases[:-1]


def coset_mask(m: GeneratorSequence, resolution: int, rank: int, base_index: int = 0) -> np.ndarray:
    """Boolean grid mask of I_rank(x0): indices congruent to x0 mod M_rank."""
    if not 0 <= rank <= resolution:
        raise ValueError("coset rank out of range")
    m_rank = m.base(rank)
    idx = np.arange(m.size(resolution), dtype=np.int64)
    return (idx % m_rank) == (base_index % m_rank)
