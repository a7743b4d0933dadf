"""Vilenkin characters, spectral transforms, Dirichlet kernels, partial sums.

Grid functions live on the rank-N cosets of G_m in little-endian coset
order (x_0 fastest), so index i <-> point with digits of i.  In that
layout the Paley-ordered character transform is a multidimensional DFT
over Z_{m_0} x ... x Z_{m_{N-1}} with no reindexing permutation: the fast
path is a staged mixed-radix FFT, the naive path is the literal
coefficient formula and serves as its oracle.

All complex arithmetic is 64-bit; the roots of unity for each radix come
from one cached table so repeated runs are bit-identical.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .group import (
    GeneratorSequence,
    GroupPoint,
    VIndex,
    decompose,
    digit_table,
    digits_of,
    index_sub,
)

# Resolutions are refused above this many cosets; the artifact is a
# desk-scale instrument, not a bulk FFT library.
SIZE_CAP = 1 << 20

_MAGIC = b"VGF1"


@lru_cache(maxsize=64)
def unit_roots(radix: int) -> np.ndarray:
    """exp(2 pi i u / m) for u = 0..m-1; the only root table in the package."""
    roots = np.exp(2j * np.pi * np.arange(radix) / radix)
    roots.setflags(write=False)
    return roots


@dataclass
class GridFunction:
    """Complex function on G_m constant on rank-N cosets.

    ``values[i]`` is the value on the coset with little-endian index i;
    the Haar integral is the plain mean of ``values``.
    """

    generators: GeneratorSequence
    resolution: int
    values: np.ndarray

    def __post_init__(self) -> None:
        size = self.generators.size(self.resolution)
        if size > SIZE_CAP:
            raise ValueError(f"M_N = {size} exceeds the size cap {SIZE_CAP}")
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (size,):
            raise ValueError(
                f"value vector has length {self.values.shape}, expected M_N = {size}"
            )

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def integral(self) -> complex:
        return complex(self.values.mean())

    def copy(self) -> "GridFunction":
        return GridFunction(self.generators, self.resolution, self.values.copy())

    def _like(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.generators, self.resolution, values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same(other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same(other)
        return self._like(self.values - other.values)

    def __rmul__(self, scalar: complex) -> "GridFunction":
        return self._like(scalar * self.values)

    def _check_same(self, other: "GridFunction") -> None:
        if (
            self.resolution != other.resolution
            or self.generators.radices(self.resolution) != other.generators.radices(other.resolution)
        ):
            raise ValueError("grid functions live on different grids")


@dataclass
class SpectralVector:
    """Vilenkin-Fourier coefficients f^(0..M_N-1) at resolution N."""

    generators: GeneratorSequence
    resolution: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        size = self.generators.size(self.resolution)
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (size,):
            raise ValueError(
                f"coefficient vector has length {self.coeffs.shape}, expected M_N = {size}"
            )

    @property
    def size(self) -> int:
        return self.coeffs.shape[0]


def grid_function(m: GeneratorSequence, resolution: int, values) -> GridFunction:
    return GridFunction(m, resolution, np.asarray(values, dtype=np.complex128))


def zero(m: GeneratorSequence, resolution: int) -> GridFunction:
    return GridFunction(m, resolution, np.zeros(m.size(resolution), dtype=np.complex128))


def constant(m: GeneratorSequence, resolution: int, value: complex = 1.0) -> GridFunction:
    return GridFunction(m, resolution, np.full(m.size(resolution), value, dtype=np.complex128))


def character(n: VIndex, x: GroupPoint) -> complex:
    """psi_n(x) = prod_k exp(2 pi i n_k x_k / m_k), evaluated pointwise."""
    if n.top >= x.resolution:
        raise ValueError("point resolution too small for the character index")
    out = complex(1.0)
    for k, nk in enumerate(n.digits):
        if nk:
            mk = x.generators.radix(k)
            out *= complex(unit_roots(mk)[(nk * x.coords[k]) % mk])
    return out


def character_block(m: GeneratorSequence, resolution: int, indices) -> np.ndarray:
    """Rows psi_n(x) over the full grid for each n in ``indices``."""
    idx = np.asarray(indices, dtype=np.int64)
    size = m.size(resolution)
    if idx.size and int(idx.max()) >= size:
        raise ValueError("character index not resolvable at this resolution")
    xdig = digit_table(m, resolution)
    ndig = digits_of(idx, m, resolution)
    out = np.ones((idx.shape[0], size), dtype=np.complex128)
    for k in range(resolution):
        col = ndig[:, k]
        if not col.any():
            continue
        mk = m.radix(k)
        out *= unit_roots(mk)[(col[:, None] * xdig[None, :, k]) % mk]
    return out


def character_values(m: GeneratorSequence, n: int, resolution: int) -> np.ndarray:
    """psi_n on the whole grid."""
    return character_block(m, resolution, np.asarray([n]))[0]


def _cube_shape(m: GeneratorSequence, resolution: int) -> tuple[int, ...]:
    # C-order axes are (x_{N-1}, ..., x_0) so that x_0 varies fastest.
    return tuple(reversed(m.radices(resolution)))


def forward(f: GridFunction) -> SpectralVector:
    """Fast transform: f^(n) = (1/M_N) sum_x f(x) conj(psi_n(x)).

    Staged per digit as a mixed-radix multidimensional FFT; Paley index
    order and little-endian coset order align, so no scrambling step.
    """
    if f.resolution == 0:
        return SpectralVector(f.generators, 0, f.values.copy())
    cube = f.values.reshape(_cube_shape(f.generators, f.resolution))
    coeffs = np.fft.fftn(cube).reshape(-1) / f.size
    return SpectralVector(f.generators, f.resolution, coeffs)


def inverse(sv: SpectralVector) -> GridFunction:
    """Fast synthesis: f(x) = sum_n f^(n) psi_n(x)."""
    if sv.resolution == 0:
        return GridFunction(sv.generators, 0, sv.coeffs.copy())
    cube = sv.coeffs.reshape(_cube_shape(sv.generators, sv.resolution))
    values = np.fft.ifftn(cube).reshape(-1) * sv.size
    return GridFunction(sv.generators, sv.resolution, values)


def forward_naive(f: GridFunction, block: int = 512) -> SpectralVector:
    """O(M_N^2) oracle: literal inner products against conjugate characters."""
    out = np.empty(f.size, dtype=np.complex128)
    for lo in range(0, f.size, block):
        hi = min(lo + block, f.size)
        rows = character_block(f.generators, f.resolution, np.arange(lo, hi))
        out[lo:hi] = rows.conj() @ f.values / f.size
    return SpectralVector(f.generators, f.resolution, out)


def inverse_naive(sv: SpectralVector, block: int = 512) -> GridFunction:
    out = np.zeros(sv.size, dtype=np.complex128)
    for lo in range(0, sv.size, block):
        hi = min(lo + block, sv.size)
        rows = character_block(sv.generators, sv.resolution, np.arange(lo, hi))
        out += sv.coeffs[lo:hi] @ rows
    return GridFunction(sv.generators, sv.resolution, out)


def _check_kernel_args(m: GeneratorSequence, n: int, resolution: int) -> int:
    size = m.size(resolution)
    if size > SIZE_CAP:
        raise ValueError(f"M_N = {size} exceeds the size cap {SIZE_CAP}")
    if not 1 <= n <= size:
        raise ValueError(f"Dirichlet kernel D_{n} is not resolvable at resolution {resolution}")
    return size


def dirichlet_direct(m: GeneratorSequence, n: int, resolution: int, block: int = 512) -> GridFunction:
    """D_n as the literal sum of the first n characters."""
    size = _check_kernel_args(m, n, resolution)
    acc = np.zeros(size, dtype=np.complex128)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        rows = character_block(m, resolution, np.arange(lo, hi))
        acc += rows.sum(axis=0)
    return GridFunction(m, resolution, acc)


def dirichlet_closed(m: GeneratorSequence, n: int, resolution: int) -> GridFunction:
    """D_n from the product formula

        D_n = psi_n * sum_j D_{M_j} sum_{u=m_j-n_j}^{m_j-1} r_j^u

    where D_{M_j} = M_j on I_j and 0 elsewhere, so each nonzero digit
    contributes one masked geometric block.
    """
    size = _check_kernel_args(m, n, resolution)
    if n == size:
        # Single digit at position N; on rank-N coset representatives the
        # formula collapses to M_N on I_N, 0 elsewhere.
        values = np.zeros(size, dtype=np.complex128)
        values[0] = size
        return GridFunction(m, resolution, values)
    idx = decompose(n, m)
    bases = m.scaled_bases(resolution)
    xdig = digit_table(m, resolution)
    grid = np.arange(size, dtype=np.int64)
    acc = np.zeros(size, dtype=np.complex128)
    for j, nj in enumerate(idx.digits):
        if nj == 0:
            continue
        mj = m.radix(j)
        roots = unit_roots(mj)
        geo = np.zeros(size, dtype=np.complex128)
        for u in range(mj - nj, mj):
            geo += roots[(u * xdig[:, j]) % mj]
        mask = (grid % bases[j]) == 0
        acc[mask] += bases[j] * geo[mask]
    return GridFunction(m, resolution, character_values(m, n, resolution) * acc)


def dirichlet_kernel_blocks(
    m: GeneratorSequence, resolution: int, limit: int, block: int = 256
):
    """Yield (n0, K) with K[i] = D_{n0+i+1}, by blocked direct summation.

    Cumulative sums run inside each block with a carried prefix, which
    keeps float error near the pairwise-summation level during exhaustive
    kernel scans.
    """
    size = m.size(resolution)
    if not 1 <= limit <= size:
        raise ValueError("kernel scan limit out of range")
    carry = np.zeros(size, dtype=np.complex128)
    for lo in range(0, limit, block):
        hi = min(lo + block, limit)
        rows = character_block(m, resolution, np.arange(lo, hi))
        kernels = carry + np.cumsum(rows, axis=0)
        carry = kernels[-1].copy()
        yield lo, kernels


def partial_sum(f: GridFunction, n: int) -> GridFunction:
    """S_n f by spectral truncation (the fast path)."""
    if not 0 <= n <= f.size:
        raise ValueError(f"partial sum order {n} out of range at resolution {f.resolution}")
    if n == 0:
        return zero(f.generators, f.resolution)
    coeffs = forward(f).coeffs.copy()
    coeffs[n:] = 0.0
    return inverse(SpectralVector(f.generators, f.resolution, coeffs))


def partial_sum_convolution(f: GridFunction, n: int) -> GridFunction:
    """S_n f = (f * D_n)(x) = int f(t) D_n(x - t) dmu(t), computed literally.

    Quadratic in M_N; it exists as the independent check on the spectral
    path, not as a production route.
    """
    if not 0 <= n <= f.size:
        raise ValueError(f"partial sum order {n} out of range at resolution {f.resolution}")
    if n == 0:
        return zero(f.generators, f.resolution)
    if f.size > 4096:
        raise ValueError("convolution path is restricted to M_N <= 4096")
    kernel = dirichlet_closed(f.generators, n, f.resolution).values
    grid = np.arange(f.size, dtype=np.int64)
    diff = index_sub(grid[:, None], grid[None, :], f.generators, f.resolution)
    values = (kernel[diff] @ f.values) / f.size
    return GridFunction(f.generators, f.resolution, values)


def conditional_expectation(f: GridFunction, rank: int) -> GridFunction:
    """S_{M_k} f: the average of f over each rank-k coset."""
    if not 0 <= rank <= f.resolution:
        raise ValueError("conditional expectation rank out of range")
    m_rank = f.generators.base(rank)
    means = f.values.reshape(-1, m_rank).mean(axis=0)
    return GridFunction(f.generators, f.resolution, np.tile(means, f.size // m_rank))


def coarse_sums(f: GridFunction) -> np.ndarray:
    """Stack of the martingale levels S_{M_0}f .. S_{M_N}f, shape (N+1, M_N)."""
    out = np.empty((f.resolution + 1, f.size), dtype=np.complex128)
    for k in range(f.resolution + 1):
        out[k] = conditional_expectation(f, k).values
    return out


def dirichlet_average(m: GeneratorSequence, n: int, rank: int, resolution: int) -> GridFunction:
    """x -> int_{I_rank} |D_n(x - t)| dmu(t) on the rank-N grid."""
    size = _check_kernel_args(m, n, resolution)
    if not 0 <= rank <= resolution:
        raise ValueError("averaging rank out of range")
    kernel = np.abs(dirichlet_closed(m, n, resolution).values)
    m_rank = m.base(rank)
    t_idx = np.arange(size // m_rank, dtype=np.int64) * m_rank
    grid = np.arange(size, dtype=np.int64)
    diff = index_sub(grid[:, None], t_idx[None, :], m, resolution)
    values = kernel[diff].mean(axis=1) / m_rank
    return GridFunction(m, resolution, values.astype(np.complex128))


# ---------------------------------------------------------------------------
# serialization: CSV (index, re, im) and a compact binary form
# ---------------------------------------------------------------------------


def _write_rows(out: io.TextIOBase, m: GeneratorSequence, resolution: int, kind: str, data: np.ndarray) -> None:
    out.write(f"# vilenkin {kind} v1\n")
    out.write(f"# m={m.format()}\n")
    out.write(f"# N={resolution}\n")
    out.write("index,re,im\n")
    for i, z in enumerate(data):
        out.write(f"{i},{z.real:.12g},{z.imag:.12g}\n")


def write_grid_csv(out: io.TextIOBase, f: GridFunction) -> None:
    _write_rows(out, f.generators, f.resolution, "grid", f.values)


def write_spectral_csv(out: io.TextIOBase, sv: SpectralVector) -> None:
    _write_rows(out, sv.generators, sv.resolution, "spectral", sv.coeffs)


def _read_rows(src: io.TextIOBase) -> tuple[GeneratorSequence, int, str, np.ndarray]:
    header = src.readline().strip()
    if not header.startswith("# vilenkin "):
        raise ValueError("not a vilenkin CSV file")
    kind = header.split()[2]
    m = GeneratorSequence.parse(src.readline().strip().removeprefix("# m="))
    resolution = int(src.readline().strip().removeprefix("# N="))
    src.readline()  # column header
    data = np.zeros(m.size(resolution), dtype=np.complex128)
    for line in src:
        line = line.strip()
        if not line:
            continue
        i_str, re_str, im_str = line.split(",")
        data[int(i_str)] = complex(float(re_str), float(im_str))
    return m, resolution, kind, data


def read_grid_csv(src: io.TextIOBase) -> GridFunction:
    m, resolution, kind, data = _read_rows(src)
    if kind != "grid":
        raise ValueError(f"expected a grid CSV, found kind {kind!r}")
    return GridFunction(m, resolution, data)


def read_spectral_csv(src: io.TextIOBase) -> SpectralVector:
    m, resolution, kind, data = _read_rows(src)
    if kind != "spectral":
        raise ValueError(f"expected a spectral CSV, found kind {kind!r}")
    return SpectralVector(m, resolution, data)


def _write_binary(out: io.BufferedIOBase, m: GeneratorSequence, resolution: int, kind: int, data: np.ndarray) -> None:
    mstr = m.format().encode()
    out.write(_MAGIC)
    out.write(struct.pack("<BIH", kind, resolution, len(mstr)))
    out.write(mstr)
    out.write(np.ascontiguousarray(data, dtype="<c16").tobytes())


def _read_binary(src: io.BufferedIOBase) -> tuple[GeneratorSequence, int, int, np.ndarray]:
    if src.read(4) != _MAGIC:
        raise ValueError("not a vilenkin binary file")
    kind, resolution, mlen = struct.unpack("<BIH", src.read(7))
    m = GeneratorSequence.parse(src.read(mlen).decode())
    data = np.frombuffer(src.read(), dtype="<c16").astype(np.complex128)
    if data.shape[0] != m.size(resolution):
        raise ValueError("binary payload length does not match the header")
    return m, resolution, kind, data


def write_grid_binary(out: io.BufferedIOBase, f: GridFunction) -> None:
    _write_binary(out, f.generators, f.resolution, 0, f.values)


def write_spectral_binary(out: io.BufferedIOBase, sv: SpectralVector) -> None:
    _write_binary(out, sv.generators, sv.resolution, 1, sv.coeffs)


def read_grid_binary(src: io.BufferedIOBase) -> GridFunction:
    m, resolution, kind, data = _read_binary(src)
    if kind != 0:
        raise ValueError("expected a grid binary file")
    return GridFunction(m, resolution, data)


def read_spectral_binary(src: io.BufferedIOBase) -> SpectralVector:
    m, resolution, kind, data = _read_binary(src)
    if kind != 1:
        raise ValueError("expected a spectral binary file")
    return SpectralVector(m, resolution, data)
