"""p-atoms, the atomic validator, and the counterexample martingale.

The counterexample family is built from kernel-difference atoms

    a_k = (M_{|a_k|}^{1/p-1} / lambda) (D_{M_{|a_k|+1}} - D_{M_{|a_k|}})

scaled by coefficients lambda_k; its spectral profile is constant on the
digit blocks [M_{|a_k|}, M_{|a_k|+1}) and zero elsewhere, which gives a
closed form for every partial sum.  Divergence and modulus experiments
all draw their hard cases from here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .group import GeneratorSequence, GroupPoint, VIndex, coset_mask, decompose, index_to_point
from .transform import (
    GridFunction,
    character_values,
    dirichlet_closed,
    grid_function,
    zero,
)

# Validator tolerances: the mean condition is absolute, the sup bound is
# relative to mu(I)^{-1/p}; support must vanish exactly.
ATOM_MEAN_TOL = 1e-9
ATOM_BOUND_TOL = 1e-9


class AtomViolationError(ValueError):
    """Raised by the validator; ``failures`` names the broken conditions."""

    def __init__(self, failures: list[str], detail: str):
        super().__init__(f"not a p-atom ({', '.join(failures)}): {detail}")
        self.failures = failures


@dataclass
class PAtom:
    """A checked p-atom: mean zero on I, sup bound mu(I)^{-1/p}, support in I."""

    p: float
    support_rank: int
    base_point: GroupPoint
    values: GridFunction


def validate_atom(
    a: GridFunction, p: float, support_rank: int, base_index: int = 0
) -> PAtom:
    """Check the three atom conditions on I = I_rank(x0); raise naming failures."""
    if not 0 < p <= 1:
        raise ValueError(f"atom exponent p = {p} must lie in (0, 1]")
    mask = coset_mask(a.generators, a.resolution, support_rank, base_index)
    m_rank = a.generators.base(support_rank)
    failures = []
    details = []

    mean = a.values[mask].mean()  # = M_rank * int_I a dmu
    if abs(mean) / m_rank > ATOM_MEAN_TOL:
        failures.append("mean")
        details.append(f"int_I a = {mean / m_rank:.3e}")

    bound = m_rank ** (1.0 / p)
    sup = np.abs(a.values).max() if a.size else 0.0
    if sup > bound * (1.0 + ATOM_BOUND_TOL):
        failures.append("bound")
        details.append(f"sup |a| = {sup:.6g} > mu(I)^(-1/p) = {bound:.6g}")

    if np.any(a.values[~mask] != 0):
        failures.append("support")
        details.append("nonzero values off the support coset")

    if failures:
        raise AtomViolationError(failures, "; ".join(details))
    base_point = index_to_point(base_index % m_rank, a.generators, support_rank)
    return PAtom(p=p, support_rank=support_rank, base_point=base_point, values=a)


def random_atom(
    m: GeneratorSequence,
    p: float,
    support_rank: int,
    resolution: int,
    rng: np.random.Generator,
    base_index: int = 0,
) -> PAtom:
    """Uniform values on the support coset's cells, mean-subtracted, then
    scaled to 90% of the sup bound (keeps the validator away from its edge)."""
    if support_rank >= resolution:
        raise ValueError("support rank must be below the resolution")
    mask = coset_mask(m, resolution, support_rank, base_index)
    values = np.zeros(m.size(resolution), dtype=np.complex128)
    raw = rng.uniform(-1.0, 1.0, size=int(mask.sum()))
    raw -= raw.mean()
    peak = np.abs(raw).max()
    if peak > 0:
        raw *= 0.9 * m.base(support_rank) ** (1.0 / p) / peak
    values[mask] = raw
    return validate_atom(GridFunction(m, resolution, values), p, support_rank, base_index)


def counterexample_atom(
    m: GeneratorSequence, alpha: int | VIndex, p: float, resolution: int
) -> PAtom:
    """The kernel-difference atom for index alpha, materialized at rank N."""
    idx = alpha if isinstance(alpha, VIndex) else decompose(alpha, m)
    if idx.top + 1 > resolution:
        raise ValueError(
            f"resolution {resolution} too small for an atom at |alpha| = {idx.top}"
        )
    bases = m.scaled_bases(idx.top + 1)
    scale = bases[idx.top] ** (1.0 / p - 1.0) / m.max_radix
    diff = (
        dirichlet_closed(m, bases[idx.top + 1], resolution).values
        - dirichlet_closed(m, bases[idx.top], resolution).values
    )
    a = GridFunction(m, resolution, scale * diff)
    return validate_atom(a, p, idx.top)


@dataclass
class MartingaleSpec:
    """Symbolic counterexample martingale plus its materialized truncation."""

    generators: GeneratorSequence
    p: float
    alphas: tuple[int, ...]
    lambdas: tuple[float, ...]
    rule: str
    phi: tuple | None
    truncation: int
    realized: GridFunction

    @property
    def max_radix(self) -> int:
        return self.generators.max_radix

    @property
    def coefficient_budget(self) -> float:
        """sum |lambda_k|^p over the realized atoms."""
        return float(sum(abs(l) ** self.p for l in self.lambdas))

    def alpha_stats(self) -> list[VIndex]:
        return [decompose(a, self.generators) for a in self.alphas]

    def to_json(self) -> str:
        blob = {
            "m": self.generators.format(),
            "p": self.p,
            "alphas": list(self.alphas),
            "lambdas": list(self.lambdas),
            "rule": self.rule,
            "phi": list(self.phi) if self.phi is not None else None,
            "N": self.truncation,
        }
        return json.dumps(blob, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MartingaleSpec":
        blob = json.loads(text)
        return build_counterexample(
            GeneratorSequence.parse(blob["m"]),
            blob["p"],
            blob["alphas"],
            rule=blob["rule"],
            phi=tuple(blob["phi"]) if blob.get("phi") else None,
            lambdas=blob["lambdas"] if blob["rule"] == "explicit" else None,
            resolution=blob["N"],
        )


def default_alphas(m: GeneratorSequence, resolution: int) -> list[int]:
    """alpha_k = M_{2^k} + 1 while the atom fits: maximal rho growth."""
    alphas = []
    k = 0
    while 2**k + 1 <= resolution:
        alphas.append(m.base(2**k) + 1)
        k += 1
    return alphas


def phi_value(phi: tuple | None, n: int, m: GeneratorSequence) -> float:
    """Evaluate a closed-form Phi tag at index n.

    Tags: ("constant", c), ("log",) -> 1 + ln M_{|n|}, ("power", t) -> M_{|n|}^t.
    """
    if phi is None:
        return 1.0
    tag = phi[0]
    if tag == "constant":
        return float(phi[1])
    top = decompose(n, m).top
    m_top = m.base(top)
    if tag == "log":
        return 1.0 + float(np.log(m_top))
    if tag == "power":
        return float(m_top ** float(phi[1]))
    raise ValueError(f"unknown phi tag {phi!r}")


def _ratio(m: GeneratorSequence, idx: VIndex, p: float) -> float:
    """(M_|n| / M_<n>)^(1/p-1), the block-spread growth rate."""
    bases = m.scaled_bases(idx.top + 1)
    return (bases[idx.top] / bases[idx.bottom]) ** (1.0 / p - 1.0)


def select_gap_subsequence(m: GeneratorSequence, alphas, p: float) -> list[int]:
    """Greedy filter enforcing the two sharpness gap conditions.

    Keeps a candidate only if its spread ratio strictly exceeds the last
    kept one and is at least its square (the doubling gap).
    """
    kept: list[int] = []
    last_ratio = None
    for a in alphas:
        r = _ratio(m, decompose(a, m), p)
        if last_ratio is None or (r > last_ratio and r >= last_ratio**2):
            kept.append(a)
            last_ratio = r
    return kept


def tail_certificate_terms(
    m: GeneratorSequence, alphas, p: float, phi: tuple | None
) -> list[float]:
    """Summability certificate terms for the divergence construction:

        t_k = M_<a_k>^((1-p)/2) Phi_{a_k}^(p/2) / M_|a_k|^((1-p)/2)

    A strictly decreasing sequence certifies the finite tail at desk scale.
    """
    terms = []
    for a in alphas:
        idx = decompose(a, m)
        bases = m.scaled_bases(idx.top + 1)
        terms.append(
            bases[idx.bottom] ** ((1.0 - p) / 2.0)
            * phi_value(phi, a, m) ** (p / 2.0)
            / bases[idx.top] ** ((1.0 - p) / 2.0)
        )
    return terms


def build_counterexample(
    m: GeneratorSequence,
    p: float,
    alphas,
    rule: str = "balanced",
    *,
    phi: tuple | None = None,
    lambdas=None,
    resolution: int,
) -> MartingaleSpec:
    """Assemble the counterexample martingale truncated at rank N.

    Rules:
      - "balanced": lambda_k = (M_<a_k>/M_|a_k|)^((1/p-1)/2) Phi_{a_k}^(1/2),
        guarded by the tail certificate (terms must strictly decrease).
      - "unit_kernel": greedy gap filter on the alphas, then
        lambda_k = lambda * (M_<a_k>/M_|a_k|)^(1/p-1).
      - "explicit": coefficients supplied by the caller.
    """
    alphas = [int(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alpha sequence must be strictly increasing")
    stats = [decompose(a, m) for a in alphas]
    if any(t.top >= u.top for t, u in zip(stats, stats[1:])):
        raise ValueError(
            "alpha tops |a_k| must be strictly increasing (the spectral blocks must be disjoint)"
        )
    if not alphas:
        raise ValueError("alpha sequence is empty")

    if rule == "balanced":
        terms = tail_certificate_terms(m, alphas, p, phi)
        bad = [k for k in range(1, len(terms)) if terms[k] >= terms[k - 1]]
        if bad:
            raise ValueError(
                f"tail certificate fails at k = {bad}: terms do not decrease"
            )
        lam_list = []
        for a, idx in zip(alphas, stats):
            bases = m.scaled_bases(idx.top + 1)
            lam_list.append(
                (bases[idx.bottom] / bases[idx.top]) ** ((1.0 / p - 1.0) / 2.0)
                * phi_value(phi, a, m) ** 0.5
            )
    elif rule == "unit_kernel":
        kept = select_gap_subsequence(m, alphas, p)
        if len(kept) < 2:
            raise ValueError(
                "gap conditions leave fewer than two indices; supply a sparser alpha sequence"
            )
        alphas = kept
        stats = [decompose(a, m) for a in alphas]
        lam_list = [m.max_radix / _ratio(m, idx, p) for idx in stats]
    elif rule == "explicit":
        if lambdas is None or len(lambdas) != len(alphas):
            raise ValueError("explicit rule needs one lambda per alpha")
        lam_list = [float(l) for l in lambdas]
    else:
        raise ValueError(f"unknown lambda rule {rule!r}")

    realized = zero(m, resolution)
    kept_alphas = []
    kept_lambdas = []
    for a, lam_k, idx in zip(alphas, lam_list, stats):
        if idx.top >= resolution:
            continue  # beyond the truncation; stays symbolic
        atom = counterexample_atom(m, idx, p, resolution)
        realized = realized + lam_k * atom.values
        kept_alphas.append(a)
        kept_lambdas.append(lam_k)
    return MartingaleSpec(
        generators=m,
        p=p,
        alphas=tuple(kept_alphas),
        lambdas=tuple(kept_lambdas),
        rule=rule,
        phi=phi,
        truncation=resolution,
        realized=realized,
    )


def spectral_profile(spec: MartingaleSpec) -> np.ndarray:
    """The closed-form coefficient table: f^(j) = lambda_k M_{|a_k|}^{1/p-1}/lambda
    on the block [M_{|a_k|}, M_{|a_k|+1}), zero off the blocks."""
    m = spec.generators
    out = np.zeros(m.size(spec.truncation), dtype=np.complex128)
    for a, lam_k in zip(spec.alphas, spec.lambdas):
        idx = decompose(a, m)
        bases = m.scaled_bases(idx.top + 1)
        level = lam_k * bases[idx.top] ** (1.0 / spec.p - 1.0) / spec.max_radix
        out[bases[idx.top] : bases[idx.top + 1]] = level
    return out


def closed_partial_sum(spec: MartingaleSpec, j: int) -> GridFunction:
    """S_j f from the block structure: completed atoms plus, inside a block,
    the twisted kernel term lambda_l M^{1/p-1} psi_{M_{|a_l|}} D_{j-M_{|a_l|}} / lambda.

    Between blocks the spectral profile is zero, so the completed-atom sum
    is already exact; D_0 is the zero kernel by convention.
    """
    m = spec.generators
    size = m.size(spec.truncation)
    if not 0 <= j <= size:
        raise ValueError(f"partial sum order {j} out of range")
    acc = zero(m, spec.truncation)
    for a, lam_k in zip(spec.alphas, spec.lambdas):
        idx = decompose(a, m)
        bases = m.scaled_bases(idx.top + 1)
        m_top, m_top1 = bases[idx.top], bases[idx.top + 1]
        if j >= m_top1:
            acc = acc + lam_k * counterexample_atom(m, idx, spec.p, spec.truncation).values
        elif j > m_top:
            scale = lam_k * m_top ** (1.0 / spec.p - 1.0) / spec.max_radix
            twist = character_values(m, m_top, spec.truncation)
            kernel = dirichlet_closed(m, j - m_top, spec.truncation).values
            acc = acc + grid_function(m, spec.truncation, scale * twist * kernel)
            break
        else:
            break
    return acc
