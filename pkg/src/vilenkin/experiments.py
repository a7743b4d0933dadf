"""Scenario runners confronting the boundedness/divergence theory with
exact finite-resolution computation.

Every scan is deterministic: given the same seed and parameter grid it
produces byte-identical results.  Verdicts use configurable desk-scale
thresholds; a "growing" verdict always ships its full trace and a
"bounded" verdict ships the ratios it compared.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .group import GeneratorSequence, decompose
from .martingale import (
    MartingaleSpec,
    build_counterexample,
    closed_partial_sum,
    default_alphas,
    phi_value,
    random_atom,
)
from .norms import hardy_norm, modulus_hp, weak_lp
from .transform import (
    GridFunction,
    character_block,
    coarse_sums,
    dirichlet_average,
    dirichlet_kernel_blocks,
    forward,
    grid_function,
    partial_sum,
)

DEFAULT_SEED = 1729

# Scans refuse grids above this size by default (seconds-to-minutes budget).
SCAN_SIZE_CAP = 1 << 14


@dataclass(frozen=True)
class Thresholds:
    """Desk-scale verdict configuration; these are policy, not math."""

    min_run: int = 4  # consecutive increasing trace points for "growing"
    min_growth: float = 4.0  # total growth over that run
    bounded_cap: float = 4.0  # max admissible ratio for "bounded"
    decay_factor: float = 4.0  # required total decay for a vanishing error trace
    error_floor: float = 0.05  # weak-error floor certifying non-convergence
    rate_band: float = 16.0  # max/min band for modulus-rate ratios


@dataclass
class ScenarioResult:
    """Measurements, empirical constants and the verdict for one scenario."""

    scenario: str
    params: dict
    points: list[dict]
    constants: dict
    trace: list[float]
    verdict: str  # bounded | growing | violated

    def to_json(self) -> str:
        blob = {
            "scenario": self.scenario,
            "params": self.params,
            "points": self.points,
            "constants": self.constants,
            "trace": self.trace,
            "verdict": self.verdict,
        }
        return json.dumps(blob, sort_keys=True, default=_json_default)

    def to_csv(self) -> str:
        lines = [f"# vilenkin scenario={self.scenario}"]
        for key in sorted(self.params):
            lines.append(f"# {key}={self.params[key]}")
        lines.append(f"# verdict={self.verdict}")
        if self.points:
            cols = list(self.points[0].keys())
            lines.append(",".join(cols))
            for row in self.points:
                lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
        return "\n".join(lines) + "\n"

    def to_svg(self, title: str | None = None) -> str:
        return _trace_svg(title or self.scenario, self.trace)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return str(value)


def _trace_svg(title: str, trace: list[float]) -> str:
    """Minimal log-y polyline chart; enough to eyeball growth or decay."""
    width, height, pad = 640, 400, 48
    positives = [t for t in trace if t > 0]
    if len(trace) < 2 or not positives:
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
            f"<text x='{pad}' y='{pad}'>{title}: no positive trace</text></svg>"
        )
    lo = math.log10(min(positives))
    hi = math.log10(max(positives))
    span = hi - lo if hi > lo else 1.0
    xs = np.linspace(pad, width - pad, num=len(trace))
    pts = []
    for x, t in zip(xs, trace):
        y_rel = (math.log10(t) - lo) / span if t > 0 else 0.0
        pts.append(f"{x:.1f},{height - pad - y_rel * (height - 2 * pad):.1f}")
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="{width}" height="{height}" fill="white"/>'
        f'<text x="{pad}" y="{pad / 2 + 6}" font-size="14">{title} (log y)</text>'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>'
        f'<text x="4" y="{height - pad}" font-size="11">{10 ** lo:.3g}</text>'
        f'<text x="4" y="{pad + 4}" font-size="11">{10 ** hi:.3g}</text>'
        f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{" ".join(pts)}"/>'
        "</svg>"
    )


def _check_scan_size(m: GeneratorSequence, resolution: int, cap: int = SCAN_SIZE_CAP) -> int:
    size = m.size(resolution)
    if size > cap:
        raise ValueError(f"scan grid M_N = {size} exceeds the scan cap {cap}")
    return size


def _increasing_suffix(trace: list[float]) -> tuple[int, float]:
    """Length of the strictly increasing suffix and its total growth."""
    if not trace:
        return 0, 0.0
    run = 1
    for i in range(len(trace) - 1, 0, -1):
        if trace[i] > trace[i - 1]:
            run += 1
        else:
            break
    start = trace[len(trace) - run]
    growth = trace[-1] / start if start > 0 else math.inf
    return run, growth


def partial_sum_rows(f: GridFunction, block: int = 256):
    """Yield (n0, PS) with PS[i] = S_{n0+i+1} f, by blocked accumulation."""
    fhat = forward(f).coeffs
    carry = np.zeros(f.size, dtype=np.complex128)
    for lo in range(0, f.size, block):
        hi = min(lo + block, f.size)
        rows = character_block(f.generators, f.resolution, np.arange(lo, hi))
        rows = rows * fhat[lo:hi, None]
        ps = carry + np.cumsum(rows, axis=0)
        carry = ps[-1].copy()
        yield lo, ps


# ---------------------------------------------------------------------------
# boundedness of S_n on atoms (the positive half of the norm estimate)
# ---------------------------------------------------------------------------


def atom_ratio_scan(
    p: float,
    m: GeneratorSequence,
    resolution: int,
    trials: int = 200,
    seed: int = DEFAULT_SEED,
    support_ranks: tuple[int, ...] = (1, 2, 3),
) -> ScenarioResult:
    """Normalized partial-sum ratios over random p-atoms.

    For each atom a with support I_rank and every n > M_rank, records

        r(n, a) = ||S_n a||_{H_p} * (M_<n> / M_|n|)^(1/p-1);

    stability of max r across resolutions is the empirical boundedness
    evidence (S_n a = 0 for n <= M_rank, so those n are skipped).
    """
    if not 0 < p < 1:
        raise ValueError("atom scan needs 0 < p < 1")
    size = _check_scan_size(m, resolution)
    rng = np.random.default_rng(seed)
    bases = m.scaled_bases(resolution)
    base_arr = np.asarray(bases)
    # Discount factors (M_<n>/M_|n|)^(1/p-1) for every n, computed once.
    discount = np.empty(size + 1)
    discount[0] = 0.0
    for n in range(1, size + 1):
        idx = decompose(n, m)
        discount[n] = (bases[idx.bottom] / bases[idx.top]) ** (1.0 / p - 1.0)

    points = []
    global_max = 0.0
    for trial in range(trials):
        rank = int(support_ranks[int(rng.integers(0, len(support_ranks)))])
        atom = random_atom(m, p, rank, resolution, rng)
        f = atom.values
        levels = np.abs(coarse_sums(f))
        running = np.maximum.accumulate(levels, axis=0)
        start = bases[rank]
        best_r, best_n = 0.0, 0
        for lo, ps in partial_sum_rows(f):
            ns = np.arange(lo + 1, lo + 1 + ps.shape[0])
            keep = ns > start
            if not keep.any():
                continue
            ps_keep = ps[keep]
            ns_keep = ns[keep]
            ks = np.searchsorted(base_arr, ns_keep, side="right") - 1
            stars = np.maximum(running[ks], np.abs(ps_keep))
            hardys = np.mean(stars**p, axis=1) ** (1.0 / p)
            rs = hardys * discount[ns_keep]
            i = int(np.argmax(rs))
            if rs[i] > best_r:
                best_r, best_n = float(rs[i]), int(ns_keep[i])
        global_max = max(global_max, best_r)
        points.append({"trial": trial, "support_rank": rank, "max_r": best_r, "argmax_n": best_n})

    return ScenarioResult(
        scenario="atom_ratio",
        params={
            "p": p,
            "m": m.format(),
            "N": resolution,
            "trials": trials,
            "seed": seed,
            "support_ranks": list(support_ranks),
        },
        points=points,
        constants={"max_ratio": global_max},
        trace=[pt["max_r"] for pt in points],
        verdict="bounded",
    )


# ---------------------------------------------------------------------------
# divergence along a subsequence (the sharpness half)
# ---------------------------------------------------------------------------


def _divergence_alphas(variant: str, m: GeneratorSequence, resolution: int, alphas) -> list[int]:
    if variant == "Mn_plus_1":
        return [m.base(k) + 1 for k in range(1, resolution)]
    if variant == "general":
        return [int(a) for a in alphas] if alphas is not None else default_alphas(m, resolution)
    raise ValueError(f"unknown divergence variant {variant!r}")


def divergence_scan(
    p: float,
    variant: str,
    m: GeneratorSequence,
    resolution: int,
    phi: tuple | None = None,
    alphas=None,
    rule: str = "balanced",
    lambdas=None,
    thresholds: Thresholds = Thresholds(),
) -> ScenarioResult:
    """Weak-quasi-norm trace of S_{a_k} f / Phi_{a_k} along the subsequence.

    Refuses sequences whose digit spread stays bounded (the boundedness
    regime) and Phi choices that defeat the growth hypothesis on the
    truncated range.  The closed-form partial sum is cross-checked against
    the spectral path before any norm is taken.
    """
    if not 0 < p < 1:
        raise ValueError("divergence scan needs 0 < p < 1")
    _check_scan_size(m, resolution)
    alpha_list = _divergence_alphas(variant, m, resolution, alphas)
    alpha_list = [a for a in alpha_list if decompose(a, m).top < resolution]
    if len(alpha_list) < 2:
        raise ValueError("fewer than two resolvable alpha indices")

    rhos = [decompose(a, m).rho for a in alpha_list]
    if any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ValueError(
            f"digit spread rho is not strictly increasing (rho trace {rhos}); "
            "this sequence sits in the bounded regime"
        )
    growth_ratios = []
    for a in alpha_list:
        idx = decompose(a, m)
        bases = m.scaled_bases(idx.top + 1)
        rate = (bases[idx.top] / bases[idx.bottom]) ** (1.0 / p - 1.0)
        growth_ratios.append(rate / phi_value(phi, a, m))
    if any(b <= a for a, b in zip(growth_ratios, growth_ratios[1:])):
        raise ValueError(
            "growth hypothesis fails on the truncated sequence: "
            f"rate/Phi trace {growth_ratios} is not strictly increasing"
        )

    spec = build_counterexample(
        m, p, alpha_list, rule=rule, phi=phi, lambdas=lambdas, resolution=resolution
    )
    points = []
    trace = []
    cross_err = 0.0
    for k, a in enumerate(spec.alphas):
        s_fast = partial_sum(spec.realized, a)
        s_closed = closed_partial_sum(spec, a)
        err = float(np.abs(s_fast.values - s_closed.values).max())
        cross_err = max(cross_err, err)
        phi_k = phi_value(phi, a, m)
        value = weak_lp(s_fast, p) / phi_k
        trace.append(value)
        points.append(
            {
                "k": k,
                "alpha": a,
                "rho": decompose(a, m).rho,
                "lambda_k": spec.lambdas[k],
                "phi": phi_k,
                "weak_norm": value,
                "closed_form_err": err,
            }
        )
    run, growth = _increasing_suffix(trace)
    verdict = "growing" if run >= thresholds.min_run and growth >= thresholds.min_growth else "bounded"
    return ScenarioResult(
        scenario="divergence",
        params={
            "p": p,
            "m": m.format(),
            "N": resolution,
            "variant": variant,
            "rule": rule,
            "phi": list(phi) if phi else None,
            "alphas": list(spec.alphas),
            "min_run": thresholds.min_run,
            "min_growth": thresholds.min_growth,
        },
        points=points,
        constants={
            "coefficient_budget": spec.coefficient_budget,
            "closed_form_max_err": cross_err,
            "increasing_run": run,
            "run_growth": growth,
        },
        trace=trace,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# bounded subsequences (rho bounded)
# ---------------------------------------------------------------------------


def _bounded_indices(variant: str, m: GeneratorSequence, resolution: int) -> list[int]:
    bases = m.scaled_bases(resolution)
    if variant == "Mn":
        return [bases[k] for k in range(resolution + 1)]
    if variant == "Mn_plus_Mn-1":
        return [bases[k] + bases[k - 1] for k in range(1, resolution)]
    if variant == "rho_bounded":
        return [bases[k] + bases[k - 2] for k in range(2, resolution)]
    raise ValueError(f"unknown boundedness variant {variant!r}")


def boundedness_scan(
    p: float,
    variant: str,
    m: GeneratorSequence,
    resolution: int,
    trials: int = 50,
    seed: int = DEFAULT_SEED,
    thresholds: Thresholds = Thresholds(),
) -> ScenarioResult:
    """Hardy-norm ratios ||S_{n_k} f||_{H_p} / ||f||_{H_p} along a
    bounded-spread index family, over random functions and the
    counterexample martingale."""
    if not 0 < p <= 1:
        raise ValueError("boundedness scan needs 0 < p <= 1")
    size = _check_scan_size(m, resolution)
    indices = _bounded_indices(variant, m, resolution)
    rng = np.random.default_rng(seed)

    pool: list[tuple[str, GridFunction]] = []
    for t in range(trials):
        values = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        pool.append((f"random{t}", grid_function(m, resolution, values)))
    spec = build_counterexample(
        m, p, default_alphas(m, resolution), rule="balanced", resolution=resolution
    )
    pool.append(("martingale", spec.realized))

    max_ratio = 0.0
    per_index = []
    for n in indices:
        worst = 0.0
        martingale_ratio = None
        for label, f in pool:
            denom = hardy_norm(f, p)
            if denom == 0:
                continue
            ratio = hardy_norm(partial_sum(f, n), p) / denom
            if label == "martingale":
                martingale_ratio = ratio
            worst = max(worst, ratio)
        max_ratio = max(max_ratio, worst)
        per_index.append(
            {"n": n, "rho": decompose(n, m).rho, "max_ratio": worst, "martingale_ratio": martingale_ratio}
        )
    verdict = "bounded" if max_ratio <= thresholds.bounded_cap else "violated"
    return ScenarioResult(
        scenario="boundedness",
        params={
            "p": p,
            "m": m.format(),
            "N": resolution,
            "variant": variant,
            "trials": trials,
            "seed": seed,
        },
        points=per_index,
        constants={"max_ratio": max_ratio},
        trace=[pt["max_ratio"] for pt in per_index],
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# the weighted norm series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesReport:
    """Partial weighted series sum_k ||S_k f||_p^p / k^(2-p) and its ratio
    against ||f||_{H_p}^p."""

    p: float
    total: float
    hardy_power: float

    @property
    def ratio(self) -> float:
        return self.total / self.hardy_power if self.hardy_power > 0 else math.inf


def weighted_series(f: GridFunction, p: float) -> SeriesReport:
    if not 0 < p < 1:
        raise ValueError("the weighted series needs 0 < p < 1")
    total = 0.0
    for lo, ps in partial_sum_rows(f):
        ns = np.arange(lo + 1, lo + 1 + ps.shape[0])
        powers = np.mean(np.abs(ps) ** p, axis=1)  # ||S_n f||_p^p
        total += float((powers / ns.astype(float) ** (2.0 - p)).sum())
    return SeriesReport(p=p, total=total, hardy_power=hardy_norm(f, p) ** p)


def weighted_series_scan(
    p: float,
    m: GeneratorSequence,
    resolution: int,
    trials: int = 50,
    seed: int = DEFAULT_SEED,
    thresholds: Thresholds = Thresholds(),
) -> ScenarioResult:
    """Weighted-series ratios over random functions plus the counterexample
    martingale; bounded iff no ratio escapes the configured cap times the
    pool median (the series constant is never pinned, only its stability)."""
    if not 0 < p < 1:
        raise ValueError("the weighted series needs 0 < p < 1")
    size = _check_scan_size(m, resolution, cap=1 << 12)
    rng = np.random.default_rng(seed)
    pool: list[tuple[str, GridFunction]] = []
    for t in range(trials):
        values = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        pool.append((f"random{t}", grid_function(m, resolution, values)))
    spec = build_counterexample(
        m, p, default_alphas(m, resolution), rule="balanced", resolution=resolution
    )
    pool.append(("martingale", spec.realized))
    points = []
    for label, f in pool:
        report = weighted_series(f, p)
        points.append({"label": label, "total": report.total, "ratio": report.ratio})
    ratios = [pt["ratio"] for pt in points]
    median = float(np.median(ratios))
    verdict = "bounded" if max(ratios) <= thresholds.bounded_cap * median else "violated"
    return ScenarioResult(
        scenario="weighted_series",
        params={"p": p, "m": m.format(), "N": resolution, "trials": trials, "seed": seed},
        points=points,
        constants={"ratio_max": max(ratios), "ratio_min": min(ratios), "ratio_median": median},
        trace=ratios,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# modulus of continuity versus convergence
# ---------------------------------------------------------------------------


def _modulus_spec(
    f_rule: str, m: GeneratorSequence, p: float, alphas: list[int], resolution: int
) -> MartingaleSpec:
    if f_rule == "unit_kernel":
        return build_counterexample(m, p, alphas, rule="unit_kernel", resolution=resolution)
    if f_rule == "fast_decay":
        lambdas = []
        for k, a in enumerate(alphas):
            idx = decompose(a, m)
            bases = m.scaled_bases(idx.top + 1)
            target = (bases[idx.bottom] / bases[idx.top]) ** (1.0 / p - 1.0)
            lambdas.append(target * 4.0**-k)
        return build_counterexample(
            m, p, alphas, rule="explicit", lambdas=lambdas, resolution=resolution
        )
    raise ValueError(f"unknown f_rule {f_rule!r}")


def modulus_convergence_scan(
    p: float,
    f_rule: str,
    n_rule: str,
    m: GeneratorSequence,
    resolution: int,
    thresholds: Thresholds = Thresholds(),
) -> ScenarioResult:
    """Modulus decay versus partial-sum error along the alpha subsequence.

    Records (k, omega(1/M_{|n_k|}), ||S_{n_k}f - f||_{H_p}) triples, the
    empirical constant in the error-versus-modulus inequality, the
    modulus-to-target-rate ratios and the weak-error trace.  The growth
    hypothesis here is the little-o modulus condition; the displayed
    inequality is treated as the conclusion being measured.
    """
    if not 0 < p < 1:
        raise ValueError("modulus scan needs 0 < p < 1")
    _check_scan_size(m, resolution)
    if n_rule == "default":
        alphas = default_alphas(m, resolution)
    elif n_rule == "Mn_plus_1":
        alphas = [m.base(k) + 1 for k in range(1, resolution)]
    else:
        raise ValueError(f"unknown n_rule {n_rule!r}")
    spec = _modulus_spec(f_rule, m, p, alphas, resolution)
    f = spec.realized

    points = []
    err_hp_trace = []
    err_weak_trace = []
    rate_ratios = []
    c_max = 0.0
    for k, a in enumerate(spec.alphas):
        idx = decompose(a, m)
        bases = m.scaled_bases(idx.top + 1)
        rate = (bases[idx.top] / bases[idx.bottom]) ** (1.0 / p - 1.0)
        omega = modulus_hp(f, idx.top, p)
        diff = partial_sum(f, a) - f
        err_hp = hardy_norm(diff, p)
        err_weak = weak_lp(diff, p)
        target = 1.0 / rate  # (M_<n>/M_|n|)^(1/p-1)
        ratio = omega / target if target > 0 else math.inf
        c_k = err_hp / (rate * omega) if rate * omega > 0 else 0.0
        c_max = max(c_max, c_k)
        err_hp_trace.append(err_hp)
        err_weak_trace.append(err_weak)
        rate_ratios.append(ratio)
        points.append(
            {
                "k": k,
                "n": a,
                "omega": omega,
                "err_hardy": err_hp,
                "err_weak": err_weak,
                "rate": rate,
                "modulus_rate_ratio": ratio,
                "empirical_c": c_k,
            }
        )

    # modulus tails against the coefficient tails, per truncation
    tail_constants = []
    tops = [decompose(a, m).top for a in spec.alphas]
    for t in range(resolution + 1):
        tail = sum(abs(l) ** p for l, top in zip(spec.lambdas, tops) if top >= t)
        omega_t = modulus_hp(f, t, p)
        if tail > 0:
            tail_constants.append(omega_t**p / tail)

    if f_rule == "fast_decay":
        decaying = all(b < a for a, b in zip(err_hp_trace, err_hp_trace[1:]))
        enough = err_hp_trace[-1] <= err_hp_trace[0] / thresholds.decay_factor
        verdict = "bounded" if decaying and enough else "violated"
    else:
        band_ok = max(rate_ratios) <= thresholds.rate_band * min(rate_ratios)
        floor_ok = min(err_weak_trace) >= thresholds.error_floor
        verdict = "growing" if band_ok and floor_ok else "violated"

    return ScenarioResult(
        scenario="modulus_convergence",
        params={
            "p": p,
            "m": m.format(),
            "N": resolution,
            "f_rule": f_rule,
            "n_rule": n_rule,
            "alphas": list(spec.alphas),
        },
        points=points,
        constants={
            "empirical_c": c_max,
            "tail_constant_max": max(tail_constants) if tail_constants else 0.0,
            "modulus_rate_ratio_min": min(rate_ratios),
            "modulus_rate_ratio_max": max(rate_ratios),
            "weak_error_floor": min(err_weak_trace),
        },
        trace=err_hp_trace,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# kernel support measure
# ---------------------------------------------------------------------------


def supp_measure_scan(
    m: GeneratorSequence, resolution: int, n_limit: int | None = None
) -> ScenarioResult:
    """n * mu(supp D_n) against its two-sided bracket, exhaustively.

    The bracket [M_|n| / (2 M_<n>), lambda M_|n| / M_<n>] characterizes
    which partial-sum subsequences stay bounded, so a single escape flips
    the verdict to "violated"."""
    size = _check_scan_size(m, resolution)
    limit = size if n_limit is None else n_limit
    if not 1 <= limit <= size:
        raise ValueError("support scan limit out of range")
    lam = m.max_radix
    points = []
    trace = []
    violated = False
    for lo, kernels in dirichlet_kernel_blocks(m, resolution, limit):
        supp_counts = (np.abs(kernels) > 1e-9).sum(axis=1)
        for i in range(kernels.shape[0]):
            n = lo + i + 1
            idx = decompose(n, m)
            bases = m.scaled_bases(idx.top + 1)
            n_mu = n * float(supp_counts[i]) / size
            lower = bases[idx.top] / (2.0 * bases[idx.bottom])
            upper = lam * bases[idx.top] / bases[idx.bottom]
            ok = lower - 1e-9 <= n_mu <= upper + 1e-9
            violated = violated or not ok
            trace.append(n_mu)
            points.append(
                {
                    "n": n,
                    "top": idx.top,
                    "bottom": idx.bottom,
                    "n_mu_supp": n_mu,
                    "lower": lower,
                    "upper": upper,
                    "in_bracket": ok,
                }
            )
    return ScenarioResult(
        scenario="supp_measure",
        params={"m": m.format(), "N": resolution, "limit": limit},
        points=points,
        constants={
            "min_slack": min(pt["n_mu_supp"] / pt["lower"] for pt in points),
            "max_slack": max(pt["n_mu_supp"] / pt["upper"] for pt in points),
        },
        trace=trace,
        verdict="violated" if violated else "bounded",
    )


# ---------------------------------------------------------------------------
# kernel lower estimate on the bottom coset
# ---------------------------------------------------------------------------


def dirichlet_floor_scan(
    m: GeneratorSequence, resolution: int, n_limit: int | None = None
) -> ScenarioResult:
    """min |D_n| on I_<n> \\ I_<n>+1 against the floor M_<n>, with the
    kernel-shift identity |D_n| = |D_{n - M_|n|}| checked on the same coset.

    The floor is only claimed on the bottom coset; the per-n report also
    lists every rank s where it happens to hold, since the blanket-range
    phrasing is not empirically true (and fails outright once a radix
    reaches 4: a middle digit can zero the geometric factor)."""
    size = _check_scan_size(m, resolution)
    limit = size if n_limit is None else n_limit
    if not 1 <= limit <= size:
        raise ValueError("floor scan limit out of range")
    bases = m.scaled_bases(resolution)
    grid = np.arange(size, dtype=np.int64)
    shells = [((grid % bases[s]) == 0) & ((grid % bases[s + 1]) != 0) for s in range(resolution)]

    kernels: dict[int, np.ndarray] = {}
    points = []
    trace = []
    violations = []
    for lo, block in dirichlet_kernel_blocks(m, resolution, limit):
        for i in range(block.shape[0]):
            kernels[lo + i + 1] = np.abs(block[i])
    for n in range(1, limit + 1):
        idx = decompose(n, m)
        if idx.top == idx.bottom:
            continue
        mags = kernels[n]
        shell = shells[idx.bottom]
        floor = float(mags[shell].min())
        target = float(bases[idx.bottom])
        shifted = kernels.get(n - bases[idx.top])
        equal_err = float(np.abs(mags[shell] - shifted[shell]).max()) if shifted is not None else None
        holds_s = [s for s in range(resolution) if shells[s].any() and mags[shells[s]].min() >= target - 1e-6]
        ok = floor >= target - 1e-6
        if not ok:
            violations.append(n)
        trace.append(floor / target)
        points.append(
            {
                "n": n,
                "bottom": idx.bottom,
                "floor": floor,
                "target": target,
                "shift_identity_err": equal_err,
                "holds_at_s": holds_s,
                "ok": ok,
            }
        )
    return ScenarioResult(
        scenario="dirichlet_floor",
        params={"m": m.format(), "N": resolution, "limit": limit},
        points=points,
        constants={
            "violations": violations,
            "min_floor_ratio": min(trace) if trace else math.inf,
        },
        trace=trace,
        verdict="violated" if violations else "bounded",
    )


# ---------------------------------------------------------------------------
# averaged kernel upper estimate
# ---------------------------------------------------------------------------


def kernel_average_scan(
    m: GeneratorSequence,
    resolution: int,
    support_rank: int,
    n_limit: int | None = None,
) -> ScenarioResult:
    """Empirical constant in the averaged-kernel bound

        int_{I_R} |D_n(x - t)| dmu(t) <= c * M_s / M_R  on I_s \\ I_{s+1},

    recorded as the max over n and s < R of the normalized shell maximum."""
    size = _check_scan_size(m, resolution, cap=1 << 12)
    limit = min(size, 4 * m.base(support_rank)) if n_limit is None else n_limit
    bases = m.scaled_bases(resolution)
    grid = np.arange(size, dtype=np.int64)
    shells = [
        ((grid % bases[s]) == 0) & ((grid % bases[s + 1]) != 0) for s in range(support_rank)
    ]
    m_rank = bases[support_rank]
    points = []
    c_max = 0.0
    for n in range(1, limit + 1):
        avg = dirichlet_average(m, n, support_rank, resolution).values.real
        worst = 0.0
        for s, shell in enumerate(shells):
            if not shell.any():
                continue
            c_ns = float(avg[shell].max()) * m_rank / bases[s]
            worst = max(worst, c_ns)
        c_max = max(c_max, worst)
        points.append({"n": n, "c": worst})
    return ScenarioResult(
        scenario="kernel_average",
        params={"m": m.format(), "N": resolution, "support_rank": support_rank, "limit": limit},
        points=points,
        constants={"c_max": c_max},
        trace=[pt["c"] for pt in points],
        verdict="bounded",
    )


#: Scans invocable by name from the CLI.
SCAN_REGISTRY = {
    "atom_ratio": atom_ratio_scan,
    "divergence": divergence_scan,
    "boundedness": boundedness_scan,
    "weighted_series": weighted_series_scan,
    "modulus_convergence": modulus_convergence_scan,
    "supp_measure": supp_measure_scan,
    "dirichlet_floor": dirichlet_floor_scan,
    "kernel_average": kernel_average_scan,
}
