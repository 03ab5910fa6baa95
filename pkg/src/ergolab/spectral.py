"""Analysis of correlation sequences and weak-limit coefficient sets.

A correlation sequence sigma_hat(n) = <U^n f, f> is the Fourier data of a
positive measure on the circle.  This module estimates its discrete mass
(Wiener averages of |sigma_hat|^2), probes Rajchman decay, estimates
weak*-limits of shifted sequences, and classifies left coefficient tails
by the quasi-analyticity divergence test

    sum_{n >= 1}  log( sum_{k <= -n} a_k^2 ) / n^2  = -infinity,

which certifies singularity of the underlying spectrum when the
coefficients come from a weak limit of powers that is not itself a power.
Verdicts are derived from closed-form tail descriptors only; finitely
many numeric terms cannot decide divergence.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "CorrelationSequence",
    "TailDescriptor",
    "WeakLimitCoefficients",
    "BeurlingReport",
    "RajchmanStats",
    "TranslationEstimate",
    "CertificateReport",
    "SpectralReport",
    "WindowTooSmall",
    "InvalidTail",
    "spectral_report",
    "wiener_discrete_mass",
    "rajchman_probe",
    "translation_probe",
    "beurling_check",
    "singularity_certificate",
]

STABILIZATION_SPREAD = 1e-3  # spread over the last three times counted as stable


class SpectralError(Exception):
    pass


class WindowTooSmall(SpectralError):
    pass


class InvalidTail(SpectralError):
    pass


@dataclass
class CorrelationSequence:
    """sigma_hat values on a symmetric index window, with error bounds."""

    values: dict[int, tuple[float, float]]
    source: str = ""

    def __post_init__(self):
        self.values = {int(n): (float(v), float(e)) for n, (v, e) in self.values.items()}
        if 0 not in self.values:
            raise ValueError("sequence must include n = 0")
        if self.values[0][0] <= 0:
            raise ValueError("sigma_hat(0) must be positive")

    @property
    def window(self) -> int:
        return max(n for n in self.values if n >= 0)

    def value(self, n: int) -> float:
        return self.values[n][0]

    def error(self, n: int) -> float:
        return self.values[n][1]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]], source: str = "",
                   error: float = 0.0) -> "CorrelationSequence":
        return cls({n: (v, error) for n, v in pairs}, source=source)

    @classmethod
    def from_csv(cls, path: str, source: str | None = None) -> "CorrelationSequence":
        vals: dict[int, tuple[float, float]] = {}
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith(("#", "n")):
                    continue
                n, v = int(row[0]), float(row[1])
                e = float(row[2]) if len(row) > 2 else 0.0
                vals[n] = (v, e)
        return cls(vals, source=source if source is not None else path)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "value", "error_bound"])
            for n in sorted(self.values):
                v, e = self.values[n]
                writer.writerow([n, repr(v), repr(e)])


def wiener_discrete_mass(corr: CorrelationSequence, N: int | None = None) -> float:
    """Cesaro average (1/N) sum_{n=1..N} |sigma_hat(n)|^2.

    Converges to the sum of squared atom masses of the measure; use the
    half-window value as a convergence indicator.
    """
    if N is None:
        N = corr.window
    if N < 32:
        raise WindowTooSmall("need a window of at least 32 coefficients")
    total = 0.0
    for n in range(1, N + 1):
        total += corr.value(n) ** 2
    return total / N


@dataclass(frozen=True)
class RajchmanStats:
    outer_quartile_max: float
    envelope_slope: float


def rajchman_probe(corr: CorrelationSequence) -> RajchmanStats:
    """Decay statistics: max |sigma_hat| on the outer quartile of the
    window, and a log-envelope slope fitted on dyadic bins (descriptive
    only)."""
    W = corr.window
    if W < 64:
        raise WindowTooSmall("need a window of at least 64 coefficients")
    outer = [abs(corr.value(n)) for n in range(3 * W // 4, W + 1) if n in corr.values]
    outer_max = max(outer)
    # envelope: max |sigma_hat| over dyadic blocks [2^j, 2^(j+1))
    xs, ys = [], []
    j = 0
    while 2 ** (j + 1) <= W:
        block = [abs(corr.value(n)) for n in range(2**j, 2 ** (j + 1)) if n in corr.values]
        if block:
            env = max(block)
            xs.append(j * math.log(2.0))
            ys.append(math.log(env) if env > 0 else math.log(1e-300))
        j += 1
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else 0.0
    return RajchmanStats(outer_quartile_max=float(outer_max), envelope_slope=slope)


@dataclass(frozen=True)
class TranslationEstimate:
    index: int
    limit: float
    spread: float
    stabilized: bool


def translation_probe(
    corr: CorrelationSequence, times: Sequence[int], j_window: int
) -> dict[int, TranslationEstimate]:
    """Weak*-limit data of e^{i n_k theta} d sigma along the given times.

    For each j the sequence k -> sigma_hat(n_k + j) estimates the j-th
    Fourier coefficient of the limit; the spread over the last three
    times indicates stability (threshold 1e-3, recorded per entry).
    """
    if not times:
        raise ValueError("need at least one time")
    need = max(times) + j_window
    if need > corr.window:
        raise WindowTooSmall(f"window {corr.window} too small for max time + j_window = {need}")
    out: dict[int, TranslationEstimate] = {}
    for j in range(-j_window, j_window + 1):
        seq = [corr.value(n + j) for n in times]
        last = seq[-3:]
        spread = max(last) - min(last)
        out[j] = TranslationEstimate(
            index=j,
            limit=seq[-1],
            spread=float(spread),
            stabilized=spread <= STABILIZATION_SPREAD,
        )
    return out


# ---------------------------------------------------------------------------
# coefficient sets and the quasi-analyticity test


@dataclass(frozen=True)
class TailDescriptor:
    """Closed-form left tail below the finite support.

    With d = (support minimum - k) >= 1 measuring the distance below the
    support edge, the tail coefficient at index k is

        geometric:              c * q^d          (0 < q < 1)
        stretched_exponential:  c * exp(-d^gamma) (gamma > 0)
        polynomial:             c * d^(-s)        (s > 1)
    """

    kind: str = "none"
    c: float = 0.0
    q: float | None = None
    gamma: float | None = None
    s: float | None = None

    def __post_init__(self):
        if self.kind not in ("none", "geometric", "stretched_exponential", "polynomial"):
            raise InvalidTail(f"unknown tail kind {self.kind!r}")
        if self.kind != "none":
            if self.c <= 0:
                raise InvalidTail("tail amplitude c must be positive")
            if self.kind == "geometric" and not (self.q and 0 < self.q < 1):
                raise InvalidTail("geometric tail needs 0 < q < 1")
            if self.kind == "stretched_exponential" and not (self.gamma and self.gamma > 0):
                raise InvalidTail("stretched tail needs gamma > 0")
            if self.kind == "polynomial" and not (self.s and self.s > 1):
                raise InvalidTail("polynomial tail needs s > 1")


@dataclass(frozen=True)
class WeakLimitCoefficients:
    """A two-sided coefficient sequence with a closed-form left tail."""

    support: dict[int, float]
    tail: TailDescriptor = TailDescriptor()
    restricted: bool = field(init=False)

    def __post_init__(self):
        support = {int(i): float(a) for i, a in self.support.items()}
        object.__setattr__(self, "support", support)
        if not support:
            raise ValueError("finite support must be nonempty")
        object.__setattr__(self, "restricted", any(a > 0 for a in support.values()))

    @property
    def k_min(self) -> int:
        return min(self.support)

    def tail_coefficient(self, k: int) -> float:
        """a_k for indices below the finite support."""
        d = self.k_min - k
        if d < 1:
            raise ValueError("tail applies only below the support")
        t = self.tail
        if t.kind == "none":
            return 0.0
        if t.kind == "geometric":
            return t.c * t.q**d
        if t.kind == "stretched_exponential":
            return t.c * math.exp(-(d**t.gamma))
        return t.c * d ** (-t.s)

    def total_abs_mass(self) -> float:
        finite = sum(abs(a) for a in self.support.values())
        t = self.tail
        if t.kind == "none":
            return finite
        if t.kind == "geometric":
            return finite + t.c * t.q / (1 - t.q)
        if t.kind == "stretched_exponential":
            d, total, term = 1, 0.0, 1.0
            while term > 1e-17 and d < 10**6:
                term = math.exp(-(d**t.gamma))
                total += term
                d += 1
            return finite + t.c * total
        # polynomial, s > 1: zeta-like tail, crude but finite
        total = sum(d ** (-t.s) for d in range(1, 10001))
        total += 10000 ** (1 - t.s) / (t.s - 1)
        return finite + t.c * total

    def to_json(self) -> str:
        t = self.tail
        payload = {
            "support": {str(i): a for i, a in sorted(self.support.items())},
            "tail": {
                "kind": t.kind,
                **({"c": t.c} if t.kind != "none" else {}),
                **({"q": t.q} if t.kind == "geometric" else {}),
                **({"gamma": t.gamma} if t.kind == "stretched_exponential" else {}),
                **({"s": t.s} if t.kind == "polynomial" else {}),
            },
            "restricted": self.restricted,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "WeakLimitCoefficients":
        payload = json.loads(text)
        tail_raw = payload.get("tail", {"kind": "none"})
        tail = TailDescriptor(
            kind=tail_raw.get("kind", "none"),
            c=float(tail_raw.get("c", 0.0)),
            q=tail_raw.get("q"),
            gamma=tail_raw.get("gamma"),
            s=tail_raw.get("s"),
        )
        support = {int(i): float(a) for i, a in payload["support"].items()}
        return cls(support=support, tail=tail)


@dataclass(frozen=True)
class BeurlingReport:
    verdict: str  # holds | fails | inconclusive
    partial_sums: tuple[float, ...]
    tail_exponent_fit: float | None
    notes: str


def _log_tail(coeffs: WeakLimitCoefficients, n: int) -> float:
    """log of sum_{k <= -n} a_k^2, computed in log space for deep tails."""
    finite = sum(a * a for k, a in coeffs.support.items() if k <= -n)
    t = coeffs.tail
    k_edge = min(coeffs.k_min - 1, -n)  # largest tail index entering the sum
    if t.kind == "none":
        return math.log(finite) if finite > 0 else -math.inf
    d0 = coeffs.k_min - k_edge  # smallest tail distance in the sum, >= 1
    if t.kind == "geometric":
        # sum_{d >= d0} c^2 q^(2d) = c^2 q^(2 d0) / (1 - q^2)
        log_formula = 2 * math.log(t.c) + 2 * d0 * math.log(t.q) - math.log1p(-t.q * t.q)
    elif t.kind == "stretched_exponential":
        # c^2 exp(-2 d0^gamma) * theta(d0) with
        # theta = sum_i exp(-2((d0+i)^gamma - d0^gamma)).  Replacing the sum
        # by its integral (substituting u = (d0+x)^gamma - d0^gamma) gives
        # theta ~ 1 + int_0^inf e^(-2u) (1/gamma) (u + d0^gamma)^(1/gamma-1) du,
        # evaluated by trapezoid on [0, 20]; report-quality accuracy only,
        # the verdict never depends on it.
        g = t.gamma
        base = d0**g
        u = np.linspace(0.0, 20.0, 400)
        integrand = np.exp(-2.0 * u) * (1.0 / g) * (u + base) ** (1.0 / g - 1.0)
        theta = 1.0 + float(np.trapezoid(integrand, u))
        log_formula = 2 * math.log(t.c) - 2 * base + math.log(theta)
    else:  # polynomial
        # sum_{d >= d0} c^2 d^(-2s), partial sum plus integral remainder
        s2 = 2 * t.s
        d = np.arange(d0, d0 + 2000, dtype=np.float64)
        total = float((d**-s2).sum()) + (d0 + 2000.0) ** (1 - s2) / (s2 - 1)
        log_formula = 2 * math.log(t.c) + math.log(total)
    if finite <= 0:
        return log_formula
    return float(np.logaddexp(math.log(finite), log_formula))


def beurling_check(coeffs: WeakLimitCoefficients, n_max: int = 10000) -> BeurlingReport:
    """Classify divergence of sum log(sum_{k <= -n} a_k^2) / n^2.

    Verdicts come only from the closed-form tail descriptor (or an
    eventually-zero left tail); the partial sums are reported for
    inspection but never decide the verdict.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    t = coeffs.tail
    if t.kind == "none":
        verdict = "holds"
        notes = "left tail eventually zero: log tail = -inf beyond the support"
    elif t.kind == "geometric":
        verdict = "holds"
        notes = "log tail ~ -2 n log(1/q); terms ~ c/n diverge"
    elif t.kind == "stretched_exponential":
        if t.gamma < 1:
            verdict = "fails"
            notes = "log tail ~ -2 n^gamma with gamma < 1; sum n^(gamma-2) converges"
        else:
            verdict = "holds"
            notes = "log tail ~ -2 n^gamma with gamma >= 1; terms do not vanish faster than c/n"
    elif t.kind == "polynomial":
        verdict = "fails"
        notes = "log tail ~ -(2s - 1) log n; sum log(n)/n^2 converges"
    else:
        verdict = "inconclusive"
        notes = "no closed-form tail available"

    cap = min(n_max, 600)
    tails = []
    for n in range(1, cap + 1):
        tails.append(_log_tail(coeffs, n))
        if tails[-1] == -math.inf:
            break
    sums, running = [], 0.0
    for n, lt in enumerate(tails, start=1):
        running += lt / (n * n)
        sums.append(running)

    fit = None
    pts = [
        (math.log(n), math.log(-lt))
        for n, lt in enumerate(tails, start=1)
        if n >= max(2, len(tails) // 2) and -math.inf < lt < 0
    ]
    if len(pts) >= 2:
        xs, ys = zip(*pts)
        fit = float(np.polyfit(xs, ys, 1)[0])
    return BeurlingReport(
        verdict=verdict,
        partial_sums=tuple(sums),
        tail_exponent_fit=fit,
        notes=notes,
    )


@dataclass(frozen=True)
class CertificateReport:
    verdict: str
    alpha_lower_bound: float | None
    beurling: BeurlingReport
    nonpower_asserted: bool
    notes: tuple[str, ...]


@dataclass(frozen=True)
class SpectralReport:
    """Aggregation record over one correlation sequence."""

    wiener_mass: float
    wiener_half_window: float
    rajchman: RajchmanStats
    translation: dict[int, TranslationEstimate] | None
    certificate: "CertificateReport | None"


def spectral_report(
    corr: CorrelationSequence,
    times: Sequence[int] | None = None,
    j_window: int = 3,
    coeffs: WeakLimitCoefficients | None = None,
    n_max: int = 600,
    limit_is_nonpower: bool = True,
) -> SpectralReport:
    """Bundle the probes for one sequence (plus an optional certificate)."""
    W = corr.window
    return SpectralReport(
        wiener_mass=wiener_discrete_mass(corr),
        wiener_half_window=wiener_discrete_mass(corr, max(32, W // 2)),
        rajchman=rajchman_probe(corr),
        translation=translation_probe(corr, times, j_window) if times else None,
        certificate=(
            singularity_certificate(coeffs, n_max, limit_is_nonpower=limit_is_nonpower)
            if coeffs is not None
            else None
        ),
    )


def singularity_certificate(
    coeffs: WeakLimitCoefficients,
    n_max: int = 10000,
    limit_is_nonpower: bool = True,
) -> CertificateReport:
    """Singularity certificate for the spectrum behind a weak limit.

    Requires the caller to assert that the coefficients describe a weak
    limit of powers U^{n_k} that is not itself a single power; the
    assertion is recorded, not checked (no finite computation can).  With
    some nonzero coefficient and a passing tail test the spectrum is
    singular; positive coefficients additionally witness alpha-rigidity
    with alpha at least the largest one.
    """
    notes: list[str] = []
    report = beurling_check(coeffs, n_max)
    nonzero = any(a != 0 for a in coeffs.support.values()) or coeffs.tail.kind != "none"
    max_pos = max((a for a in coeffs.support.values() if a > 0), default=None)

    if not nonzero:
        return CertificateReport(
            verdict="no certificate (zero limit)",
            alpha_lower_bound=None,
            beurling=report,
            nonpower_asserted=limit_is_nonpower,
            notes=("all coefficients vanish",),
        )
    if not limit_is_nonpower:
        return CertificateReport(
            verdict="no certificate",
            alpha_lower_bound=None,
            beurling=report,
            nonpower_asserted=False,
            notes=("caller did not assert the limit lies outside the powers",),
        )
    if report.verdict != "holds":
        return CertificateReport(
            verdict="no certificate",
            alpha_lower_bound=None,
            beurling=report,
            nonpower_asserted=True,
            notes=(f"tail test verdict: {report.verdict}",),
        )
    verdict = "singular"
    alpha = None
    if coeffs.restricted and max_pos is not None:
        alpha = max_pos
        notes.append(f"alpha-rigid with alpha >= {max_pos}")
        if max_pos > 0.5:
            notes.append("alpha exceeds 1/2: singular already by the classical half-threshold")
    return CertificateReport(
        verdict=verdict,
        alpha_lower_bound=alpha,
        beurling=report,
        nonpower_asserted=True,
        notes=tuple(notes),
    )
