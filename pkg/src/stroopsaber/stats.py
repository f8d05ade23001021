"""Within-subjects statistics: inverse normal CDF, repeated-measures ANOVA
(one-way and fully crossed two-way), Bonferroni-adjusted paired comparisons,
and the F / t tail probabilities they need.

Tail probabilities go through a regularized incomplete beta evaluated by the
continued-fraction expansion; the inverse normal is a rational approximation
polished with one Newton step against the erfc-based normal CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def norm_cdf(z: float) -> float:
    """Standard normal CDF via erfc (accurate in both tails)."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


# Acklam's rational approximation coefficients for the inverse normal CDF.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def inv_norm_cdf(p: float) -> float:
    """Quantile z with norm_cdf(z) == p, good to well below 1e-9.

    Raises ValueError unless 0 < p < 1.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must be strictly between 0 and 1")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        z = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        z = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        z = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    # One Newton step against the erfc-based CDF.
    pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        z -= (norm_cdf(z) - p) / pdf
    return z


_BETA_EPS = 3e-16
_BETA_TINY = 1e-300
_BETA_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_TINY:
        d = _BETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_TINY:
            d = _BETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETA_TINY:
            c = _BETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction failed to converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_upper_tail(f_stat: float, df_num: float, df_den: float) -> float:
    """P(F >= f_stat) for an F distribution with the given degrees of freedom.

    Degrees of freedom may be fractional (sphericity-corrected shapes).
    """
    if df_num < 1 or df_den < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if f_stat < 0:
        raise ValueError("F statistic must be >= 0")
    if f_stat == 0.0:
        return 1.0
    x = df_den / (df_den + df_num * f_stat)
    return regularized_incomplete_beta(df_den / 2.0, df_num / 2.0, x)


def t_two_sided_p(t_stat: float, df: int) -> float:
    """Two-sided p for a t statistic."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    x = df / (df + t_stat * t_stat)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


class DegenerateDataError(ValueError):
    """An ANOVA error term is zero (to rounding), so F is undefined."""


# An error sum of squares this far below the table's total variation is
# cancellation noise, not signal.
_SS_REL_FLOOR = 1e-12


def _is_degenerate(ss_error: float, ss_total: float) -> bool:
    return ss_error <= _SS_REL_FLOOR * max(ss_total, 1.0)


@dataclass(frozen=True)
class AnovaResult:
    effect: str
    f_stat: float | None
    df_num: float
    df_den: float
    p: float | None
    ss_effect: float
    ss_error: float
    degenerate: bool = False
    #: Set when the Greenhouse-Geisser correction was applied to the dfs.
    gg_epsilon: float | None = None

    def to_dict(self) -> dict:
        report = {
            "name": self.effect,
            "F": self.f_stat,
            "df_num": self.df_num,
            "df_den": self.df_den,
            "p": self.p,
        }
        if self.gg_epsilon is not None:
            report["gg_epsilon"] = self.gg_epsilon
        return report


def _orthonormal_contrasts(k: int) -> np.ndarray:
    """(k-1) x k orthonormal rows, each orthogonal to the unit vector."""
    basis = np.column_stack([np.ones(k), np.eye(k)[:, : k - 1]])
    q, _ = np.linalg.qr(basis)
    return q[:, 1:].T


def _gg_epsilon(cell_cov: np.ndarray, contrasts: np.ndarray) -> float:
    """Greenhouse-Geisser epsilon from the contrast-transformed covariance."""
    transformed = contrasts @ cell_cov @ contrasts.T
    df = transformed.shape[0]
    trace = float(np.trace(transformed))
    denom = df * float((transformed * transformed).sum())
    if denom <= 0.0:
        return 1.0
    return min(1.0, trace * trace / denom)


def _check_table(data: np.ndarray, min_levels: Sequence[int]) -> None:
    if np.isnan(data).any():
        raise ValueError("table must be complete (no missing cells)")
    if data.shape[0] < 2:
        raise ValueError("need at least 2 subjects")
    for axis, need in enumerate(min_levels, start=1):
        if data.shape[axis] < need:
            raise ValueError(f"factor {axis} needs at least {need} levels")


def rm_anova_oneway(
    table: Sequence[Sequence[float]] | np.ndarray,
    sphericity_correction: bool = False,
) -> AnovaResult:
    """One-way within-subjects ANOVA on a subjects x levels table.

    F = MS_condition / MS_error with df (k-1, (k-1)(n-1)); raises
    DegenerateDataError when the error sum of squares is exactly zero.
    With ``sphericity_correction`` the Greenhouse-Geisser epsilon scales both
    degrees of freedom (off by default; the reported shapes are uncorrected).
    """
    data = np.asarray(table, dtype=float)
    if data.ndim != 2:
        raise ValueError("expected a 2-d subjects x levels table")
    _check_table(data, (2,))
    n, k = data.shape
    grand = data.mean()
    level_means = data.mean(axis=0)
    subject_means = data.mean(axis=1)
    ss_cond = n * float(((level_means - grand) ** 2).sum())
    ss_subj = k * float(((subject_means - grand) ** 2).sum())
    ss_total = float(((data - grand) ** 2).sum())
    ss_err = ss_total - ss_cond - ss_subj
    df_num: float = k - 1
    df_den: float = (k - 1) * (n - 1)
    if _is_degenerate(ss_err, ss_total):
        raise DegenerateDataError("zero error sum of squares; condition effect is undefined")
    f_stat = (ss_cond / df_num) / (ss_err / df_den)
    epsilon = None
    if sphericity_correction:
        epsilon = _gg_epsilon(np.cov(data, rowvar=False), _orthonormal_contrasts(k))
        df_num *= epsilon
        df_den *= epsilon
    return AnovaResult(
        "condition", f_stat, df_num, df_den, f_upper_tail(f_stat, df_num, df_den),
        ss_cond, ss_err, gg_epsilon=epsilon,
    )


def rm_anova_twoway(
    table: np.ndarray,
    factor_names: tuple[str, str] = ("A", "B"),
    sphericity_correction: bool = False,
) -> list[AnovaResult]:
    """Two-way fully crossed within-subjects ANOVA on a subjects x a x b array.

    Returns main effects and the interaction, each tested against its own
    subject-by-effect interaction term. Effects with a zero error term are
    returned with ``degenerate=True`` instead of an F ratio. The optional
    Greenhouse-Geisser correction scales each effect's dfs by the epsilon of
    its own contrast-transformed covariance (off by default).
    """
    data = np.asarray(table, dtype=float)
    if data.ndim != 3:
        raise ValueError("expected a 3-d subjects x A x B table")
    _check_table(data, (2, 2))
    n, a, b = data.shape
    grand = data.mean()
    m_s = data.mean(axis=(1, 2))
    m_a = data.mean(axis=(0, 2))
    m_b = data.mean(axis=(0, 1))
    m_sa = data.mean(axis=2)
    m_sb = data.mean(axis=1)
    m_ab = data.mean(axis=0)

    ss_a = n * b * float(((m_a - grand) ** 2).sum())
    ss_b = n * a * float(((m_b - grand) ** 2).sum())
    ss_ab = n * float(((m_ab - m_a[:, None] - m_b[None, :] + grand) ** 2).sum())
    ss_sa = b * float(((m_sa - m_s[:, None] - m_a[None, :] + grand) ** 2).sum())
    ss_sb = a * float(((m_sb - m_s[:, None] - m_b[None, :] + grand) ** 2).sum())
    resid = (
        data
        - m_ab[None, :, :]
        - m_sa[:, :, None]
        - m_sb[:, None, :]
        + m_a[None, :, None]
        + m_b[None, None, :]
        + m_s[:, None, None]
        - grand
    )
    ss_sab = float((resid ** 2).sum())
    ss_total = float(((data - grand) ** 2).sum())

    name_a, name_b = factor_names
    contrast_a = _orthonormal_contrasts(a)
    contrast_b = _orthonormal_contrasts(b)
    mean_a = np.ones((1, a)) / a
    mean_b = np.ones((1, b)) / b
    layout = (
        (name_a, ss_a, a - 1, ss_sa, (a - 1) * (n - 1), np.kron(contrast_a, mean_b)),
        (name_b, ss_b, b - 1, ss_sb, (b - 1) * (n - 1), np.kron(mean_a, contrast_b)),
        (
            f"{name_a}x{name_b}",
            ss_ab,
            (a - 1) * (b - 1),
            ss_sab,
            (a - 1) * (b - 1) * (n - 1),
            np.kron(contrast_a, contrast_b),
        ),
    )
    cell_cov = np.cov(data.reshape(n, a * b), rowvar=False) if sphericity_correction else None
    results = []
    for effect, ss_eff, df_num, ss_err, df_den, contrasts in layout:
        if _is_degenerate(ss_err, ss_total):
            results.append(AnovaResult(effect, None, df_num, df_den, None, ss_eff, ss_err, degenerate=True))
            continue
        f_stat = (ss_eff / df_num) / (ss_err / df_den)
        epsilon = None
        dfn: float = df_num
        dfd: float = df_den
        if cell_cov is not None:
            epsilon = _gg_epsilon(cell_cov, contrasts)
            dfn *= epsilon
            dfd *= epsilon
        results.append(
            AnovaResult(
                effect, f_stat, dfn, dfd, f_upper_tail(f_stat, dfn, dfd),
                ss_eff, ss_err, gg_epsilon=epsilon,
            )
        )
    return results


@dataclass(frozen=True)
class PairwiseResult:
    pair: tuple[str, str]
    t_stat: float | None
    df: int
    raw_p: float | None
    adjusted_p: float | None
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "t": self.t_stat,
            "df": self.df,
            "raw_p": self.raw_p,
            "adjusted_p": self.adjusted_p,
            "degenerate": self.degenerate,
        }


def bonferroni_pairwise(
    table: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[str] | None = None,
) -> list[PairwiseResult]:
    """Two-sided paired t-tests for all level pairs of a subjects x levels table,
    with Bonferroni adjustment adjusted_p = min(1, raw_p * k(k-1)/2).

    Pairs whose difference vector has zero variance are flagged degenerate.
    """
    data = np.asarray(table, dtype=float)
    if data.ndim != 2:
        raise ValueError("expected a 2-d subjects x levels table")
    _check_table(data, (2,))
    n, k = data.shape
    if labels is None:
        labels = [f"level{i + 1}" for i in range(k)]
    if len(labels) != k:
        raise ValueError("labels must match the number of levels")
    m = k * (k - 1) // 2
    results = []
    for i in range(k):
        for j in range(i + 1, k):
            diff = data[:, i] - data[:, j]
            sd = float(diff.std(ddof=1))
            pair = (labels[i], labels[j])
            if sd == 0.0:
                results.append(PairwiseResult(pair, None, n - 1, None, None, degenerate=True))
                continue
            t_stat = float(diff.mean()) / (sd / math.sqrt(n))
            raw = t_two_sided_p(t_stat, n - 1)
            results.append(PairwiseResult(pair, t_stat, n - 1, raw, min(1.0, raw * m)))
    return results
