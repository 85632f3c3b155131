"""Cyclicity verdicts for polynomials in D_alpha(B_2) from the boundary zero set.

The decision table, with alpha thresholds compared inclusively:

============================  ===============  ============================
zero set                      alpha            verdict (rule)
============================  ===============  ============================
zero inside the ball          any              no  (vanishes_in_ball)
empty / finite / curve        <= 3/2           yes (alpha_le_3_2)
empty                         > 3/2            yes (empty_boundary_zeros)
finite                        (3/2, 2]         yes (finite_boundary_zeros)
curve                         > 3/2            no  (curve_and_alpha_gt_3_2)
finite                        > 2              no  (boundary_zeros_and_alpha_gt_2)
============================  ===============  ============================

The table is applied to p as given; p is not factored into irreducibles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .boundary import ZeroSetReport, classify_zero_set
from .errors import Inconclusive

__all__ = ["Verdict", "RULES", "ZERO_SET_CLASSES", "decide", "classify"]

ZERO_SET_CLASSES = ("interior_zero", "empty", "finite", "curve")
RULES = (
    "alpha_le_3_2",
    "finite_boundary_zeros",
    "empty_boundary_zeros",
    "curve_and_alpha_gt_3_2",
    "boundary_zeros_and_alpha_gt_2",
    "vanishes_in_ball",
)
REDUCIBILITY_NOTE = "reducibility not verified"


def decide(kind, alpha):
    """(cyclic, rule) for a zero-set class and alpha; every pair maps to exactly one rule."""
    if kind not in ZERO_SET_CLASSES:
        raise ValueError(f"unknown zero-set class {kind!r}")
    alpha = float(alpha)
    if math.isnan(alpha):
        raise ValueError("alpha is NaN")
    if kind == "interior_zero":
        return "no", "vanishes_in_ball"
    if alpha <= 1.5:
        return "yes", "alpha_le_3_2"
    if kind == "empty":
        return "yes", "empty_boundary_zeros"
    if kind == "curve":
        return "no", "curve_and_alpha_gt_3_2"
    if alpha <= 2.0:
        return "yes", "finite_boundary_zeros"
    return "no", "boundary_zeros_and_alpha_gt_2"


@dataclass
class Verdict:
    """Classifier output. ``advisory`` holds numerical cross-checks that never change ``cyclic``."""

    p: object
    alpha: float
    cyclic: str
    rule: str
    evidence: ZeroSetReport
    advisory: dict = field(default_factory=dict)
    notes: list = field(default_factory=lambda: [REDUCIBILITY_NOTE])

    def to_dict(self):
        return {
            "p": self.p.to_records(),
            "alpha": self.alpha,
            "cyclic": self.cyclic,
            "rule": self.rule,
            "evidence": self.evidence.to_dict(),
            "advisory": self.advisory,
            "notes": list(self.notes),
        }


def _advisory(p, alpha, kind):
    from .dilation import dilation_sweep
    from .opa import opa_curve

    out = {}
    if p.constant_term() != 0:
        opa = opa_curve(p, alpha, 20, degrees=[2, 5, 10, 20])
        out["opa"] = {"degrees": opa.degrees, "dist_sq": opa.dist_sq, "trend": opa.trend}
    if kind != "interior_zero" and p.constant_term() != 0:
        curve = dilation_sweep(p, alpha, check=False)
        out["dilation"] = {"exponent": curve.exponent,
                           "loglog_slope": curve.fit.loglog_slope}
    return out


def classify(p, alpha, zero_report=None, seed=0, resolution=16, advisory=False):
    """Verdict for p at alpha.

    An :class:`Inconclusive` boundary classification is only fatal when the
    verdict depends on it, i.e. for alpha > 3/2.
    """
    if zero_report is None:
        try:
            zero_report = classify_zero_set(p, resolution=resolution, seed=seed)
        except Inconclusive as exc:
            if float(alpha) > 1.5 or exc.report is None:
                raise
            zero_report = exc.report
            zero_report.diagnostics["inconclusive"] = str(exc)
    cyclic, rule = decide(zero_report.kind, alpha)
    verdict = Verdict(p=p, alpha=float(alpha), cyclic=cyclic, rule=rule, evidence=zero_report)
    if advisory:
        verdict.advisory = _advisory(p, float(alpha), zero_report.kind)
    return verdict
