"""Relative squared error and its aggregation over test cases."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ShapeError


def rse(predicted, reference):
    """Relative squared error ``sum((y - r)^2) / sum((r - mean(r))^2)``.

    The reference (ground-truth) series sets the normalising variance, so a
    prediction equal to the reference mean scores exactly 1.
    """
    y = np.asarray(predicted, float).ravel()
    r = np.asarray(reference, float).ravel()
    if y.shape != r.shape:
        raise ShapeError("predicted and reference lengths differ")
    if r.size < 2:
        raise ConfigError("RSE needs at least two samples")
    denom = float(np.sum((r - r.mean()) ** 2))
    if denom == 0.0:
        raise ConfigError("RSE undefined for a constant reference series")
    return float(np.sum((y - r) ** 2)) / denom


@dataclass
class EvalResult:
    """Per-case, per-DOF RSE.

    ``overall`` averages over every (case, DOF) entry; ``overall_sum`` adds
    them up.  Both aggregations are kept because neither is clearly the
    one used for published tables.
    """

    dofs: tuple
    cases: list  # list of {dof: rse}
    predictions: list = field(default_factory=list, repr=False)
    references: list = field(default_factory=list, repr=False)

    @property
    def per_dof(self):
        return {d: float(np.mean([c[d] for c in self.cases])) for d in self.dofs}

    @property
    def overall(self):
        return float(np.mean([c[d] for c in self.cases for d in self.dofs]))

    @property
    def overall_sum(self):
        return float(np.sum([c[d] for c in self.cases for d in self.dofs]))

    def rows(self):
        out = []
        for i, case in enumerate(self.cases):
            for d in self.dofs:
                out.append((f"case{i}", d, case[d]))
        for d, v in self.per_dof.items():
            out.append(("mean", d, v))
        out.append(("overall_mean", "all", self.overall))
        out.append(("overall_sum", "all", self.overall_sum))
        return out
