"""Hierarchical fitting: from datasets and a diagram to a system posterior.

The fit walks the diagram bottom-up.  Each component becomes a posterior
from its own prior (elicited, or zero-precision when none is given) and its
own data.  Each group fuses its children's moment curves, converts the
fused curve back to a process, blends in the node's elicited prior if any,
and conditions on the node's own data if any.  The root always ends as a
process, so credible bands are available on the full union grid.

The system-only variant ignores the tree and fits the root's data alone,
with identical output formatting, so band widths are directly comparable.
"""

from __future__ import annotations

import os
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .bsp import BetaStacyProcess, credible_interval, second_moment
from .dataio import CurveExport, Dataset
from .errors import BindingError
from .fusion import (
    DEFAULT_PRECISION_CAP,
    merge_priors,
    moments_of,
    recover_precision,
)
from .rbd import RbdNode, SystemSpec

__all__ = ["FitResult", "fit_system", "fit_system_only", "curve_export", "precision_cap_from_env"]

PRECISION_CAP_ENV = "RELFUSE_PRECISION_CAP"


def precision_cap_from_env(default: float = DEFAULT_PRECISION_CAP) -> float:
    """Precision cap, overridable through the environment."""
    raw = os.environ.get(PRECISION_CAP_ENV)
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{PRECISION_CAP_ENV} must be a number, found {raw!r}") from None
    if value <= 0.0:
        raise ValueError(f"{PRECISION_CAP_ENV} must be positive")
    return value


@dataclass(frozen=True)
class FitResult:
    """System posterior plus the per-node posteriors computed on the way."""

    posterior: BetaStacyProcess
    node_posteriors: dict[str, BetaStacyProcess] = field(default_factory=dict)


def _dataset_map(datasets) -> dict[str, Dataset]:
    if isinstance(datasets, Mapping):
        return dict(datasets)
    out = {}
    for ds in datasets:
        if ds.label in out:
            raise BindingError(f"duplicate dataset for node '{ds.label}'")
        out[ds.label] = ds
    return out


def fit_system(
    spec: SystemSpec,
    datasets,
    priors: Mapping[str, BetaStacyProcess] | None = None,
    max_precision: float = DEFAULT_PRECISION_CAP,
) -> FitResult:
    """Fit the full hierarchy described by ``spec``.

    ``datasets`` is a mapping or iterable of per-label datasets; ``priors``
    maps labels to elicited prior processes.  Unbound components default to
    zero-precision priors (their posterior is purely empirical).
    """
    data_map = _dataset_map(datasets)
    prior_map = dict(priors) if priors else {}
    posteriors: dict[str, BetaStacyProcess] = {}

    def node_inputs(node: RbdNode):
        label = node.binding_label
        if label is None:
            return None, None, None
        ds = data_map.get(spec.data_name(label))
        pr = prior_map.get(spec.prior_name(label))
        return label, ds, pr

    def fit_node(node: RbdNode, is_root: bool):
        from .bsp import posterior_update

        label, ds, elicited = node_inputs(node)
        if node.kind == "component":
            prior = elicited if elicited is not None else BetaStacyProcess.noninformative()
            post = posterior_update(prior, ds.samples if ds else ())
            if label is not None:
                posteriors[label] = post
            return moments_of(post)
        curves = [fit_node(child, False) for child in node.children]
        fused_curve = _fold(node, curves)
        if ds is None and elicited is None and not is_root:
            return fused_curve
        process = recover_precision(fused_curve, max_precision)
        if elicited is not None:
            process = merge_priors(process, elicited, max_precision)
        post = posterior_update(process, ds.samples if ds else ())
        if label is not None:
            posteriors[label] = post
        elif is_root:
            posteriors.setdefault("<root>", post)
        return moments_of(post)

    def _fold(node: RbdNode, curves):
        from .fusion import align_grids, combine_parallel, combine_series

        combine = combine_series if node.kind == "series" else combine_parallel
        acc = curves[0]
        for nxt in curves[1:]:
            a, b = align_grids(acc, nxt)
            acc = combine(a, b)
        return acc

    root = spec.root
    if root.kind == "component":
        fit_node(root, True)
        label = root.binding_label
        return FitResult(posteriors[label], posteriors)
    fit_node(root, True)
    root_label = root.binding_label if root.binding_label is not None else "<root>"
    return FitResult(posteriors[root_label], posteriors)


def fit_system_only(
    spec: SystemSpec,
    datasets,
    priors: Mapping[str, BetaStacyProcess] | None = None,
    max_precision: float = DEFAULT_PRECISION_CAP,
) -> FitResult:
    """Fit from the root's own data alone, ignoring the rest of the tree."""
    from .bsp import posterior_update

    data_map = _dataset_map(datasets)
    prior_map = dict(priors) if priors else {}
    label = spec.root.binding_label
    if label is None:
        raise BindingError("system-only fit needs a binding label on the root node")
    ds = data_map.get(spec.data_name(label))
    if ds is None:
        raise BindingError(f"system-only fit needs data bound to the root label '{label}'")
    prior = prior_map.get(spec.prior_name(label))
    if prior is None:
        prior = BetaStacyProcess.noninformative()
    post = posterior_update(prior, ds.samples)
    return FitResult(post, {label: post})


def curve_export(process: BetaStacyProcess, level: float = 0.95) -> CurveExport:
    """Columns for export: estimate, second moment, band, precision, flags.

    Rows cover the estimable grid points.  Terminal rows (base measure 1)
    are flagged and report the precision carried from the last non-terminal
    point, matching the left-limit convention for a precision that is
    undefined exactly at the terminal time.
    """
    keep = process.estimable
    grid = process.grid[keep]
    means = process.base.values[keep]
    seconds = np.array([second_moment(process, float(t)) for t in grid])
    bands = [credible_interval(process, float(t), level) for t in grid]
    lower = np.array([b[0] for b in bands]) if bands else np.empty(0)
    upper = np.array([b[1] for b in bands]) if bands else np.empty(0)
    precision = process.precision[keep].copy()
    flags = []
    last_defined = np.nan
    for i in range(grid.size):
        if np.isnan(precision[i]):
            precision[i] = last_defined
            flags.append("terminal")
        else:
            last_defined = precision[i]
            flags.append("")
    return CurveExport(grid, means, seconds, lower, upper, precision, tuple(flags))
