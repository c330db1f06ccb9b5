# -*- coding: utf-8 -*-

"""Multiuser detectors with RAKE front-ends."""

# Copyright (c) 2024 SUSE LLC
#
# This file is part of coop_cdma_sim. coop_cdma_sim provides an
# api and command line utilities for simulating the uplink of
# cooperative DS-CDMA systems.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

import itertools
import math

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from coop_cdma_sim.exceptions import DetectorException
from coop_cdma_sim.sysmodel import Constellation

ML_ENUMERATION_LIMIT = 20
ML_CHUNK = 4096
MB_SIC_BRANCHES = 4


class Reliability(Enum):
    RELIABLE = 'reliable'
    UNRELIABLE = 'unreliable'


class Detector(str, Enum):
    RAKE = 'rake'
    MMSE = 'mmse'
    SIC = 'sic'
    MBSIC = 'mbsic'
    GLSIC = 'glsic'
    MBGLSIC = 'mbglsic'
    MLORACLE = 'mloracle'


@dataclass(frozen=True)
class DetectorContext:
    """
    Everything a detector needs besides the observation.

    eff holds one effective signature per column (M or 2M rows).
    """
    eff: np.ndarray
    constellation: Constellation
    d_th: float
    n_group: int
    noise_variance: float

    def __post_init__(self):
        if self.eff.ndim != 2:
            raise DetectorException(
                'Effective signatures must be a 2-D array, one user '
                'per column.'
            )

        if not 1 <= self.n_group <= self.users:
            raise DetectorException(
                f'Group size must satisfy 1 <= n <= {self.users}, '
                f'{self.n_group} provided.'
            )

    @property
    def users(self) -> int:
        return self.eff.shape[1]

    @cached_property
    def energies(self) -> np.ndarray:
        return np.sum(np.abs(self.eff) ** 2, axis=0)

    @cached_property
    def power_order(self) -> Tuple[int, ...]:
        """Users by descending signature energy, ties by index."""
        return tuple(
            sorted(range(self.users), key=lambda k: (-self.energies[k], k))
        )

    @cached_property
    def mmse_filters(self) -> np.ndarray:
        gram = self.eff.conj().T @ self.eff
        regularized = gram + self.noise_variance * np.eye(self.users)

        if self.noise_variance == 0 and (
            np.linalg.matrix_rank(gram) < self.users
        ):
            raise DetectorException(
                'Singular MMSE system: noise variance is zero and the '
                'signatures are linearly dependent.'
            )

        try:
            # (E E^H + s I)^-1 E == E (E^H E + s I)^-1
            filters = self.eff @ np.linalg.solve(
                regularized,
                np.eye(self.users)
            )
        except np.linalg.LinAlgError as error:
            raise DetectorException(
                f'Singular MMSE system: {error}'
            ) from error

        return filters


@dataclass(frozen=True)
class CandidateList:
    """
    One complete vector of tentative decisions.

    ordering is the detection order actually used, list_count the
    number of candidate lists the detector compared to produce it.
    """
    decisions: np.ndarray
    ordering: Tuple[int, ...]
    branch_id: int = 0
    list_count: int = 1


@dataclass(frozen=True)
class BranchSet:
    orderings: Tuple[Tuple[int, ...], ...]


def rake(y: np.ndarray, eff_k: np.ndarray) -> complex:
    """
    Matched filter output normalized so an isolated noiseless user
    yields its transmitted point.
    """
    y = np.asarray(y)
    eff_k = np.asarray(eff_k)

    if y.shape != eff_k.shape:
        raise DetectorException(
            f'Observation of length {y.shape} does not match '
            f'signature of length {eff_k.shape}.'
        )

    energy = np.vdot(eff_k, eff_k).real

    if energy == 0:
        raise DetectorException('RAKE receiver matched to a zero signature.')

    return np.vdot(eff_k, y) / energy


def slice_symbol(u: complex, constellation: Constellation) -> complex:
    """Nearest constellation point, ties to the smallest index."""
    return constellation.points[np.argmin(np.abs(constellation.points - u))]


def is_reliable(
    u: complex,
    constellation: Constellation,
    d_th: float
) -> bool:
    """
    Return False when u falls in the grey region.

    The grey region is the union of bands of half-width d_th around
    every decision boundary, on each axis separating points.
    """
    for boundary in constellation.real_boundaries:
        if abs(u.real - boundary) < d_th:
            return False

    for boundary in constellation.imag_boundaries:
        if abs(u.imag - boundary) < d_th:
            return False

    return True


def reliability(
    soft: Sequence[complex],
    constellation: Constellation,
    d_th: float
) -> Tuple[Reliability, ...]:
    return tuple(
        Reliability.RELIABLE if is_reliable(u, constellation, d_th)
        else Reliability.UNRELIABLE
        for u in soft
    )


def list_metric(y: np.ndarray, ctx: DetectorContext, decisions) -> float:
    """Squared residual norm ||y - H b||^2 of a candidate list."""
    residual = y - ctx.eff @ np.asarray(decisions)
    return float(np.vdot(residual, residual).real)


def _check_permutation(ordering: Sequence[int], users: int):
    if sorted(ordering) != list(range(users)):
        raise DetectorException(
            f'Ordering {list(ordering)} is not a permutation of '
            f'0..{users - 1}.'
        )


def _reorder(
    residual: np.ndarray,
    pending: Sequence[int],
    ctx: DetectorContext
) -> List[int]:
    """Rank remaining users by residual RAKE magnitude."""
    magnitude = {
        k: abs(rake(residual, ctx.eff[:, k])) for k in pending
    }
    return sorted(pending, key=lambda k: (-magnitude[k], k))


def _sic_stages(
    residual: np.ndarray,
    pending: List[int],
    decisions: np.ndarray,
    realized: List[int],
    ctx: DetectorContext,
    forced: bool,
    group_size: int
):
    """
    Slice, cancel and re-rank group by group until no user remains.

    decisions and realized are updated in place.
    """
    while pending:
        stage, pending = pending[:group_size], pending[group_size:]

        for k in stage:
            decisions[k] = slice_symbol(
                rake(residual, ctx.eff[:, k]),
                ctx.constellation
            )

        residual = residual - ctx.eff[:, stage] @ decisions[stage]
        realized.extend(stage)

        if not forced:
            pending = _reorder(residual, pending, ctx)

    return residual


def _initial_order(ctx: DetectorContext, forced_ordering) -> List[int]:
    if forced_ordering is None:
        return list(ctx.power_order)

    _check_permutation(forced_ordering, ctx.users)
    return [int(k) for k in forced_ordering]


def conventional_sic(
    y: np.ndarray,
    ctx: DetectorContext,
    forced_ordering: Optional[Sequence[int]] = None,
    group_size: Optional[int] = None
) -> CandidateList:
    """
    Successive interference cancellation with RAKE receivers.

    Stages hold group_size users (default ctx.n_group); the first
    stage follows the power order, later ones the residual RAKE
    magnitude unless a forced ordering is given.
    """
    group_size = group_size or ctx.n_group
    decisions = np.zeros(ctx.users, dtype=complex)
    realized = []

    _sic_stages(
        np.asarray(y, dtype=complex),
        _initial_order(ctx, forced_ordering),
        decisions,
        realized,
        ctx,
        forced_ordering is not None,
        group_size
    )

    return CandidateList(decisions=decisions, ordering=tuple(realized))


def standard_sic(y: np.ndarray, ctx: DetectorContext) -> CandidateList:
    """One user per stage, the classical SIC baseline."""
    return conventional_sic(y, ctx, group_size=1)


def gl_sic(
    y: np.ndarray,
    ctx: DetectorContext,
    forced_ordering: Optional[Sequence[int]] = None
) -> CandidateList:
    """
    Greedy list-based SIC.

    Stages of n_group users run in reliable mode until the first stage
    holding an unreliable soft value. There the detection tree splits
    over every constellation assignment of the unreliable users; each
    branch is cancelled and completed by conventional SIC and the list
    with the smallest residual norm is returned.
    """
    forced = forced_ordering is not None
    pending = _initial_order(ctx, forced_ordering)
    residual = np.asarray(y, dtype=complex)
    decisions = np.zeros(ctx.users, dtype=complex)
    realized = []
    points = ctx.constellation.points

    while pending:
        stage, rest = pending[:ctx.n_group], pending[ctx.n_group:]
        soft = [rake(residual, ctx.eff[:, k]) for k in stage]
        verdicts = reliability(soft, ctx.constellation, ctx.d_th)

        for k, u in zip(stage, soft):
            decisions[k] = slice_symbol(u, ctx.constellation)

        if all(v is Reliability.RELIABLE for v in verdicts):
            residual = residual - ctx.eff[:, stage] @ decisions[stage]
            realized.extend(stage)
            pending = rest if forced else _reorder(residual, rest, ctx)
            continue

        unreliable = [
            k for k, v in zip(stage, verdicts)
            if v is Reliability.UNRELIABLE
        ]
        candidates = []

        for branch_id, assignment in enumerate(
            itertools.product(points, repeat=len(unreliable))
        ):
            branch_decisions = decisions.copy()
            branch_decisions[unreliable] = assignment
            branch_realized = realized + stage

            branch_residual = (
                residual - ctx.eff[:, stage] @ branch_decisions[stage]
            )
            branch_pending = (
                list(rest) if forced
                else _reorder(branch_residual, rest, ctx)
            )
            _sic_stages(
                branch_residual,
                branch_pending,
                branch_decisions,
                branch_realized,
                ctx,
                forced,
                ctx.n_group
            )
            candidates.append(CandidateList(
                decisions=branch_decisions,
                ordering=tuple(branch_realized),
                branch_id=branch_id
            ))

        metrics = [list_metric(y, ctx, c.decisions) for c in candidates]
        best = candidates[int(np.argmin(metrics))]

        return CandidateList(
            decisions=best.decisions,
            ordering=best.ordering,
            branch_id=best.branch_id,
            list_count=len(candidates)
        )

    return CandidateList(decisions=decisions, ordering=tuple(realized))


def mb_orderings(base: Sequence[int]) -> BranchSet:
    """
    Return O, its right cyclic shifts by 1..K-1 and O reversed.
    """
    base = [int(k) for k in base]
    _check_permutation(base, len(base))

    users = len(base)
    shifts = [
        tuple(base[-shift:] + base[:-shift]) for shift in range(1, users)
    ]

    orderings = [tuple(base)] + shifts + [tuple(reversed(base))]

    return BranchSet(orderings=tuple(orderings))


def refine_branches(
    y: np.ndarray,
    ctx: DetectorContext,
    branches: Sequence[CandidateList]
) -> CandidateList:
    """
    Modified ML fusion of parallel branches.

    Start from the branch with the smallest metric, then for each user
    in ascending index try that user's decision from every other
    branch and keep the substitution that lowers the metric most.
    """
    metrics = [list_metric(y, ctx, b.decisions) for b in branches]
    base_index = int(np.argmin(metrics))
    base = branches[base_index]

    current = base.decisions.copy()
    current_metric = metrics[base_index]

    for k in range(ctx.users):
        best_value = current[k]
        best_metric = current_metric

        for index, branch in enumerate(branches):
            if index == base_index or branch.decisions[k] == current[k]:
                continue

            trial = current.copy()
            trial[k] = branch.decisions[k]
            metric = list_metric(y, ctx, trial)

            if metric < best_metric:
                best_value, best_metric = branch.decisions[k], metric

        current[k] = best_value
        current_metric = best_metric

    return CandidateList(
        decisions=current,
        ordering=base.ordering,
        branch_id=base_index,
        list_count=sum(b.list_count for b in branches)
    )


def mb_gl_sic(y: np.ndarray, ctx: DetectorContext) -> CandidateList:
    """Multi-branch GL-SIC over the K + 1 orderings of mb_orderings."""
    first = gl_sic(y, ctx)
    orderings = mb_orderings(first.ordering).orderings
    branches = [first] + [
        gl_sic(y, ctx, forced_ordering=ordering)
        for ordering in orderings[1:]
    ]
    return refine_branches(y, ctx, branches)


def mb_sic(
    y: np.ndarray,
    ctx: DetectorContext,
    branches: int = MB_SIC_BRANCHES
) -> CandidateList:
    """
    Multi-branch SIC: one-user-per-stage SIC under the first
    branches orderings of mb_orderings, best residual norm wins.
    """
    first = standard_sic(y, ctx)
    orderings = mb_orderings(first.ordering).orderings[1:branches]
    candidates = [first] + [
        conventional_sic(y, ctx, forced_ordering=ordering, group_size=1)
        for ordering in orderings
    ]
    metrics = [list_metric(y, ctx, c.decisions) for c in candidates]
    best = int(np.argmin(metrics))

    return CandidateList(
        decisions=candidates[best].decisions,
        ordering=candidates[best].ordering,
        branch_id=best,
        list_count=len(candidates)
    )


def rake_bank(y: np.ndarray, ctx: DetectorContext) -> CandidateList:
    """Bank of single-user RAKE receivers, no cancellation."""
    decisions = np.array([
        slice_symbol(rake(y, ctx.eff[:, k]), ctx.constellation)
        for k in range(ctx.users)
    ])
    return CandidateList(
        decisions=decisions,
        ordering=tuple(range(ctx.users))
    )


def mmse_linear(y: np.ndarray, ctx: DetectorContext) -> CandidateList:
    """Linear MMSE receiver per user followed by the slicer."""
    soft = ctx.mmse_filters.conj().T @ np.asarray(y)
    decisions = np.array([
        slice_symbol(u, ctx.constellation) for u in soft
    ])
    return CandidateList(
        decisions=decisions,
        ordering=tuple(range(ctx.users))
    )


def ml_oracle(y: np.ndarray, ctx: DetectorContext) -> CandidateList:
    """
    Exhaustive maximum likelihood search over all N_c^K vectors.

    Ties resolve to the lexicographically smallest index vector.
    """
    points = ctx.constellation.points
    bits = ctx.users * math.log2(len(points))

    if bits > ML_ENUMERATION_LIMIT:
        raise DetectorException(
            f'ML enumeration of {ctx.users} users needs {bits:g} bits, '
            f'limit is {ML_ENUMERATION_LIMIT}.'
        )

    y = np.asarray(y)
    combinations = itertools.product(range(len(points)), repeat=ctx.users)
    best_metric = np.inf
    best_indices = None

    while True:
        chunk = np.array(list(itertools.islice(combinations, ML_CHUNK)))

        if chunk.size == 0:
            break

        residual = y[:, None] - ctx.eff @ points[chunk].T
        metrics = np.sum(np.abs(residual) ** 2, axis=0)
        position = int(np.argmin(metrics))

        if metrics[position] < best_metric:
            best_metric = metrics[position]
            best_indices = chunk[position]

    return CandidateList(
        decisions=points[best_indices],
        ordering=tuple(range(ctx.users)),
        list_count=len(points) ** ctx.users
    )


DETECTORS = {
    Detector.RAKE: rake_bank,
    Detector.MMSE: mmse_linear,
    Detector.SIC: standard_sic,
    Detector.MBSIC: mb_sic,
    Detector.GLSIC: gl_sic,
    Detector.MBGLSIC: mb_gl_sic,
    Detector.MLORACLE: ml_oracle
}


def get_detector(name) -> Callable:
    """Return the detector callable registered for name."""
    try:
        return DETECTORS[Detector(name)]
    except ValueError:
        raise DetectorException(
            f'Unknown detector {name}. Expected one of: '
            f'{", ".join(d.value for d in Detector)}.'
        )


def ml_guard_ok(users: int, constellation: Constellation) -> bool:
    return users * math.log2(constellation.size) <= ML_ENUMERATION_LIMIT
