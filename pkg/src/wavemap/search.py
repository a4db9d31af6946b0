"""Bisection on the initial-data amplitude for the blow-up threshold A*.

A run is "flipped" (super-critical) when w(0,0) switches pole or the
projection fails, "dispersed" when the local potential energy has decayed
and stayed down by ``t_end``, and "inconclusive" otherwise.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .evolution import (DISPERSED as EV_DISPERSED, DISPERSED_TRIVIAL, FLIPPED as EV_FLIPPED,
                        PROJECTION_FAILURE, EvolutionOptions, evolve)
from .grid import Grid
from .initial_data import InitialDataParams, build_initial_state
from .rattle import RattleConfig

log = logging.getLogger(__name__)

FLIPPED = "flipped"
DISPERSED = "dispersed"
INCONCLUSIVE = "inconclusive"
OUTCOMES = (DISPERSED, FLIPPED, INCONCLUSIVE)

TRACE_COLUMNS = ("run", "A", "outcome", "flip_time", "hover_duration", "t_end",
                 "bracket_lo", "bracket_hi", "note")


class BracketInvalid(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    A_lo: float
    A_hi: float
    tol_A: float = 1e-8
    max_runs: int = 64
    N: int = 161
    dt_over_h: float = 0.25
    t_end: float = 1.5
    t_end_cap: float = 6.0
    initial: InitialDataParams = field(default_factory=lambda: InitialDataParams(A=0.0))
    cadence: int = 8
    local_radius: float = 0.25
    dispersal_fraction: float = 0.1

    def __post_init__(self):
        if not self.A_lo < self.A_hi:
            raise ValueError(f"need A_lo < A_hi, got [{self.A_lo}, {self.A_hi}]")
        if not self.tol_A > 0:
            raise ValueError("tol_A must be positive")
        if self.max_runs < 2:
            raise ValueError("max_runs must allow the two validation runs")
        if not self.t_end > 0 or self.t_end_cap < self.t_end:
            raise ValueError("need 0 < t_end <= t_end_cap")

    @property
    def dt(self):
        return self.dt_over_h / (self.N - 1)


@dataclass(frozen=True)
class RunRecord:
    A: float
    outcome: str
    flip_time: Optional[float] = None
    hover_duration: float = 0.0
    t_end: float = math.nan
    note: str = ""


@dataclass(frozen=True)
class TraceEntry:
    run: int
    record: RunRecord
    bracket: tuple


@dataclass
class SearchTrace:
    entries: List[TraceEntry] = field(default_factory=list)

    def add(self, record, bracket):
        self.entries.append(TraceEntry(len(self.entries) + 1, record, tuple(bracket)))

    def __len__(self):
        return len(self.entries)

    def widths(self):
        return [e.bracket[1] - e.bracket[0] for e in self.entries]

    def rows(self):
        for e in self.entries:
            r = e.record
            yield (e.run, r.A, r.outcome, math.nan if r.flip_time is None else r.flip_time,
                   r.hover_duration, r.t_end, e.bracket[0], e.bracket[1], r.note)

    def subcritical(self):
        return [e.record for e in self.entries if e.record.outcome == DISPERSED]


def run_evolution(A, cfg: SearchConfig, t_end=None, on_checkpoint=None, checkpoint_every=0):
    """Evolve the amplitude-``A`` initial data of ``cfg``; returns the EvolutionResult."""
    grid = Grid(cfg.N)
    state = build_initial_state(cfg.initial.with_amplitude(A), grid)
    opts = EvolutionOptions(t_end=cfg.t_end if t_end is None else t_end, cadence=cfg.cadence,
                            local_radius=cfg.local_radius, dispersal_fraction=cfg.dispersal_fraction,
                            checkpoint_every=checkpoint_every)
    return evolve(state, RattleConfig(dt=cfg.dt), opts, on_checkpoint=on_checkpoint)


def record_from_result(A, result, t_end):
    """Map an evolution outcome onto the three search outcomes."""
    hover = result.hover_duration()
    if result.outcome == EV_FLIPPED:
        return RunRecord(A, FLIPPED, result.flip.time, hover, t_end)
    if result.outcome == PROJECTION_FAILURE:
        log.warning("A=%.17g: projection failure at t=%.6g counted as flipped", A, result.state.t)
        return RunRecord(A, FLIPPED, result.state.t, hover, t_end, "projection-failure")
    if result.outcome in (EV_DISPERSED, DISPERSED_TRIVIAL):
        note = "trivial" if result.outcome == DISPERSED_TRIVIAL else ""
        return RunRecord(A, DISPERSED, None, hover, t_end, note)
    return RunRecord(A, INCONCLUSIVE, None, hover, t_end)


def classify_run(A, cfg: SearchConfig, t_end=None) -> RunRecord:
    t_end = cfg.t_end if t_end is None else t_end
    try:
        result = run_evolution(A, cfg, t_end)
    except (FloatingPointError, ValueError, RuntimeError) as exc:
        log.error("A=%.17g: evolution error treated as inconclusive: %s", A, exc)
        return RunRecord(A, INCONCLUSIVE, None, 0.0, t_end, f"error: {exc}")
    return record_from_result(A, result, t_end)


class _Runner:
    """Counts runs against the budget and applies the t_end doubling rule."""

    def __init__(self, cfg, classifier):
        self.cfg = cfg
        self.classifier = classifier
        self.runs = 0

    def __call__(self, A):
        t_end = self.cfg.t_end
        while True:
            if self.runs >= self.cfg.max_runs:
                raise BudgetExhausted(f"run budget of {self.cfg.max_runs} exhausted")
            self.runs += 1
            rec = self.classifier(A, t_end)
            if rec.outcome != INCONCLUSIVE:
                return rec
            if t_end * 2.0 > self.cfg.t_end_cap * (1 + 1e-12):
                log.warning("A=%.17g inconclusive up to t_end=%.6g; counted as dispersed", A, t_end)
                return replace(rec, outcome=DISPERSED, note=(rec.note + " no-flip-by-cap").strip())
            t_end *= 2.0
            log.info("A=%.17g inconclusive; retrying with t_end=%.6g", A, t_end)


def bisect(cfg: SearchConfig, classifier: Optional[Callable[[float, float], RunRecord]] = None,
           on_record: Optional[Callable[[TraceEntry], None]] = None):
    """Bisection for A*. ``classifier(A, t_end)`` defaults to a full evolution.

    Returns ``(A_star, trace)`` with ``A_star`` the midpoint of the final
    bracket, whose width is below ``cfg.tol_A``.
    """
    if classifier is None:
        def classifier(A, t_end):
            return classify_run(A, cfg, t_end)
    run = _Runner(cfg, classifier)
    trace = SearchTrace()
    lo, hi = cfg.A_lo, cfg.A_hi

    def note(rec):
        trace.add(rec, (lo, hi))
        if on_record is not None:
            on_record(trace.entries[-1])

    rec_lo = run(lo)
    note(rec_lo)
    if rec_lo.outcome != DISPERSED:
        raise BracketInvalid(f"A_lo={lo} did not disperse ({rec_lo.outcome})")
    rec_hi = run(hi)
    note(rec_hi)
    if rec_hi.outcome != FLIPPED:
        raise BracketInvalid(f"A_hi={hi} did not flip ({rec_hi.outcome})")

    while hi - lo >= cfg.tol_A:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break  # bracket at floating-point resolution
        rec = run(mid)
        if rec.outcome == FLIPPED:
            hi = mid
        else:
            lo = mid
        note(rec)
    return 0.5 * (lo + hi), trace


def max_bisection_runs(A_lo, A_hi, tol_A):
    return max(0, math.ceil(math.log2((A_hi - A_lo) / tol_A)))


def hover_growth_ok(trace: SearchTrace, last=4):
    """Hover duration increases along the last ``last`` sub-critical entries (by A).

    Soft check: returns ``(ok, durations)`` and logs when violated.
    """
    sub = sorted(trace.subcritical(), key=lambda r: r.A)[-last:]
    durations = [r.hover_duration for r in sub]
    ok = all(b >= a for a, b in zip(durations, durations[1:]))
    if not ok:
        log.warning("hover duration not monotone on the sub-critical side: %s", durations)
    return ok, durations


def resolution_trend_ok(a_star_by_n):
    """A*(N) non-decreasing over increasing N (soft check, logged)."""
    ns = sorted(a_star_by_n)
    values = [a_star_by_n[n] for n in ns]
    ok = all(b >= a for a, b in zip(values, values[1:]))
    if not ok:
        log.warning("A*(N) not non-decreasing: %s", dict(zip(ns, values)))
    return ok


def threshold_classifier(threshold, flip_time=0.5):
    """Synthetic monotone classifier: flips iff A >= threshold."""
    def classify(A, t_end):
        if A >= threshold:
            return RunRecord(A, FLIPPED, flip_time, 0.0, t_end)
        hover = 1.0 / (1.0 + abs(threshold - A)) if np.isfinite(A) else 0.0
        return RunRecord(A, DISPERSED, None, hover, t_end)
    return classify
