"""Time loop: RATTLE stepping with diagnostics, outcome classification and checkpoints."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import diagnostics as dg
from .dynamics import DEFAULT_LOCAL_RADIUS, SimState, constraint_residual, energy, tangency_residual
from .rattle import ProjectionFailure, RattleConfig, rattle_step

log = logging.getLogger(__name__)

FLIPPED = "flipped"
PROJECTION_FAILURE = "projection-failure"
DISPERSED = "dispersed"
DISPERSED_TRIVIAL = "dispersed-trivial"
INCONCLUSIVE = "inconclusive"

ORIGIN_COLUMNS = ("t", "w_origin", "trace_H", "det_H", "s_gauss", "s_mean")
ENERGY_COLUMNS = ("t", "E_kin", "E_pot", "E_tot", "E_kin_local", "E_pot_local", "E_tot_local")
CONSTRAINT_COLUMNS = ("t", "max_abs_phi", "max_abs_qp", "lambda_max", "projection_iters")
SLICE_COLUMNS = ("t", "direction", "r", "w", "s", "r_over_s")

TRIVIAL_ENERGY = 1e-14


@dataclass
class EvolutionOptions:
    t_end: float
    cadence: int = 8
    local_radius: float = DEFAULT_LOCAL_RADIUS
    dispersal_fraction: float = 0.1
    slice_times: Sequence[float] = ()
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")
        if not 0.0 < self.dispersal_fraction < 1.0:
            raise ValueError("dispersal_fraction must lie in (0, 1)")


@dataclass
class EvolutionResult:
    state: SimState
    outcome: str
    flip: Optional[dg.FlipEvent] = None
    failure: Optional[str] = None
    dispersal_time: Optional[float] = None
    origin_rows: List[tuple] = field(default_factory=list)
    energy_rows: List[tuple] = field(default_factory=list)
    constraint_rows: List[tuple] = field(default_factory=list)
    slice_rows: List[tuple] = field(default_factory=list)
    minima: dict = field(default_factory=dict)
    max_constraint: float = 0.0
    max_tangency: float = 0.0
    steps: int = 0

    def scaling_series(self, method=dg.GAUSS):
        col = 4 if method == dg.GAUSS else 5
        series = dg.ScalingSeries(method=method)
        for row in self.origin_rows:
            if not math.isnan(row[col]):
                series.append(row[0], row[col])
        return series

    def energy_array(self):
        return np.array(self.energy_rows, dtype=np.float64).reshape(-1, len(ENERGY_COLUMNS))

    def hover_duration(self, band=0.05):
        t, s = self.scaling_series().arrays()
        return dg.hover_duration(t, s, band)

    def summary(self):
        out = {
            "outcome": self.outcome,
            "t_final": self.state.t,
            "steps": self.state.step,
            "max_abs_phi": self.max_constraint,
            "max_abs_qp": self.max_tangency,
            "hover_duration": self.hover_duration(),
        }
        if self.flip is not None:
            out.update(flip_step=self.flip.step_index, flip_time=self.flip.time,
                       flip_w_before=self.flip.w_origin_before, flip_w_after=self.flip.w_origin_after)
        if self.failure:
            out["failure"] = self.failure
        if self.dispersal_time is not None:
            out["dispersal_time"] = self.dispersal_time
        t, s = self.scaling_series().arrays()
        if s.size:
            k = int(np.argmin(s))
            out.update(s_min=float(s[k]), t_s_min=float(t[k]))
        for d, (t_min, w_min, w0) in self.minima.items():
            out[f"t_min_{d}"] = t_min
            out[f"w_min_{d}"] = w_min
            out[f"w_min0_{d}"] = w0
        return out


def _origin_row(state):
    w = state.q[2]
    H = dg.hessian_at_origin(w)
    sg = dg.scaling_from_hessian(H, dg.GAUSS)
    sm = dg.scaling_from_hessian(H, dg.MEAN)
    nan = float("nan")
    return (state.t, float(w[0, 0]), float(H[0, 0] + H[1, 1]), float(np.linalg.det(H)),
            nan if sg is None else sg, nan if sm is None else sm)


def _slice_rows(state, s):
    rows = []
    for d in dg.DIRECTIONS:
        prof = dg.extract_slice(state.q[2], d, state.t)
        for r, w in zip(prof.radii, prof.w_values):
            rows.append((state.t, d, float(r), float(w), s, r / s if s == s else float("nan")))
    return rows


def evolve(state: SimState, rattle: RattleConfig, opts: EvolutionOptions,
           on_checkpoint: Optional[Callable[[SimState], None]] = None) -> EvolutionResult:
    """Advance ``state`` to ``opts.t_end`` or until a terminal event.

    Terminal events are a flip of w(0,0) and a projection failure. A run
    that reaches ``t_end`` counts as dispersed when the local potential
    energy has dropped below ``dispersal_fraction`` of its peak and stayed
    there; ``dispersal_time`` records when it last went below.
    """
    n_steps = int(round((opts.t_end - state.t) / rattle.dt))
    result = EvolutionResult(state=state, outcome=INCONCLUSIVE)
    flips = dg.FlipDetector()
    trackers = [dg.MinimumTracker(d) for d in dg.DIRECTIONS]
    pending_slices = sorted(t for t in opts.slice_times if t >= state.t - 0.5 * rattle.dt)
    peak_local = 0.0
    last_s = float("nan")

    def sample(st, report=None):
        nonlocal peak_local, last_s
        row = _origin_row(st)
        last_s = row[4]
        result.origin_rows.append(row)
        e = energy(st, opts.local_radius)
        result.energy_rows.append((st.t, e.kinetic, e.potential, e.total,
                                   e.local_kinetic, e.local_potential, e.local_total))
        if report is not None:
            result.constraint_rows.append((st.t, report.constraint_residual_max, report.tangency_residual_max,
                                           report.lambda_max, report.projection_iters_max))
        peak_local = max(peak_local, e.local_potential)
        if peak_local > TRIVIAL_ENERGY and e.local_potential < opts.dispersal_fraction * peak_local:
            if result.dispersal_time is None:
                result.dispersal_time = st.t
        else:
            result.dispersal_time = None

    def observe(st):
        flips.update(st.t, st.q[2, 0, 0])
        for tr in trackers:
            tr.update(st.t, st.q[2])
        while pending_slices and st.t >= pending_slices[0] - 0.5 * rattle.dt:
            pending_slices.pop(0)
            result.slice_rows.extend(_slice_rows(st, last_s))

    result.max_constraint = float(np.max(np.abs(constraint_residual(state.q))))
    result.max_tangency = float(np.max(np.abs(tangency_residual(state.q, state.p))))
    sample(state)
    observe(state)

    f = None
    for _ in range(n_steps):
        try:
            state, report, f = rattle_step(state, rattle, force_q=f)
        except ProjectionFailure as exc:
            log.info("projection failure: %s", exc)
            result.failure = str(exc)
            result.outcome = PROJECTION_FAILURE
            break
        result.max_constraint = max(result.max_constraint, report.constraint_residual_max)
        result.max_tangency = max(result.max_tangency, report.tangency_residual_max)
        if state.step % opts.cadence == 0:
            sample(state, report)
        observe(state)
        if opts.checkpoint_every and on_checkpoint is not None and state.step % opts.checkpoint_every == 0:
            on_checkpoint(state)
        if flips.event is not None:
            ev = flips.event
            # step index relative to the start of this evolution
            result.flip = dg.FlipEvent(ev.step_index, ev.time, ev.w_origin_before, ev.w_origin_after)
            result.outcome = FLIPPED
            if state.step % opts.cadence != 0:
                sample(state, report)
            break

    result.state = state
    result.steps = state.step
    result.minima = {tr.direction: (tr.t_min, tr.w_min, tr.w_initial) for tr in trackers}
    if result.outcome == INCONCLUSIVE and state.step % opts.cadence != 0:
        sample(state)
    if result.outcome == INCONCLUSIVE:
        if peak_local <= TRIVIAL_ENERGY:
            result.outcome = DISPERSED_TRIVIAL
        elif result.dispersal_time is not None:
            result.outcome = DISPERSED
    return result
