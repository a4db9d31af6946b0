"""Run configuration: sectioned ``key = value`` files and a provenance hash.

Example::

    [grid]
    N = 161
    dt_over_h = 0.25

    [initial]
    A = 1.18
    B = 0.8

    [evolution]
    t_end = 1.5
    cadence = 8
    slice_times = 0.0, 0.5

Unlisted keys take their defaults. The hash is the SHA-256 of the
canonical rendering, so it does not depend on comments or key order.
"""
import configparser
import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from .evolution import EvolutionOptions
from .initial_data import InitialDataParams
from .rattle import RattleConfig
from .search import SearchConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSettings:
    A_lo: float
    A_hi: float
    tol_A: float = 1e-8
    max_runs: int = 64
    t_end_cap: float = 6.0


@dataclass(frozen=True)
class RunConfig:
    N: int = 161
    dt_over_h: float = 0.25
    initial: InitialDataParams = field(default_factory=lambda: InitialDataParams(A=0.0))
    t_end: float = 1.5
    cadence: int = 8
    local_radius: float = 0.25
    dispersal_fraction: float = 0.1
    slice_times: Tuple[float, ...] = ()
    checkpoint_every: int = 0
    projection_tol: float = 1e-12
    max_projection_iters: int = 50
    fit_window: Optional[Tuple[float, float]] = None
    search: Optional[SearchSettings] = None

    def __post_init__(self):
        if self.N < 9:
            raise ConfigError("N must be at least 9")
        if not self.dt_over_h > 0:
            raise ConfigError("dt_over_h must be positive")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0")
        if self.cadence < 1:
            raise ConfigError("cadence must be >= 1")
        if not 0.0 < self.local_radius <= 1.0:
            raise ConfigError("local_radius must lie in (0, 1]")
        if not 0.0 < self.dispersal_fraction < 1.0:
            raise ConfigError("dispersal_fraction must lie in (0, 1)")
        if self.fit_window is not None and not self.fit_window[0] < self.fit_window[1]:
            raise ConfigError("fit window must satisfy t_lo < t_hi")

    @property
    def h(self):
        return 1.0 / (self.N - 1)

    @property
    def dt(self):
        return self.dt_over_h * self.h

    def rattle(self):
        return RattleConfig(dt=self.dt, projection_tol=self.projection_tol,
                            max_projection_iters=self.max_projection_iters)

    def evolution_options(self, t_end=None):
        return EvolutionOptions(t_end=self.t_end if t_end is None else t_end, cadence=self.cadence,
                                local_radius=self.local_radius, dispersal_fraction=self.dispersal_fraction,
                                slice_times=self.slice_times, checkpoint_every=self.checkpoint_every)

    def search_config(self):
        if self.search is None:
            raise ConfigError("config has no [search] section")
        s = self.search
        return SearchConfig(A_lo=s.A_lo, A_hi=s.A_hi, tol_A=s.tol_A, max_runs=s.max_runs,
                            N=self.N, dt_over_h=self.dt_over_h, t_end=self.t_end,
                            t_end_cap=max(s.t_end_cap, self.t_end), initial=self.initial,
                            cadence=self.cadence, local_radius=self.local_radius,
                            dispersal_fraction=self.dispersal_fraction)

    def with_amplitude(self, A):
        return replace(self, initial=self.initial.with_amplitude(A))

    def to_ini(self):
        """Canonical text rendering; floats use ``repr`` so parsing round-trips exactly."""
        ip = self.initial
        lines = [
            "[grid]", f"N = {self.N}", f"dt_over_h = {self.dt_over_h!r}", "",
            "[initial]", f"A = {ip.A!r}", f"B = {ip.B!r}", f"r1 = {ip.r1!r}", f"r2 = {ip.r2!r}",
            f"sigma0 = {ip.sigma0!r}", f"k = {ip.k}", "",
            "[evolution]", f"t_end = {self.t_end!r}", f"cadence = {self.cadence}",
            f"local_radius = {self.local_radius!r}", f"dispersal_fraction = {self.dispersal_fraction!r}",
            "slice_times = " + ", ".join(repr(float(t)) for t in self.slice_times),
            f"checkpoint_every = {self.checkpoint_every}", "",
            "[rattle]", f"projection_tol = {self.projection_tol!r}",
            f"max_projection_iters = {self.max_projection_iters}", "",
        ]
        if self.fit_window is not None:
            lines += ["[fit]", f"window = {self.fit_window[0]!r}:{self.fit_window[1]!r}", ""]
        if self.search is not None:
            s = self.search
            lines += ["[search]", f"A_lo = {s.A_lo!r}", f"A_hi = {s.A_hi!r}", f"tol_A = {s.tol_A!r}",
                      f"max_runs = {s.max_runs}", f"t_end_cap = {s.t_end_cap!r}", ""]
        return "\n".join(lines)

    def hash(self) -> bytes:
        return hashlib.sha256(self.to_ini().encode("utf-8")).digest()

    def hash_hex(self) -> str:
        return self.hash().hex()


_KNOWN = {
    "grid": {"N", "dt_over_h", "dt"},
    "initial": {"A", "B", "r1", "r2", "sigma0", "k"},
    "evolution": {"t_end", "cadence", "local_radius", "dispersal_fraction", "slice_times", "checkpoint_every"},
    "rattle": {"projection_tol", "max_projection_iters"},
    "fit": {"window"},
    "search": {"A_lo", "A_hi", "tol_A", "max_runs", "t_end_cap"},
}


def parse_window(text):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"window must look like t_lo:t_hi, got {text!r}") from None
    if not lo < hi:
        raise ConfigError(f"window must satisfy t_lo < t_hi, got {text!r}")
    return lo, hi


def _float_list(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(x) for x in text.split(","))


def loads(text) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (A vs a)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        extra = set(cp[section]) - _KNOWN[section]
        if extra:
            raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}")

    def get(section, key, conv, default):
        if cp.has_option(section, key):
            try:
                return conv(cp.get(section, key))
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
        return default

    base = RunConfig()
    N = get("grid", "N", int, base.N)
    dt_over_h = get("grid", "dt_over_h", float, base.dt_over_h)
    if cp.has_option("grid", "dt"):
        if cp.has_option("grid", "dt_over_h"):
            raise ConfigError("give either dt or dt_over_h, not both")
        dt_over_h = get("grid", "dt", float, None) * (N - 1)
    d0 = InitialDataParams(A=0.0)
    try:
        initial = InitialDataParams(
            A=get("initial", "A", float, 0.0), B=get("initial", "B", float, d0.B),
            r1=get("initial", "r1", float, d0.r1), r2=get("initial", "r2", float, d0.r2),
            sigma0=get("initial", "sigma0", float, d0.sigma0), k=get("initial", "k", int, d0.k))
    except ValueError as exc:
        raise ConfigError(f"[initial] {exc}") from None
    search = None
    if cp.has_section("search"):
        if not (cp.has_option("search", "A_lo") and cp.has_option("search", "A_hi")):
            raise ConfigError("[search] needs A_lo and A_hi")
        s0 = SearchSettings(0.0, 1.0)
        search = SearchSettings(
            A_lo=get("search", "A_lo", float, None), A_hi=get("search", "A_hi", float, None),
            tol_A=get("search", "tol_A", float, s0.tol_A), max_runs=get("search", "max_runs", int, s0.max_runs),
            t_end_cap=get("search", "t_end_cap", float, s0.t_end_cap))
    window = get("fit", "window", parse_window, None)
    cfg = RunConfig(
        N=N, dt_over_h=dt_over_h, initial=initial,
        t_end=get("evolution", "t_end", float, base.t_end),
        cadence=get("evolution", "cadence", int, base.cadence),
        local_radius=get("evolution", "local_radius", float, base.local_radius),
        dispersal_fraction=get("evolution", "dispersal_fraction", float, base.dispersal_fraction),
        slice_times=get("evolution", "slice_times", _float_list, ()),
        checkpoint_every=get("evolution", "checkpoint_every", int, 0),
        projection_tol=get("rattle", "projection_tol", float, base.projection_tol),
        max_projection_iters=get("rattle", "max_projection_iters", int, base.max_projection_iters),
        fit_window=window, search=search)
    if cfg.initial.r1 <= 2.0 * cfg.h:
        raise ConfigError(f"r1 = {cfg.initial.r1} must exceed two grid spacings ({2 * cfg.h:.4g})")
    for value, name in ((cfg.t_end, "t_end"), (cfg.dt_over_h, "dt_over_h")):
        if not math.isfinite(value):
            raise ConfigError(f"{name} must be finite")
    return cfg


def load(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
