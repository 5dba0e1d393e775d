"""Fuel-cell CHP sub-model: on/off state chains, warm-up and start-up phase
timing, production band with ramp limit, and the per-unit cost equation.

The plant runs through stand-by, warm-up (duration a function of the
preceding downtime, longer after a cold start), a start-up ramp with known
discrete power steps, a modulated production phase, and a shut-down phase
with an electric power peak.  Everything is expressed as binaries plus
bounded integer trackers; the nonlinear recursions are expanded through the
reformulations in :mod:`besched.linearize`.

The on/off chain and minimum-duration rows are exposed as free functions
because other switchable components (heat pumps, mechanical CHPs) share the
exact same pattern.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .assembly import ELECTRIC, HEAT, BalanceLedger, TimeGrid
from .errors import InconsistentHistory, ModelError
from .linearize import (
    abs_diff,
    binary_abs_diff,
    bool_and,
    product_bin_bounded,
    record_bigm,
    select_interval_gated,
)
from .milp import EQ, GE, LE, LinExpr, Model, as_expr

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class FcchpPhysicalParams:
    """Constant plant characteristics.  Powers in kW, durations in hours."""

    eta_th: float
    eta_el: float
    p_th_max: float
    p_th_min: float
    p_th_init: float
    p_th_start_up: float
    d_on_min: float
    d_on_max: float
    d_off_min: float
    d_init: float
    d_start_up: float
    d_down: float
    # warm-up duration in time units as a function of downtime in time units;
    # either a sequence (value at downtime 1, 2, ...) or a callable
    warmup_table: object = None
    p_el_stand_by: float = 0.0
    p_el_warm_up: float = 0.0
    p_el_cold_start: float = 0.0
    p_el_add_shut_down: float = 0.0
    p_pr_warm_up: float = 0.0
    p_pr_cold_start: float = 0.0
    delta_p_th_prod: float = math.inf  # kW per hour
    cold_start_threshold: int = 1  # downtime in units beyond which a start is cold

    def __post_init__(self):
        if not (0 < self.eta_th < 1 and 0 < self.eta_el < 1):
            raise ModelError("efficiencies must lie strictly between 0 and 1")
        if self.eta_th + self.eta_el >= 1:
            raise ModelError("eta_th + eta_el must be below 1")
        if not (self.p_th_init <= self.p_th_min < self.p_th_start_up <= self.p_th_max):
            raise ModelError(
                "thermal levels must satisfy P_init <= P_min < P_startUp <= P_max, got "
                f"{self.p_th_init}, {self.p_th_min}, {self.p_th_start_up}, {self.p_th_max}"
            )
        for label in ("d_on_min", "d_on_max", "d_off_min", "d_init", "d_start_up", "d_down"):
            if not (getattr(self, label) > 0):
                raise ModelError(f"duration {label} must be positive")
        if self.d_init > self.d_start_up:
            raise ModelError("d_init must not exceed d_start_up")
        if self.warmup_table is None:
            raise ModelError("a warm-up duration table or function is required")
        if not (self.cold_start_threshold > 0):
            raise ModelError("cold-start downtime threshold must be positive")
        if not (self.delta_p_th_prod > 0):
            raise ModelError("production ramp limit must be positive")

    def warmup_units(self, downtime_units: int) -> int:
        """f(downtime), clipped to the last supporting value for long downtimes."""
        if callable(self.warmup_table):
            v = self.warmup_table(downtime_units)
        else:
            table = self.warmup_table
            idx = min(downtime_units, len(table)) - 1
            v = table[idx]
        iv = int(round(v))
        if iv < 1 or abs(iv - v) > 1e-9:
            raise ModelError(f"warm-up duration f({downtime_units}) = {v} is not a positive integer")
        return iv


@dataclass(frozen=True)
class FcchpCostParams:
    """Per-unit operating costs.  Prices in ct/kWh, fixed costs in ct."""

    primary_price: tuple  # one entry per time unit
    k_on: float = 0.0
    k_off: float = 0.0
    k_warm_up: float = 0.0
    k_cold_start: float = 0.0
    k_prod: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "primary_price", tuple(float(p) for p in self.primary_price))
        vals = list(self.primary_price) + [
            self.k_on, self.k_off, self.k_warm_up, self.k_cold_start, self.k_prod
        ]
        if not all(math.isfinite(v) for v in vals):
            raise ModelError("all cost parameters must be finite")


@dataclass(frozen=True)
class FcchpInitialState:
    """Plant status immediately before unit 1 of the horizon.

    l_0 is the time unit of the last start or stop, r_0 of the last start,
    w_0 the warm-up duration picked at that start.  start_history maps
    non-positive time units to historical start flags; absent units are 0.
    """

    x_0: int = 0
    y_0: int = 0
    z_0: int = 0
    k_0: int = 0
    l_0: int = 0
    r_0: int = 0
    w_0: int = 1
    start_history: dict = field(default_factory=dict)

    def __post_init__(self):
        for flag in ("x_0", "y_0", "z_0", "k_0"):
            if getattr(self, flag) not in (0, 1):
                raise ModelError(f"{flag} must be 0 or 1")
        if self.l_0 > 0 or self.r_0 > 0:
            raise ModelError("l_0 and r_0 must be non-positive time units")
        if self.w_0 < 0:
            raise ModelError("w_0 must be non-negative")
        if self.y_0 == 1 and self.x_0 == 0:
            raise InconsistentHistory("warming up (y_0 = 1) requires the plant on (x_0 = 1)")
        if self.z_0 == 1 and self.x_0 == 0:
            raise InconsistentHistory("producing (z_0 = 1) requires the plant on (x_0 = 1)")
        if self.y_0 == 1 and self.z_0 == 1:
            raise InconsistentHistory("warm-up and production cannot overlap (y_0 = z_0 = 1)")
        for j, v in self.start_history.items():
            if j > 0:
                raise ModelError(f"start history carries a positive time unit {j}")
            if v not in (0, 1):
                raise ModelError(f"start history value at {j} must be 0 or 1")

    def start_at(self, j: int) -> int:
        return int(self.start_history.get(j, 0))


@dataclass(frozen=True)
class FcchpUnitParams:
    """Durations converted to whole time units and discretized power steps."""

    on_min: int
    on_max: int
    off_min: int
    lower_init: int
    upper_init: int
    start_up: int
    shut_down: int
    p_th_up: tuple  # thermal start-up step per unit, length start_up
    p_el_up: tuple
    p_pr_up: tuple
    p_el_down: tuple  # electric shut-down step per unit, length shut_down
    f_values: tuple  # f(1..N) after clipping


def _profile_average(t0: float, t1: float, phys: FcchpPhysicalParams) -> float:
    """Mean thermal power of the start-up profile over [t0, t1] hours.

    Profile: P_init from 0 to d_init, linear rise to P_startUp at d_start_up,
    constant afterwards.
    """

    def integral(t: float) -> float:
        # cumulative integral of the profile from 0 to t
        area = phys.p_th_init * min(t, phys.d_init)
        if t > phys.d_init:
            span = phys.d_start_up - phys.d_init
            # span = 0 means the jump lands directly on P_startUp; the part
            # beyond d_start_up is accounted for below
            if span > 0:
                u = min(t, phys.d_start_up) - phys.d_init
                slope = (phys.p_th_start_up - phys.p_th_init) / span
                area += phys.p_th_init * u + 0.5 * slope * u * u
        if t > phys.d_start_up:
            area += phys.p_th_start_up * (t - phys.d_start_up)
        return area

    return (integral(t1) - integral(t0)) / (t1 - t0)


def derive_unit_params(phys: FcchpPhysicalParams, grid: TimeGrid) -> FcchpUnitParams:
    """Convert hour-based plant durations to the grid and build power steps."""
    on_min = grid.units_ceil(phys.d_on_min)
    on_max = grid.units_ceil(phys.d_on_max)
    off_min = grid.units_ceil(phys.d_off_min)
    if on_min > grid.n_units:
        raise ModelError(
            f"minimum operating time of {on_min} units exceeds the {grid.n_units}-unit horizon"
        )
    if on_max < on_min:
        raise ModelError("maximum operating time is below the minimum operating time")
    lower_init = grid.units_floor(phys.d_init)
    upper_init = grid.units_ceil(phys.d_init)
    start_up = max(grid.units_ceil(phys.d_start_up), 1)
    shut_down = max(grid.units_ceil(phys.d_down), 1)

    dt = grid.hours_per_unit
    p_th_up = tuple(_profile_average(k * dt, (k + 1) * dt, phys) for k in range(start_up))
    ratio = phys.eta_el / phys.eta_th
    p_el_up = tuple(ratio * p for p in p_th_up)
    p_pr_up = tuple(p / phys.eta_th for p in p_th_up)

    p_el_down = []
    for k in range(shut_down):
        covered = min(phys.d_down, (k + 1) * dt) - k * dt
        p_el_down.append(phys.p_el_add_shut_down * max(covered, 0.0) / dt)

    f_values = []
    clipped = False
    for d in range(1, grid.n_units + 1):
        if not callable(phys.warmup_table) and d > len(phys.warmup_table):
            clipped = True
        f_values.append(phys.warmup_units(d))
    if clipped:
        log.info("warm-up table shorter than the horizon; long downtimes use the last value")
    for a, b in zip(f_values, f_values[1:]):
        if b < a:
            raise ModelError("warm-up duration table must be monotone non-decreasing")

    return FcchpUnitParams(
        on_min=on_min,
        on_max=on_max,
        off_min=off_min,
        lower_init=lower_init,
        upper_init=upper_init,
        start_up=start_up,
        shut_down=shut_down,
        p_th_up=p_th_up,
        p_el_up=p_el_up,
        p_pr_up=p_pr_up,
        p_el_down=tuple(p_el_down),
        f_values=tuple(f_values),
    )


# ---------------------------------------------------------------------------
# shared on/off machinery


@dataclass
class OnOffChain:
    """Switching state of one component over the horizon (1-based access)."""

    x: list
    start: list
    stop: list
    x_0: int
    hist_start: dict
    hist_stop: dict

    def x_at(self, i: int):
        return self.x[i - 1] if i >= 1 else float(self.x_0)

    def start_at(self, i: int):
        return self.start[i - 1] if i >= 1 else float(self.hist_start.get(i, 0))

    def stop_at(self, i: int):
        return self.stop[i - 1] if i >= 1 else float(self.hist_stop.get(i, 0))


def build_onoff_chain(model: Model, n: int, x_0: int, hist_start: dict | None = None,
                      hist_stop: dict | None = None, name: str = "unit") -> OnOffChain:
    """Binaries x/start/stop with the six compatibility rows per unit."""
    x = [model.binary(f"{name}.x[{i}]") for i in range(1, n + 1)]
    start = [model.binary(f"{name}.start[{i}]") for i in range(1, n + 1)]
    stop = [model.binary(f"{name}.stop[{i}]") for i in range(1, n + 1)]
    chain = OnOffChain(x, start, stop, int(x_0), dict(hist_start or {}), dict(hist_stop or {}))
    for i in range(1, n + 1):
        xi = chain.x_at(i)
        xp = chain.x_at(i - 1)
        tag = f"{name}.startstop.i={i}"
        model.add_constraint(start[i - 1] - xi + xp, GE, 0.0, f"{tag}.a")
        model.add_constraint(start[i - 1] - xi, LE, 0.0, f"{tag}.b")
        model.add_constraint(start[i - 1] + xp, LE, 1.0, f"{tag}.c")
        model.add_constraint(stop[i - 1] - xp + xi, GE, 0.0, f"{tag}.d")
        model.add_constraint(stop[i - 1] - xp, LE, 0.0, f"{tag}.e")
        model.add_constraint(stop[i - 1] + xi, LE, 1.0, f"{tag}.f")
    return chain


def build_min_durations(model: Model, chain: OnOffChain, on_min: int, off_min: int,
                        name: str = "unit") -> None:
    """Minimum run and downtime rows over sliding windows of past events."""
    n = len(chain.x)
    for i in range(1, n + 1):
        run = LinExpr()
        for k in range(i - on_min + 1, i):
            run = run + chain.start_at(k)
        model.add_constraint(chain.x[i - 1] - run, GE, 0.0, f"{name}.minrun.i={i}")
        down = LinExpr()
        for k in range(i - off_min + 1, i):
            down = down + chain.stop_at(k)
        model.add_constraint(chain.x[i - 1] + down, LE, 1.0, f"{name}.mindown.i={i}")


# ---------------------------------------------------------------------------
# history replay


def replay_history(init: FcchpInitialState, up: FcchpUnitParams):
    """Derive historical stop and warm-up-end events from the declared state.

    Returns (hist_stop, hist_stop_warmup), dicts over non-positive units.
    Declared states that no replay can produce raise InconsistentHistory.
    """
    hist_stop: dict = {}
    hist_sw: dict = {}

    for j, v in init.start_history.items():
        if v == 1 and j > init.l_0:
            raise InconsistentHistory(
                f"declared start at unit {j} is later than the last state change l_0 = {init.l_0}"
            )
    if init.x_0 == 1:
        if init.r_0 != init.l_0:
            raise InconsistentHistory(
                "plant on at unit 0: the last change must be the last start (l_0 = r_0), "
                f"got l_0 = {init.l_0}, r_0 = {init.r_0}"
            )
        if init.l_0 in init.start_history and init.start_history[init.l_0] != 1:
            raise InconsistentHistory(f"l_0 = {init.l_0} marks a start but the history denies it")
        warmup_end = init.r_0 + init.w_0
        if init.y_0 == 1:
            if warmup_end <= 0:
                raise InconsistentHistory(
                    "y_0 = 1 but the declared warm-up already ended at unit "
                    f"{warmup_end} (r_0 + w_0)"
                )
        else:
            if warmup_end > 0:
                raise InconsistentHistory(
                    "y_0 = 0 but the declared warm-up runs past unit 0 "
                    f"(r_0 + w_0 = {warmup_end})"
                )
            hist_sw[warmup_end] = 1
            expected_z0 = 1 if warmup_end + up.start_up <= 0 else 0
            if init.z_0 != expected_z0:
                raise InconsistentHistory(
                    f"z_0 = {init.z_0} contradicts the start-up timeline "
                    f"(production begins at unit {warmup_end + up.start_up})"
                )
        if init.z_0 == 1 and init.y_0 == 1:
            raise InconsistentHistory("warm-up and production cannot overlap")
    else:
        if init.r_0 > init.l_0:
            raise InconsistentHistory(
                f"plant off at unit 0 but the last start r_0 = {init.r_0} is not "
                f"older than the last change l_0 = {init.l_0}"
            )
        if init.r_0 < init.l_0:
            # the plant ran from r_0 to l_0; the stop is a real event
            hist_stop[init.l_0] = 1
            warmup_end = init.r_0 + init.w_0
            # a warm-up cut short by the stop ends at the stop itself
            hist_sw[min(warmup_end, init.l_0)] = 1
        # r_0 == l_0: no recorded operation before the horizon
    return hist_stop, hist_sw


# ---------------------------------------------------------------------------
# builder


class FcchpBuilder:
    """Adds one plant instance to a model; call build() or the steps in order."""

    def __init__(self, model: Model, grid: TimeGrid, phys: FcchpPhysicalParams,
                 costs: FcchpCostParams, init: FcchpInitialState, name: str = "fcCHP"):
        if len(costs.primary_price) != grid.n_units:
            raise ModelError(
                f"primary price series has {len(costs.primary_price)} entries, "
                f"expected {grid.n_units}"
            )
        self.model = model
        self.grid = grid
        self.phys = phys
        self.costs = costs
        self.init = init
        self.name = name
        self.up = derive_unit_params(phys, grid)
        self.hist_stop, self.hist_sw = replay_history(init, self.up)
        self.n = grid.n_units
        self.vars: dict = {}
        # tracker bounds shared by every product expansion below
        self.l_lo = init.l_0
        self.r_lo = init.r_0
        self.w_lo = min(init.w_0, min(self.up.f_values))
        self.w_hi = max(init.w_0, max(self.up.f_values))

    # -- state chains --------------------------------------------------------

    def build_chain(self) -> OnOffChain:
        chain = build_onoff_chain(
            self.model, self.n, self.init.x_0,
            hist_start=self.init.start_history, hist_stop=self.hist_stop, name=self.name,
        )
        build_min_durations(self.model, chain, self.up.on_min, self.up.off_min, name=self.name)
        self.vars["chain"] = chain
        return chain

    def build_change_tracker(self):
        m, name = self.model, self.name
        chain = self.vars["chain"]
        l = [m.integer(f"{name}.l[{i}]", self.l_lo, self.n) for i in range(1, self.n + 1)]
        for i in range(1, self.n + 1):
            change = binary_abs_diff(chain.start[i - 1], chain.stop[i - 1])
            tag = f"{name}.lastchange.i={i}"
            if i == 1:
                # previous tracker value is the constant l_0
                kept = (1 - change) * self.init.l_0
            else:
                kept = product_bin_bounded(
                    m, 1 - change, l[i - 2], self.l_lo, self.n,
                    f"{name}.lkeep[{i}]", f"{tag}.keep",
                )
            m.add_constraint(l[i - 1] - kept - change * i, EQ, 0.0, tag)
        self.vars["l"] = l
        return l

    def build_max_runtime(self) -> None:
        m, name = self.model, self.name
        chain = self.vars["chain"]
        l = self.vars["l"]
        span = self.n - self.l_lo
        for i in range(1, self.n + 1):
            prev = float(self.init.l_0) if i == 1 else l[i - 2]
            runtime = product_bin_bounded(
                m, chain.stop[i - 1], l[i - 1] - prev, -span, span,
                f"{name}.runtime[{i}]", f"{name}.maxrun.i={i}.p",
            )
            m.add_constraint(runtime, LE, float(self.up.on_max), f"{name}.maxrun.i={i}")

    def build_cold_start_flags(self):
        m, name = self.model, self.name
        chain = self.vars["chain"]
        l = self.vars["l"]
        L = float(self.phys.cold_start_threshold)
        big_m = record_bigm(
            m, self.n - self.l_lo + 1.0, f"{name}.coldstart", self.n - self.l_lo
        )
        k = [m.binary(f"{name}.k[{i}]") for i in range(1, self.n + 1)]
        for i in range(1, self.n + 1):
            tag = f"{name}.coldstart.i={i}"
            # start after a downtime beyond L forces k_i = 1
            if i == 1:
                downtime_start = chain.start[0] * (1.0 - self.init.l_0)
            else:
                q = product_bin_bounded(
                    m, chain.start[i - 1], l[i - 2], self.l_lo, self.n,
                    f"{name}.ksl[{i}]", f"{tag}.p1",
                )
                downtime_start = chain.start[i - 1] * float(i) - q
            m.add_constraint(downtime_start - big_m * k[i - 1], LE, L, f"{tag}.onstart")
            # pending cold start propagates through an ongoing downtime
            if i == 1:
                if self.init.k_0 == 1:
                    # 1 - l_1 <= M*k_1, linear because k_0 is a constant
                    m.add_constraint(
                        1.0 - l[0] - big_m * k[0], LE, 0.0, f"{tag}.keep"
                    )
                continue
            p = product_bin_bounded(
                m, k[i - 2], l[i - 1], self.l_lo, self.n,
                f"{name}.kll[{i}]", f"{tag}.p2",
            )
            m.add_constraint(k[i - 2] * float(i) - p - big_m * k[i - 1], LE, 0.0, f"{tag}.keep")
        self.vars["k"] = k
        return k

    def build_warmup_duration(self):
        m, name = self.model, self.name
        chain = self.vars["chain"]
        l = self.vars["l"]
        f = self.phys.warmup_units
        w = [m.integer(f"{name}.w[{i}]", self.w_lo, self.w_hi) for i in range(1, self.n + 1)]
        for i in range(1, self.n + 1):
            tag = f"{name}.warmdur.i={i}"
            if i == 1:
                looked_up = chain.start[0] * float(f(1 - self.init.l_0))
            else:
                # f(i - l_{i-1}) with equal-valued downtimes grouped into ranges
                intervals = []
                for d in range(1, i - self.l_lo + 1):
                    v = f(d)
                    if intervals and intervals[-1][2] == v:
                        a, _b, _v = intervals[-1]
                        intervals[-1] = (a, d, v)
                    else:
                        intervals.append((d, d, v))
                looked_up, _ = select_interval_gated(
                    m, chain.start[i - 1], float(i) - l[i - 2], intervals,
                    x_min=i - self.n, x_max=i - self.l_lo,
                    name=f"{name}.wsel[{i}]", tag=f"{tag}.lookup",
                )
            prev_w = float(self.init.w_0) if i == 1 else w[i - 2]
            if i == 1:
                kept = (1 - chain.start[0]) * self.init.w_0
            else:
                kept = prev_w - product_bin_bounded(
                    m, chain.start[i - 1], prev_w, self.w_lo, self.w_hi,
                    f"{name}.wkeep[{i}]", f"{tag}.keep",
                )
            m.add_constraint(w[i - 1] - looked_up - kept, EQ, 0.0, tag)
        self.vars["w"] = w
        return w

    def build_warmup_phase(self):
        m, name = self.model, self.name
        chain = self.vars["chain"]
        y = [m.binary(f"{name}.y[{i}]") for i in range(1, self.n + 1)]
        sw = [m.binary(f"{name}.stopWarmUp[{i}]") for i in range(1, self.n + 1)]

        def y_at(i):
            return y[i - 1] if i >= 1 else float(self.init.y_0)

        for i in range(1, self.n + 1):
            st = chain.start[i - 1]
            tag = f"{name}.warmphase.i={i}"
            m.add_constraint(st - y_at(i) + y_at(i - 1), GE, 0.0, f"{tag}.a")
            m.add_constraint(st - y_at(i), LE, 0.0, f"{tag}.b")
            m.add_constraint(st + y_at(i - 1), LE, 1.0, f"{tag}.c")
            m.add_constraint(sw[i - 1] - y_at(i - 1) + y_at(i), GE, 0.0, f"{tag}.d")
            m.add_constraint(sw[i - 1] - y_at(i - 1), LE, 0.0, f"{tag}.e")
            m.add_constraint(sw[i - 1] + y_at(i), LE, 1.0, f"{tag}.f")
            m.add_constraint(chain.x[i - 1] - y[i - 1], GE, 0.0, f"{tag}.on")
        self.vars["y"] = y
        self.vars["stopWarmUp"] = sw
        return y, sw

    def build_warmup_bounds(self):
        m, name = self.model, self.name
        chain = self.vars["chain"]
        y = self.vars["y"]
        w = self.vars["w"]
        f_lo = min(self.up.f_values)
        f_hi = max(self.up.f_values)
        spread = float(f_hi - f_lo + 1)
        sigma_m = record_bigm(m, float(max(f_hi - 1, 1)), f"{name}.sigma", float(max(f_hi - 1, 1)))

        for i in range(1, self.n + 1):
            for j in range(f_lo, f_hi + 1):
                recent = LinExpr()
                for kk in range(i - j + 1, i):
                    recent = recent + chain.start_at(kk)
                if not recent.terms and recent.const == 0.0:
                    continue  # no start can fall into this window; sigma = 0
                tag = f"{name}.minwarm.i={i}.j={j}"
                sig = m.binary(f"{name}.sigma[{i},{j}]")
                m.add_constraint(sig * sigma_m - recent, GE, 0.0, f"{tag}.ub")
                m.add_constraint(sig - recent, LE, 0.0, f"{tag}.lb")
                p = product_bin_bounded(
                    m, sig, w[i - 1] - float(j - 1), self.w_lo - j + 1, self.w_hi - j + 1,
                    f"{name}.sigp[{i},{j}]", f"{tag}.p",
                )
                m.add_constraint(spread * y[i - 1] - p, GE, 0.0, tag)

        # an ongoing initial warm-up is pinned directly: its duration w_0 may
        # exceed every table value, putting it out of reach of the rows above
        if self.init.y_0 == 1:
            warm_end = self.init.r_0 + self.init.w_0
            for i in range(1, min(warm_end - 1, self.n) + 1):
                m.add_constraint(y[i - 1] + 0.0, GE, 1.0, f"{name}.minwarm.init.i={i}")

        # r tracks the most recent start; warm-up may not outlast w
        r = [m.integer(f"{name}.r[{i}]", self.r_lo, self.n) for i in range(1, self.n + 1)]
        for i in range(1, self.n + 1):
            tag = f"{name}.maxwarm.i={i}"
            if i == 1:
                kept = (1 - chain.start[0]) * self.init.r_0
            else:
                kept = r[i - 2] - product_bin_bounded(
                    m, chain.start[i - 1], r[i - 2], self.r_lo, self.n,
                    f"{name}.rkeep[{i}]", f"{tag}.keep",
                )
            m.add_constraint(
                r[i - 1] - chain.start[i - 1] * float(i) - kept, EQ, 0.0, f"{tag}.track"
            )
            # while warming up, the last start is at most w_i units ago;
            # gating r_i by y_i keeps the row vacuous outside warm-up
            yr = product_bin_bounded(
                m, y[i - 1], r[i - 1], self.r_lo, self.n,
                f"{name}.yr[{i}]", f"{tag}.p",
            )
            m.add_constraint(y[i - 1] * float(i) - yr - w[i - 1], LE, 0.0, tag)
        self.vars["r"] = r
        return r

    def sw_at(self, i: int):
        if i >= 1:
            return self.vars["stopWarmUp"][i - 1]
        return float(self.hist_sw.get(i, 0))

    def build_startup_shutdown(self):
        m, name = self.model, self.name
        s = [m.binary(f"{name}.s[{i}]") for i in range(1, self.n + 1)]
        for i in range(1, self.n + 1):
            jump = LinExpr()
            for j in range(1, self.up.lower_init + 1):
                jump = jump + self.sw_at(i - j + 1)
            m.add_constraint(s[i - 1] - jump, EQ, 0.0, f"{name}.jump.i={i}")
        self.vars["s"] = s
        return s

    def build_production_phase(self):
        m, name = self.model, self.name
        chain = self.vars["chain"]
        z = [m.binary(f"{name}.z[{i}]") for i in range(1, self.n + 1)]

        def z_at(i):
            return z[i - 1] if i >= 1 else float(self.init.z_0)

        for i in range(1, self.n + 1):
            trigger = self.sw_at(i - self.up.start_up)
            stop = chain.stop[i - 1]
            tag = f"{name}.prodphase.i={i}"
            m.add_constraint(trigger - z_at(i) + z_at(i - 1), GE, 0.0, f"{tag}.a")
            m.add_constraint(trigger - z_at(i), LE, 0.0, f"{tag}.b")
            m.add_constraint(trigger + z_at(i - 1), LE, 1.0, f"{tag}.c")
            m.add_constraint(stop - z_at(i - 1) + z_at(i), GE, 0.0, f"{tag}.d")
            m.add_constraint(stop - z_at(i - 1), LE, 0.0, f"{tag}.e")
            m.add_constraint(stop + z_at(i), LE, 1.0, f"{tag}.f")
            m.add_constraint(chain.x[i - 1] - z[i - 1], GE, 0.0, f"{tag}.on")
        self.vars["z"] = z
        return z

    # -- power and cost --------------------------------------------------------

    def build_power_equations(self):
        m, name, phys, up = self.model, self.name, self.phys, self.up
        chain = self.vars["chain"]
        y = self.vars["y"]
        z = self.vars["z"]
        k = self.vars["k"]
        n = self.n

        u_th = [
            m.continuous(f"{name}.uth[{i}]", phys.p_th_min, phys.p_th_max)
            for i in range(1, n + 1)
        ]
        ramp = phys.delta_p_th_prod * self.grid.hours_per_unit
        if math.isfinite(ramp) and ramp < phys.p_th_max - phys.p_th_min:
            for i in range(2, n + 1):
                step = abs_diff(
                    m, u_th[i - 2], u_th[i - 1], phys.p_th_max - phys.p_th_min,
                    f"{name}.ramp[{i}]", f"{name}.ramp.i={i}",
                )
                m.add_constraint(step, LE, ramp, f"{name}.ramplim.i={i}")

        thermal, electric_out, electric_in, primary_in = [], [], [], []
        gammas = []
        for i in range(1, n + 1):
            prod_level = product_bin_bounded(
                m, z[i - 1], u_th[i - 1], phys.p_th_min, phys.p_th_max,
                f"{name}.zu[{i}]", f"{name}.prodlevel.i={i}",
            )
            th = LinExpr()
            for j in range(1, up.start_up + 1):
                th = th + self.sw_at(i - j + 1) * up.p_th_up[j - 1]
            th = th + prod_level
            thermal.append(th)
            electric_out.append(th * (phys.eta_el / phys.eta_th))

            gamma = bool_and(
                m, y[i - 1], k[i - 1], f"{name}.gamma[{i}]", f"{name}.coldwarm.i={i}"
            )
            gammas.append(gamma)
            ein = y[i - 1] * phys.p_el_warm_up + gamma * phys.p_el_cold_start
            for j in range(1, up.shut_down + 1):
                ein = ein + chain.stop_at(i - j + 1) * up.p_el_down[j - 1]
            ein = ein + (1 - chain.x[i - 1]) * phys.p_el_stand_by
            electric_in.append(ein)

            pin = y[i - 1] * phys.p_pr_warm_up + gamma * phys.p_pr_cold_start
            for j in range(1, up.start_up + 1):
                pin = pin + self.sw_at(i - j + 1) * up.p_pr_up[j - 1]
            pin = pin + prod_level * (1.0 / phys.eta_th)
            primary_in.append(pin)

        self.vars["u_th"] = u_th
        self.vars["gamma"] = gammas
        self.vars["thermalOutputPower"] = thermal
        self.vars["electricOutputPower"] = electric_out
        self.vars["electricInputPower"] = electric_in
        self.vars["primaryInputPower"] = primary_in
        return thermal, electric_out, electric_in, primary_in

    def build_cost_equation(self):
        chain = self.vars["chain"]
        dt = self.grid.hours_per_unit
        c = self.costs
        fin = []
        for i in range(1, self.n + 1):
            e = self.vars["primaryInputPower"][i - 1] * (c.primary_price[i - 1] * dt)
            e = e + chain.start[i - 1] * c.k_on + chain.stop[i - 1] * c.k_off
            e = e + self.vars["y"][i - 1] * c.k_warm_up
            e = e + self.vars["gamma"][i - 1] * c.k_cold_start
            e = e + self.vars["z"][i - 1] * c.k_prod
            fin.append(e)
        self.vars["financialInput"] = fin
        return fin

    # -- orchestration ---------------------------------------------------------

    def build(self, ledger: BalanceLedger | None = None) -> dict:
        self.build_chain()
        self.build_change_tracker()
        self.build_max_runtime()
        self.build_cold_start_flags()
        self.build_warmup_duration()
        self.build_warmup_phase()
        self.build_warmup_bounds()
        self.build_startup_shutdown()
        self.build_production_phase()
        self.build_power_equations()
        self.build_cost_equation()
        if ledger is not None:
            ledger.add_source(HEAT, self.name, self.vars["thermalOutputPower"])
            ledger.add_source(ELECTRIC, self.name, self.vars["electricOutputPower"])
            ledger.add_sink(ELECTRIC, self.name, self.vars["electricInputPower"])
            ledger.add_financial_input(self.name, self.vars["financialInput"])
            ledger.add_state(f"primaryInputPower_{self.name}", self.vars["primaryInputPower"])
            chain = self.vars["chain"]
            ledger.add_state(f"on_{self.name}", [as_expr(v) for v in chain.x])
            ledger.add_state(f"start_{self.name}", [as_expr(v) for v in chain.start])
            ledger.add_state(f"stop_{self.name}", [as_expr(v) for v in chain.stop])
            ledger.add_state(f"warmUp_{self.name}", [as_expr(v) for v in self.vars["y"]])
            ledger.add_state(f"production_{self.name}", [as_expr(v) for v in self.vars["z"]])
            ledger.add_state(f"coldStart_{self.name}", [as_expr(v) for v in self.vars["gamma"]])
        return self.vars
