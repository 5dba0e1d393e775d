"""Sub-model builders for the standard building components: usage (demand),
grid connection, heat/cold pump, storages, converters, PV, and mechanical CHP
with a peak boiler.

Each builder adds its variables and rows to the model and registers the
component's per-carrier power series and money flows in the BalanceLedger.
Builders never touch another component's entries; coupling happens only
through the carrier balances assembled later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .assembly import CARRIERS, COLD, ELECTRIC, HEAT, BalanceLedger, TimeGrid
from .errors import ModelError
from .fcchp import build_min_durations, build_onoff_chain
from .linearize import product_bin_bounded
from .milp import EQ, LE, Model, as_expr


def _check_series(values, n, label, lo=None, hi=None):
    vals = tuple(float(v) for v in values)
    if len(vals) != n:
        raise ModelError(f"{label}: expected {n} entries, got {len(vals)}")
    for i, v in enumerate(vals):
        if not math.isfinite(v):
            raise ModelError(f"{label}: non-finite value at unit {i + 1}")
        if lo is not None and v < lo - 1e-12:
            raise ModelError(f"{label}: value {v} below {lo} at unit {i + 1}")
        if hi is not None and v > hi + 1e-12:
            raise ModelError(f"{label}: value {v} above {hi} at unit {i + 1}")
    return vals


def _switch_history(grid: TimeGrid, is_on: bool, last_change_hours: float):
    """Initial on/off state expressed as historical event flags.

    The last switching event lies last_change_hours before unit 1; an event
    j units ago happened at unit 1 - j.
    """
    if last_change_hours < 0:
        raise ModelError("last state change must not lie in the future")
    ago = max(grid.units_round(last_change_hours), 0)
    event_unit = 1 - ago
    if event_unit > 0:
        event_unit = 0
    if is_on:
        return {event_unit: 1}, {}
    return {}, {event_unit: 1}


# ---------------------------------------------------------------------------
# usage


@dataclass(frozen=True)
class UsageSpec:
    name: str
    electric_demand: tuple
    hot_water_demand: tuple
    heating_min: tuple
    heating_max: tuple
    cooling_min: tuple = ()
    cooling_max: tuple = ()
    max_electric_power: float = math.inf
    max_heating_power: float = math.inf
    max_cooling_power: float = math.inf


def build_usage(model: Model, spec: UsageSpec, grid: TimeGrid, ledger: BalanceLedger) -> None:
    n = grid.n_units
    elec = _check_series(spec.electric_demand, n, f"{spec.name}.electric_demand",
                         lo=0.0, hi=spec.max_electric_power)
    water = _check_series(spec.hot_water_demand, n, f"{spec.name}.hot_water_demand", lo=0.0)
    hmin = _check_series(spec.heating_min, n, f"{spec.name}.heating_min", lo=0.0)
    hmax = _check_series(spec.heating_max, n, f"{spec.name}.heating_max",
                         lo=0.0, hi=spec.max_heating_power)
    for i in range(n):
        if hmin[i] > hmax[i] + 1e-12:
            raise ModelError(f"{spec.name}: heating band empty at unit {i + 1} "
                             f"({hmin[i]} > {hmax[i]})")
    ledger.add_sink(ELECTRIC, spec.name, [as_expr(v) for v in elec])

    heat = []
    for i in range(n):
        h = model.continuous(f"{spec.name}.heating[{i + 1}]", hmin[i], hmax[i])
        heat.append(as_expr(h) + water[i])
    ledger.add_sink(HEAT, spec.name, heat)

    if spec.cooling_max:
        cmin = _check_series(spec.cooling_min, n, f"{spec.name}.cooling_min", lo=0.0)
        cmax = _check_series(spec.cooling_max, n, f"{spec.name}.cooling_max",
                             lo=0.0, hi=spec.max_cooling_power)
        for i in range(n):
            if cmin[i] > cmax[i] + 1e-12:
                raise ModelError(f"{spec.name}: cooling band empty at unit {i + 1}")
        if any(v > 0 for v in cmax):
            cool = [
                as_expr(model.continuous(f"{spec.name}.cooling[{i + 1}]", cmin[i], cmax[i]))
                for i in range(n)
            ]
            ledger.add_sink(COLD, spec.name, cool)


# ---------------------------------------------------------------------------
# grid connection


@dataclass(frozen=True)
class GridSpec:
    name: str
    max_supply_power: float
    max_feed_in_power: float
    price: tuple  # ct/kWh per unit
    refund: tuple

    def __post_init__(self):
        if self.max_supply_power < 0 or self.max_feed_in_power < 0:
            raise ModelError(f"{self.name}: power limits must be non-negative")


def build_grid(model: Model, spec: GridSpec, grid: TimeGrid, ledger: BalanceLedger) -> None:
    n = grid.n_units
    price = _check_series(spec.price, n, f"{spec.name}.price")
    refund = _check_series(spec.refund, n, f"{spec.name}.refund")
    dt = grid.hours_per_unit
    supply = [
        model.continuous(f"{spec.name}.supply[{i + 1}]", 0.0, spec.max_supply_power)
        for i in range(n)
    ]
    feed_in = [
        model.continuous(f"{spec.name}.feedIn[{i + 1}]", 0.0, spec.max_feed_in_power)
        for i in range(n)
    ]
    ledger.add_source(ELECTRIC, spec.name, [as_expr(v) for v in supply])
    ledger.add_sink(ELECTRIC, spec.name, [as_expr(v) for v in feed_in])
    ledger.add_financial_input(spec.name, [supply[i] * (price[i] * dt) for i in range(n)])
    ledger.add_financial_output(spec.name, [feed_in[i] * (refund[i] * dt) for i in range(n)])


# ---------------------------------------------------------------------------
# heat/cold pump


@dataclass(frozen=True)
class HeatPumpSpec:
    name: str
    electric_power: float
    cop: tuple
    min_run_time: float = 0.0  # hours
    min_off_time: float = 0.0
    is_on_at_begin: bool = False
    last_change_hours: float = 0.0
    carrier: str = HEAT  # heat pump or cold pump

    def __post_init__(self):
        if not (self.electric_power > 0):
            raise ModelError(f"{self.name}: electricPower must be positive")
        if self.carrier not in (HEAT, COLD):
            raise ModelError(f"{self.name}: pump carrier must be heat or cold")


def build_heat_pump(model: Model, spec: HeatPumpSpec, grid: TimeGrid,
                    ledger: BalanceLedger) -> None:
    n = grid.n_units
    cop = _check_series(spec.cop, n, f"{spec.name}.cop")
    if any(v <= 0 for v in cop):
        raise ModelError(f"{spec.name}: COP values must be positive")
    hist_start, hist_stop = _switch_history(grid, spec.is_on_at_begin, spec.last_change_hours)
    chain = build_onoff_chain(model, n, int(spec.is_on_at_begin),
                              hist_start=hist_start, hist_stop=hist_stop, name=spec.name)
    on_min = max(grid.units_ceil(spec.min_run_time), 1) if spec.min_run_time > 0 else 1
    off_min = max(grid.units_ceil(spec.min_off_time), 1) if spec.min_off_time > 0 else 1
    build_min_durations(model, chain, on_min, off_min, name=spec.name)

    ledger.add_sink(ELECTRIC, spec.name, [x * spec.electric_power for x in chain.x])
    ledger.add_source(
        spec.carrier, spec.name,
        [chain.x[i] * (spec.electric_power * cop[i]) for i in range(n)],
    )
    ledger.add_state(f"on_{spec.name}", [as_expr(x) for x in chain.x])


# ---------------------------------------------------------------------------
# storage


@dataclass(frozen=True)
class StorageSpec:
    name: str
    carrier: str
    min_level: float
    max_level: float
    initial_level: float
    max_charge_power: float
    max_discharge_power: float
    loss_per_hour: float = 0.0
    charge_efficiency: float = 1.0
    discharge_efficiency: float = 1.0

    def __post_init__(self):
        if self.carrier not in CARRIERS:
            raise ModelError(f"{self.name}: unknown storage carrier {self.carrier!r}")
        if not (self.min_level <= self.initial_level <= self.max_level):
            raise ModelError(
                f"{self.name}: initial level {self.initial_level} outside "
                f"[{self.min_level}, {self.max_level}]"
            )
        if self.max_charge_power < 0 or self.max_discharge_power < 0:
            raise ModelError(f"{self.name}: charge/discharge limits must be non-negative")
        if not (0 <= self.loss_per_hour < 1):
            raise ModelError(f"{self.name}: loss factor per hour must lie in [0, 1)")
        if not (0 < self.charge_efficiency <= 1 and 0 < self.discharge_efficiency <= 1):
            raise ModelError(f"{self.name}: efficiencies must lie in (0, 1]")


def build_storage(model: Model, spec: StorageSpec, grid: TimeGrid,
                  ledger: BalanceLedger) -> None:
    n = grid.n_units
    dt = grid.hours_per_unit
    keep = 1.0 - spec.loss_per_hour * dt
    if keep <= 0:
        raise ModelError(f"{spec.name}: loss factor drains the store within one unit")
    level = [
        model.continuous(f"{spec.name}.level[{i + 1}]", spec.min_level, spec.max_level)
        for i in range(n)
    ]
    charge = [
        model.continuous(f"{spec.name}.charge[{i + 1}]", 0.0, spec.max_charge_power)
        for i in range(n)
    ]
    discharge = [
        model.continuous(f"{spec.name}.discharge[{i + 1}]", 0.0, spec.max_discharge_power)
        for i in range(n)
    ]
    for i in range(n):
        prev = spec.initial_level if i == 0 else level[i - 1]
        flow = charge[i] * (spec.charge_efficiency * dt) - discharge[i] * (dt / spec.discharge_efficiency)
        model.add_constraint(
            level[i] - prev * keep - flow, EQ, 0.0, f"{spec.name}.level.i={i + 1}"
        )
    ledger.add_sink(spec.carrier, spec.name, [as_expr(c) for c in charge])
    ledger.add_source(spec.carrier, spec.name, [as_expr(d) for d in discharge])
    prefix = {HEAT: "thermal", COLD: "cooling", ELECTRIC: "electric"}[spec.carrier]
    ledger.add_state(f"{prefix}EnergyLevel_{spec.name}", [as_expr(e) for e in level])


# ---------------------------------------------------------------------------
# converters (heating rod, burner, boiler, absorption chiller)

PRIMARY = "primary"


@dataclass(frozen=True)
class ConverterSpec:
    name: str
    input_carrier: str
    output_carrier: str
    efficiency: float
    max_input_power: float
    input_price: tuple = ()  # ct/kWh, required for primary input

    def __post_init__(self):
        if self.input_carrier not in (ELECTRIC, PRIMARY, HEAT):
            raise ModelError(f"{self.name}: unsupported input carrier {self.input_carrier!r}")
        if self.output_carrier not in (HEAT, COLD):
            raise ModelError(f"{self.name}: unsupported output carrier {self.output_carrier!r}")
        if not (0 < self.efficiency <= 1):
            raise ModelError(f"{self.name}: efficiency must lie in (0, 1]")
        if not (self.max_input_power > 0):
            raise ModelError(f"{self.name}: maxInputPower must be positive")
        if self.input_carrier == PRIMARY and not self.input_price:
            raise ModelError(f"{self.name}: a primary-fired converter needs a price series")


def build_converter(model: Model, spec: ConverterSpec, grid: TimeGrid,
                    ledger: BalanceLedger) -> None:
    n = grid.n_units
    inp = [
        model.continuous(f"{spec.name}.input[{i + 1}]", 0.0, spec.max_input_power)
        for i in range(n)
    ]
    if spec.input_carrier == PRIMARY:
        price = _check_series(spec.input_price, n, f"{spec.name}.input_price")
        dt = grid.hours_per_unit
        ledger.add_financial_input(spec.name, [inp[i] * (price[i] * dt) for i in range(n)])
        ledger.add_state(f"primaryInputPower_{spec.name}", [as_expr(v) for v in inp])
    else:
        ledger.add_sink(spec.input_carrier, spec.name, [as_expr(v) for v in inp])
    ledger.add_source(spec.output_carrier, spec.name, [v * spec.efficiency for v in inp])


# ---------------------------------------------------------------------------
# PV


@dataclass(frozen=True)
class PvSpec:
    name: str
    output: tuple
    curtailable: bool = False


def build_profile_source(model: Model, spec: PvSpec, grid: TimeGrid,
                         ledger: BalanceLedger) -> None:
    out = _check_series(spec.output, grid.n_units, f"{spec.name}.output", lo=0.0)
    if spec.curtailable:
        series = [
            as_expr(model.continuous(f"{spec.name}.output[{i + 1}]", 0.0, out[i]))
            for i in range(grid.n_units)
        ]
    else:
        series = [as_expr(v) for v in out]
    ledger.add_source(ELECTRIC, spec.name, series)


# ---------------------------------------------------------------------------
# mechanical CHP with peak boiler


@dataclass(frozen=True)
class MechChpSpec:
    name: str
    eta_th: float
    eta_el: float
    p_th_max: float
    p_th_min: float
    boiler_eta: float
    boiler_p_max: float  # maximum boiler heat output
    primary_price: tuple
    k_on: float = 0.0
    k_off: float = 0.0
    min_run_time: float = 0.0
    min_off_time: float = 0.0
    is_on_at_begin: bool = False
    last_change_hours: float = 0.0

    def __post_init__(self):
        if not (0 < self.eta_th < 1 and 0 < self.eta_el < 1):
            raise ModelError(f"{self.name}: efficiencies must lie strictly between 0 and 1")
        if self.eta_th + self.eta_el >= 1:
            raise ModelError(f"{self.name}: eta_th + eta_el must be below 1")
        if not (0 < self.p_th_min <= self.p_th_max):
            raise ModelError(f"{self.name}: need 0 < P_th_min <= P_th_max")
        if not (0 < self.boiler_eta <= 1):
            raise ModelError(f"{self.name}: boiler efficiency must lie in (0, 1]")
        if self.boiler_p_max < 0:
            raise ModelError(f"{self.name}: boiler output limit must be non-negative")


def build_mech_chp(model: Model, spec: MechChpSpec, grid: TimeGrid,
                   ledger: BalanceLedger) -> None:
    n = grid.n_units
    dt = grid.hours_per_unit
    price = _check_series(spec.primary_price, n, f"{spec.name}.primary_price")
    hist_start, hist_stop = _switch_history(grid, spec.is_on_at_begin, spec.last_change_hours)
    chain = build_onoff_chain(model, n, int(spec.is_on_at_begin),
                              hist_start=hist_start, hist_stop=hist_stop, name=spec.name)
    on_min = max(grid.units_ceil(spec.min_run_time), 1) if spec.min_run_time > 0 else 1
    off_min = max(grid.units_ceil(spec.min_off_time), 1) if spec.min_off_time > 0 else 1
    build_min_durations(model, chain, on_min, off_min, name=spec.name)

    heat, boiler_heat = [], []
    for i in range(1, n + 1):
        u = model.continuous(f"{spec.name}.uth[{i}]", spec.p_th_min, spec.p_th_max)
        out = product_bin_bounded(
            model, chain.x[i - 1], u, spec.p_th_min, spec.p_th_max,
            f"{spec.name}.out[{i}]", f"{spec.name}.modulation.i={i}",
        )
        heat.append(as_expr(out))
        b_on = model.binary(f"{spec.name}.boilerOn[{i}]")
        b_out = model.continuous(f"{spec.name}.boiler[{i}]", 0.0, spec.boiler_p_max)
        model.add_constraint(
            b_out - b_on * spec.boiler_p_max, LE, 0.0, f"{spec.name}.boilergate.i={i}"
        )
        boiler_heat.append(as_expr(b_out))

    ledger.add_source(HEAT, spec.name, [heat[i] + boiler_heat[i] for i in range(n)])
    ledger.add_source(ELECTRIC, spec.name, [h * (spec.eta_el / spec.eta_th) for h in heat])
    primary = [heat[i] * (1.0 / spec.eta_th) + boiler_heat[i] * (1.0 / spec.boiler_eta)
               for i in range(n)]
    fin = []
    for i in range(n):
        e = primary[i] * (price[i] * dt)
        e = e + chain.start[i] * spec.k_on + chain.stop[i] * spec.k_off
        fin.append(e)
    ledger.add_financial_input(spec.name, fin)
    ledger.add_state(f"primaryInputPower_{spec.name}", primary)
    ledger.add_state(f"on_{spec.name}", [as_expr(x) for x in chain.x])
