"""Reading building descriptions from XML.

Two documents describe a scheduling problem: the *configuration* (the
installed components and their constant physical parameters) and the
*situation* (horizon, initial component states, and references to predicted
time series kept in separate data files).  Element and attribute vocabulary
follows a fixed schema; unknown elements or attributes are errors, not
noise.  All powers are normalized to kW at parse time based on the per-
element unit attributes, with the root element providing the defaults.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import InputError, ScenarioMismatch

NAMESPACE = "http://www.fokus.fraunhofer.de/WaveSave"

_POWER_SCALE = {"kW": 1.0, "W": 1e-3}
_ENERGY_SCALE = {"kWh": 1.0}
_PRICE_SCALE = {"ct": 1.0}
_ENERGY_PRICE_SCALE = {"ct/kWh": 1.0}

# attribute value kinds: how to convert and which unit attribute applies
POWER = "power"
ENERGY = "energy"
PRICE = "price"
ENERGY_PRICE = "energyPrice"
FLOAT = "float"
INT = "int"
BOOL = "bool"
STRING = "string"
INT_LIST = "intList"

_UNIT_ATTRS = {
    "powerUnit": _POWER_SCALE,
    "energyUnit": _ENERGY_SCALE,
    "priceUnit": _PRICE_SCALE,
    "energyPriceUnit": _ENERGY_PRICE_SCALE,
}

_KIND_UNIT = {POWER: "powerUnit", ENERGY: "energyUnit", PRICE: "priceUnit",
              ENERGY_PRICE: "energyPriceUnit"}


@dataclass
class SeriesRef:
    """Reference into an external time-series container."""

    file_name: str
    data_set_path: str
    scale: float = 1.0  # unit normalization applied after loading


@dataclass
class ParsedComponent:
    element: str
    id: str
    attrs: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)  # child element name -> SeriesRef
    historical_starts: list = field(default_factory=list)  # time units <= 0


@dataclass
class BuildingConfiguration:
    id: str
    components: list
    by_id: dict = field(init=False)

    def __post_init__(self):
        self.by_id = {c.id: c for c in self.components}


@dataclass
class BuildingSituation:
    id: str
    n_units: int
    hours_per_unit: float
    start: str | None
    schedule_file: str | None
    components: list
    by_id: dict = field(init=False)

    def __post_init__(self):
        self.by_id = {c.id: c for c in self.components}


# ---------------------------------------------------------------------------
# schema tables: element -> {attribute: kind}; True marks required attributes

def _req(kind):
    return (kind, True)


def _opt(kind):
    return (kind, False)


_CONFIG_SCHEMA = {
    "Usage": {
        "maxElectricPowerUse": _req(POWER),
        "maxHeatingPowerUse": _req(POWER),
        "maxCoolingPowerUse": _req(POWER),
    },
    "Grid": {
        "maxFeedInPower": _req(POWER),
        "maxSupplyPower": _req(POWER),
    },
    "HeatBuffer": {
        "minThermalEnergyLevel": _req(ENERGY),
        "maxThermalEnergyLevel": _req(ENERGY),
        "thermalLossPerHourFactor": _req(FLOAT),
        "maxThermalChargingPower": _req(POWER),
        "maxThermalDischargingPower": _req(POWER),
        "chargeEfficiency": _opt(FLOAT),
        "dischargeEfficiency": _opt(FLOAT),
    },
    "HeatPump": {
        "electricPower": _req(POWER),
        "minOffTimeInHours": _req(FLOAT),
        "minRunTimeInHours": _req(FLOAT),
    },
    "Battery": {
        "minEnergyLevel": _req(ENERGY),
        "maxEnergyLevel": _req(ENERGY),
        "lossPerHourFactor": _req(FLOAT),
        "maxChargingPower": _req(POWER),
        "maxDischargingPower": _req(POWER),
        "chargeEfficiency": _opt(FLOAT),
        "dischargeEfficiency": _opt(FLOAT),
    },
    "PV": {
        "curtailable": _opt(BOOL),
    },
    "Converter": {
        "inputCarrier": _req(STRING),
        "outputCarrier": _req(STRING),
        "efficiency": _req(FLOAT),
        "maxInputPower": _req(POWER),
    },
    "MechCHP": {
        "thermalEfficiency": _req(FLOAT),
        "electricEfficiency": _req(FLOAT),
        "maxThermalPower": _req(POWER),
        "minThermalPower": _req(POWER),
        "boilerEfficiency": _req(FLOAT),
        "maxBoilerPower": _req(POWER),
        "switchOnCost": _opt(PRICE),
        "switchOffCost": _opt(PRICE),
        "minRunTimeInHours": _opt(FLOAT),
        "minOffTimeInHours": _opt(FLOAT),
    },
    "FcCHP": {
        "thermalEfficiency": _req(FLOAT),
        "electricEfficiency": _req(FLOAT),
        "maxThermalPower": _req(POWER),
        "minThermalPower": _req(POWER),
        "initThermalPower": _req(POWER),
        "startUpThermalPower": _req(POWER),
        "minOnTimeInHours": _req(FLOAT),
        "maxOnTimeInHours": _req(FLOAT),
        "minOffTimeInHours": _req(FLOAT),
        "initDurationInHours": _req(FLOAT),
        "startUpDurationInHours": _req(FLOAT),
        "shutDownDurationInHours": _req(FLOAT),
        "warmUpSupportingValues": _req(INT_LIST),
        "standByElectricPower": _req(POWER),
        "warmUpElectricPower": _req(POWER),
        "coldStartElectricPower": _req(POWER),
        "addShutDownElectricPower": _req(POWER),
        "warmUpPrimaryPower": _req(POWER),
        "coldStartPrimaryPower": _req(POWER),
        "maxThermalPowerGradientPerHour": _req(POWER),
        "coldStartThresholdUnits": _req(INT),
        "switchOnCost": _opt(PRICE),
        "switchOffCost": _opt(PRICE),
        "warmUpCostPerUnit": _opt(PRICE),
        "coldStartCostPerUnit": _opt(PRICE),
        "productionCostPerUnit": _opt(PRICE),
    },
}

# situation: per component element, scalar attrs and the series child elements
_SITUATION_SCHEMA = {
    "Usage": {
        "attrs": {
            "maxInitialHeatingEnergy": _opt(ENERGY),
            "maxInitialCoolingEnergy": _opt(ENERGY),
        },
        "series": {
            "ElectricPowerUsage": POWER,
            "HotWaterPowerUsage": POWER,
            "MinHeatingPowerUsage": POWER,
            "MaxHeatingPowerUsage": POWER,
            "MinCoolingPowerUsage": POWER,
            "MaxCoolingPowerUsage": POWER,
        },
    },
    "Grid": {
        "attrs": {},
        "series": {
            "ElectricEnergyPrice": ENERGY_PRICE,
            "ElectricEnergyRefund": ENERGY_PRICE,
        },
    },
    "HeatBuffer": {
        "attrs": {"initialThermalEnergyLevel": _req(ENERGY)},
        "series": {},
    },
    "HeatPump": {
        "attrs": {
            "isOnAtBegin": _req(BOOL),
            "lastStartStopChangeInHours": _req(FLOAT),
        },
        "series": {"CoefficientOfPerformance": FLOAT},
    },
    "Battery": {
        "attrs": {"initialEnergyLevel": _req(ENERGY)},
        "series": {},
    },
    "PV": {
        "attrs": {},
        "series": {"PredictedPowerOutput": POWER},
    },
    "Converter": {
        "attrs": {},
        "series": {"PrimaryEnergyPrice": ENERGY_PRICE},
    },
    "MechCHP": {
        "attrs": {
            "isOnAtBegin": _req(BOOL),
            "lastStartStopChangeInHours": _req(FLOAT),
        },
        "series": {"PrimaryEnergyPrice": ENERGY_PRICE},
    },
    "FcCHP": {
        "attrs": {
            "isOnAtBegin": _req(BOOL),
            "isWarmingUpAtBegin": _opt(BOOL),
            "isProducingAtBegin": _opt(BOOL),
            "coldStartFlagAtBegin": _opt(BOOL),
            "lastStartStopChangeTimeUnit": _req(INT),
            "lastStartTimeUnit": _req(INT),
            "lastWarmUpDurationUnits": _req(INT),
        },
        "series": {"PrimaryEnergyPrice": ENERGY_PRICE},
    },
}


# ---------------------------------------------------------------------------
# helpers


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _local_attrs(el) -> dict:
    """Attributes without namespace-qualified entries (xsi: and friends)."""
    return {k: v for k, v in el.attrib.items() if not k.startswith("{")}


def _parse_value(raw: str, kind: str, units: dict, path: str):
    try:
        if kind == POWER:
            return float(raw) * units["powerUnit"]
        if kind == ENERGY:
            return float(raw) * units["energyUnit"]
        if kind == PRICE:
            return float(raw) * units["priceUnit"]
        if kind == ENERGY_PRICE:
            return float(raw) * units["energyPriceUnit"]
        if kind == FLOAT:
            return float(raw)
        if kind == INT:
            return int(raw)
        if kind == BOOL:
            if raw in ("true", "1"):
                return True
            if raw in ("false", "0"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == INT_LIST:
            return tuple(int(tok) for tok in raw.split())
        return raw
    except ValueError as exc:
        raise InputError(str(exc), path) from exc


def _element_units(el, inherited: dict, path: str) -> dict:
    units = dict(inherited)
    for attr, table in _UNIT_ATTRS.items():
        raw = el.get(attr)
        if raw is None:
            continue
        if raw not in table:
            raise InputError(f"unsupported {attr} {raw!r}", path)
        units[attr] = table[raw]
    return units


_DEFAULT_UNITS = {"powerUnit": 1.0, "energyUnit": 1.0, "priceUnit": 1.0,
                  "energyPriceUnit": 1.0}


def _collect_attrs(el, schema: dict, units: dict, path: str) -> dict:
    attrs = {}
    seen = set(_UNIT_ATTRS) | {"id"}
    for name, (kind, required) in schema.items():
        raw = el.get(name)
        seen.add(name)
        if raw is None:
            if required:
                raise InputError(f"missing required attribute {name!r}", path)
            continue
        attrs[name] = _parse_value(raw, kind, units, f"{path}@{name}")
    unknown = sorted(set(_local_attrs(el)) - seen)
    if unknown:
        raise InputError(f"unknown attributes: {', '.join(unknown)}", path)
    return attrs


def _parse_root(text: str, expected: str):
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise InputError(f"malformed XML: {exc}") from exc
    tag = _strip_ns(root.tag)
    if tag != expected:
        raise InputError(f"expected a {expected} document, found <{tag}>")
    return root


def _series_ref(el, kind: str, units: dict, path: str) -> SeriesRef:
    units = _element_units(el, units, path)
    file_name = el.get("fileName")
    data_set = el.get("dataSetPath")
    if not file_name or not data_set:
        raise InputError("series reference needs fileName and dataSetPath", path)
    unknown = sorted(set(_local_attrs(el)) - {"fileName", "dataSetPath"} - set(_UNIT_ATTRS))
    if unknown:
        raise InputError(f"unknown attributes: {', '.join(unknown)}", path)
    scale = 1.0
    unit_attr = _KIND_UNIT.get(kind)
    if unit_attr:
        scale = units[unit_attr]
    return SeriesRef(file_name=file_name, data_set_path=data_set, scale=scale)


# ---------------------------------------------------------------------------
# public API


def parse_configuration(text: str) -> BuildingConfiguration:
    root = _parse_root(text, "BuildingConfiguration")
    root_path = "BuildingConfiguration"
    units = _element_units(root, _DEFAULT_UNITS, root_path)
    config_id = root.get("id")
    if not config_id:
        raise InputError("missing required attribute 'id'", root_path)
    extra = sorted(set(_local_attrs(root)) - set(_UNIT_ATTRS) - {"id", "schemaLocation"})
    if extra:
        raise InputError(f"unknown attributes: {', '.join(extra)}", root_path)

    components = []
    seen_ids = set()
    for child in root:
        tag = _strip_ns(child.tag)
        path = f"{root_path}/{tag}"
        if tag not in _CONFIG_SCHEMA:
            raise InputError(f"unknown element <{tag}>", path)
        comp_id = child.get("id")
        if not comp_id:
            raise InputError("missing required attribute 'id'", path)
        path = f"{path}[@id={comp_id!r}]"
        if comp_id in seen_ids:
            raise InputError(f"duplicate component id {comp_id!r}", path)
        seen_ids.add(comp_id)
        child_units = _element_units(child, units, path)
        attrs = _collect_attrs(child, _CONFIG_SCHEMA[tag], child_units, path)
        if len(child):
            raise InputError(f"unexpected child element <{_strip_ns(child[0].tag)}>", path)
        components.append(ParsedComponent(element=tag, id=comp_id, attrs=attrs))
    return BuildingConfiguration(id=config_id, components=components)


def parse_situation(text: str, config: BuildingConfiguration) -> BuildingSituation:
    root = _parse_root(text, "BuildingSituation")
    root_path = "BuildingSituation"
    units = _element_units(root, _DEFAULT_UNITS, root_path)
    sit_id = root.get("id")
    if not sit_id:
        raise InputError("missing required attribute 'id'", root_path)
    if sit_id != config.id:
        raise ScenarioMismatch(
            f"situation id {sit_id!r} does not match configuration id {config.id!r}",
            root_path,
        )
    try:
        n_units = int(root.get("nbsOfTimeUnits", ""))
        hours = float(root.get("hoursPerTimeUnit", ""))
    except ValueError as exc:
        raise InputError("nbsOfTimeUnits/hoursPerTimeUnit missing or malformed",
                         root_path) from exc
    if n_units < 1 or hours <= 0:
        raise InputError("horizon must have at least one unit of positive length", root_path)
    extra = sorted(
        set(_local_attrs(root)) - set(_UNIT_ATTRS)
        - {"id", "nbsOfTimeUnits", "hoursPerTimeUnit", "start", "fileNameHDF5", "schemaLocation"}
    )
    if extra:
        raise InputError(f"unknown attributes: {', '.join(extra)}", root_path)

    components = []
    seen_ids = set()
    for child in root:
        tag = _strip_ns(child.tag)
        path = f"{root_path}/{tag}"
        if tag not in _SITUATION_SCHEMA:
            raise InputError(f"unknown element <{tag}>", path)
        comp_id = child.get("id")
        if not comp_id:
            raise InputError("missing required attribute 'id'", path)
        path = f"{path}[@id={comp_id!r}]"
        if comp_id in seen_ids:
            raise InputError(f"duplicate component id {comp_id!r}", path)
        seen_ids.add(comp_id)
        configured = config.by_id.get(comp_id)
        if configured is None:
            raise InputError(f"component {comp_id!r} is not in the configuration", path)
        if configured.element != tag:
            raise InputError(
                f"component {comp_id!r} is a {configured.element} in the configuration", path
            )
        schema = _SITUATION_SCHEMA[tag]
        child_units = _element_units(child, units, path)
        attrs = _collect_attrs(child, schema["attrs"], child_units, path)
        comp = ParsedComponent(element=tag, id=comp_id, attrs=attrs)
        for sub in child:
            sub_tag = _strip_ns(sub.tag)
            sub_path = f"{path}/{sub_tag}"
            if sub_tag == "HistoricalStart" and tag == "FcCHP":
                try:
                    unit = int(sub.get("timeUnit", ""))
                except ValueError as exc:
                    raise InputError("HistoricalStart needs an integer timeUnit",
                                     sub_path) from exc
                if unit > 0:
                    raise InputError("historical starts must lie at or before unit 0", sub_path)
                comp.historical_starts.append(unit)
                continue
            if sub_tag not in schema["series"]:
                raise InputError(f"unknown element <{sub_tag}>", sub_path)
            if sub_tag in comp.series:
                raise InputError(f"duplicate series reference <{sub_tag}>", sub_path)
            comp.series[sub_tag] = _series_ref(sub, schema["series"][sub_tag],
                                               child_units, sub_path)
        components.append(comp)
    return BuildingSituation(
        id=sit_id,
        n_units=n_units,
        hours_per_unit=hours,
        start=root.get("start"),
        schedule_file=root.get("fileNameHDF5"),
        components=components,
    )
