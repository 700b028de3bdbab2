"""Scenario files: JSON schema, validation and serialization.

A scenario file is a flat JSON document.  Every key below is validated
before any run; diagnostics name the offending key path.

Keys: ``model``, ``kernel{kind, eta}`` (nonlocal only), ``v1{vmax, rhomax}``,
``v2{vmax, rhomax}``, ``buffer{mu, r0, rmax, mu_out}`` (``rmax`` accepts
``"inf"``), ``grid{xL, xR, dx}``, ``init1``/``init2`` (lists of
``[x_start, x_end, value]``), ``left_boundary_value``, ``right_extension``,
``T``, ``cfl_safety``, ``dt``, ``snapshots``, ``outputs{profile_csv,
buffer_csv}``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .core import (
    MODELS,
    RIGHT_EXTENSIONS,
    BufferSpec,
    OutputPlan,
    PiecewiseProfile,
    RoadGrid,
    Scenario,
    VelocityFn,
)
from .errors import NonCommensurateGrid, ParseError, ValidationError
from .kernel import KernelSpec, build_discrete_kernel


def _get(doc: dict, key: str, path: str, required: bool = True, default=None):
    if key not in doc:
        if required:
            raise ValidationError(path, "missing required key")
        return default
    return doc[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(path, f"expected a number, got {value!r}")
    return float(value)


def _positive(value, path: str) -> float:
    x = _number(value, path)
    if not x > 0:
        raise ValidationError(path, f"must be positive, got {x}")
    return x


def _velocity(doc, path: str) -> VelocityFn:
    if not isinstance(doc, dict):
        raise ValidationError(path, "expected an object {vmax, rhomax}")
    return VelocityFn(
        v_max=_positive(_get(doc, "vmax", f"{path}.vmax"), f"{path}.vmax"),
        rho_max=_positive(_get(doc, "rhomax", f"{path}.rhomax"),
                          f"{path}.rhomax"),
    )


def _buffer(doc, path: str) -> BufferSpec:
    if not isinstance(doc, dict):
        raise ValidationError(path, "expected an object {mu, r0, rmax}")
    mu = _positive(_get(doc, "mu", f"{path}.mu"), f"{path}.mu")
    r0 = _number(_get(doc, "r0", f"{path}.r0", required=False, default=0.0),
                 f"{path}.r0")
    if r0 < 0:
        raise ValidationError(f"{path}.r0", f"must be non-negative, got {r0}")
    raw_rmax = _get(doc, "rmax", f"{path}.rmax", required=False, default="inf")
    if raw_rmax == "inf":
        r_max = math.inf
    else:
        r_max = _positive(raw_rmax, f"{path}.rmax")
    if r0 > r_max:
        raise ValidationError(f"{path}.r0", f"r0 = {r0} exceeds rmax = {r_max}")
    mu_out = _get(doc, "mu_out", f"{path}.mu_out", required=False)
    if mu_out is not None:
        mu_out = _positive(mu_out, f"{path}.mu_out")
    return BufferSpec(mu=mu, r0=r0, r_max=r_max, mu_out=mu_out)


def _profile(doc, path: str, road: tuple[float, float],
             rho_max: float) -> PiecewiseProfile:
    if not isinstance(doc, list):
        raise ValidationError(path, "expected a list of [x_start, x_end, value]")
    spans = []
    for k, item in enumerate(doc):
        if not (isinstance(item, list) and len(item) == 3):
            raise ValidationError(f"{path}[{k}]", "expected [x_start, x_end, value]")
        a = _number(item[0], f"{path}[{k}]")
        b = _number(item[1], f"{path}[{k}]")
        v = _number(item[2], f"{path}[{k}]")
        if not a < b:
            raise ValidationError(f"{path}[{k}]", f"empty span [{a}, {b}]")
        if a < road[0] - 1e-12 or b > road[1] + 1e-12:
            raise ValidationError(
                f"{path}[{k}]", f"span [{a}, {b}] outside road {list(road)}"
            )
        if not 0.0 <= v <= rho_max:
            raise ValidationError(
                f"{path}[{k}]", f"value {v} outside [0, {rho_max}]"
            )
        spans.append((a, b, v))
    if not spans:
        spans = [(road[0], road[1], 0.0)]
    try:
        return PiecewiseProfile.from_spans(spans)
    except ValueError as exc:
        raise ValidationError(path, str(exc)) from None


def parse_scenario_dict(doc: dict) -> Scenario:
    """Validate a decoded scenario document and build the Scenario."""
    if not isinstance(doc, dict):
        raise ValidationError("", "scenario document must be a JSON object")
    model = _get(doc, "model", "model")
    if model not in MODELS:
        raise ValidationError("model", f"{model!r} is not one of {MODELS}")

    v1 = _velocity(_get(doc, "v1", "v1"), "v1")
    v2 = _velocity(_get(doc, "v2", "v2"), "v2")
    buffer = _buffer(_get(doc, "buffer", "buffer"), "buffer")

    gdoc = _get(doc, "grid", "grid")
    if not isinstance(gdoc, dict):
        raise ValidationError("grid", "expected an object {xL, xR, dx}")
    x_left = _number(_get(gdoc, "xL", "grid.xL"), "grid.xL")
    x_right = _number(_get(gdoc, "xR", "grid.xR"), "grid.xR")
    dx = _positive(_get(gdoc, "dx", "grid.dx"), "grid.dx")
    try:
        grid = RoadGrid(x_left, x_right, dx)
    except NonCommensurateGrid as exc:
        raise ValidationError("grid", str(exc)) from None

    kernel = None
    kdoc = _get(doc, "kernel", "kernel", required=(model == "nonlocal"))
    if kdoc is not None:
        if not isinstance(kdoc, dict):
            raise ValidationError("kernel", "expected an object {kind, eta}")
        kind = _get(kdoc, "kind", "kernel.kind")
        eta = _positive(_get(kdoc, "eta", "kernel.eta"), "kernel.eta")
        try:
            kernel = KernelSpec(kind=kind, eta=eta)
            build_discrete_kernel(kernel, dx)
        except Exception as exc:
            key = "kernel.kind" if "kind" in str(exc) else "kernel.eta"
            raise ValidationError(key, str(exc)) from None

    init1 = _profile(_get(doc, "init1", "init1"), "init1",
                     (x_left, 0.0), v1.rho_max)
    init2 = _profile(_get(doc, "init2", "init2"), "init2",
                     (0.0, x_right), v2.rho_max)

    left_bc = _number(
        _get(doc, "left_boundary_value", "left_boundary_value",
             required=False, default=0.0),
        "left_boundary_value",
    )
    if not 0.0 <= left_bc <= v1.rho_max:
        raise ValidationError(
            "left_boundary_value", f"{left_bc} outside [0, {v1.rho_max}]"
        )

    right_ext = _get(doc, "right_extension", "right_extension",
                     required=False, default="constant_extrapolation")
    if right_ext not in RIGHT_EXTENSIONS:
        raise ValidationError(
            "right_extension", f"{right_ext!r} is not one of {RIGHT_EXTENSIONS}"
        )

    horizon = _positive(_get(doc, "T", "T"), "T")

    default_safety = 1.0 if model == "nonlocal" else 0.9
    safety = _number(
        _get(doc, "cfl_safety", "cfl_safety", required=False,
             default=default_safety),
        "cfl_safety",
    )
    if not 0.0 < safety <= 1.0:
        raise ValidationError("cfl_safety", f"{safety} outside (0, 1]")

    dt = _get(doc, "dt", "dt", required=False)
    if dt is not None:
        dt = _positive(dt, "dt")

    raw_snaps = _get(doc, "snapshots", "snapshots", required=False, default=[])
    if not isinstance(raw_snaps, list):
        raise ValidationError("snapshots", "expected a list of times")
    snapshots = []
    for k, s in enumerate(raw_snaps):
        s = _number(s, f"snapshots[{k}]")
        if not 0.0 <= s <= horizon:
            raise ValidationError(f"snapshots[{k}]", f"{s} outside [0, {horizon}]")
        snapshots.append(s)

    odoc = _get(doc, "outputs", "outputs", required=False, default={})
    if not isinstance(odoc, dict):
        raise ValidationError("outputs", "expected an object")
    outputs = OutputPlan(
        profile_csv=str(odoc.get("profile_csv", "profile.csv")),
        buffer_csv=str(odoc.get("buffer_csv", "buffer.csv")),
    )

    if model == "supply_chain" and v1.v_max != v2.v_max:
        raise ValidationError(
            "v1.vmax", "supply-chain model needs v1.vmax == v2.vmax"
        )

    return Scenario(
        model=model, v1=v1, v2=v2, buffer=buffer, grid=grid,
        init1=init1, init2=init2, T=horizon, kernel=kernel,
        left_boundary_value=left_bc, right_extension=right_ext,
        cfl_safety=safety, dt=dt, snapshots=tuple(snapshots),
        outputs=outputs,
    )


def parse_scenario(path: str | Path) -> Scenario:
    """Read, decode and validate a scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from None
    return parse_scenario_dict(doc)


def _profile_spans(profile: PiecewiseProfile) -> list[list[float]]:
    return [
        [a, b, v]
        for a, b, v in zip(profile.breaks, profile.breaks[1:], profile.values)
    ]


def serialize_scenario(scenario: Scenario) -> dict:
    """Scenario back to its JSON document form (round-trips with parse)."""
    doc: dict = {"model": scenario.model}
    if scenario.kernel is not None:
        doc["kernel"] = {"kind": scenario.kernel.kind, "eta": scenario.kernel.eta}
    doc["v1"] = {"vmax": scenario.v1.v_max, "rhomax": scenario.v1.rho_max}
    doc["v2"] = {"vmax": scenario.v2.v_max, "rhomax": scenario.v2.rho_max}
    buf: dict = {"mu": scenario.buffer.mu, "r0": scenario.buffer.r0}
    buf["rmax"] = ("inf" if math.isinf(scenario.buffer.r_max)
                   else scenario.buffer.r_max)
    if scenario.buffer.mu_out is not None:
        buf["mu_out"] = scenario.buffer.mu_out
    doc["buffer"] = buf
    doc["grid"] = {
        "xL": scenario.grid.x_left,
        "xR": scenario.grid.x_right,
        "dx": scenario.grid.dx,
    }
    doc["init1"] = _profile_spans(scenario.init1)
    doc["init2"] = _profile_spans(scenario.init2)
    doc["left_boundary_value"] = scenario.left_boundary_value
    doc["right_extension"] = scenario.right_extension
    doc["T"] = scenario.T
    doc["cfl_safety"] = scenario.cfl_safety
    if scenario.dt is not None:
        doc["dt"] = scenario.dt
    doc["snapshots"] = list(scenario.snapshots)
    doc["outputs"] = {
        "profile_csv": scenario.outputs.profile_csv,
        "buffer_csv": scenario.outputs.buffer_csv,
    }
    return doc
