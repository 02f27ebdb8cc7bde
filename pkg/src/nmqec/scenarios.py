"""Named experiment definitions and the sweep runner.

A scenario binds a noise model, a sweep grid (time or damping strength) and a
list of schemes, each a code with an optional recovery. Scenarios are plain
JSON documents validated against ``scenario.schema.json``.
"""

from __future__ import annotations

import copy
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from nmqec.analysis.bloch import MMatrix, m_from_action, unitality_defect
from nmqec.analysis.divisibility import DivisibilityReport, p_divisibility_scan
from nmqec.analysis.fidelity import logical_action, worst_case_fidelity
from nmqec.channel import SignedKrausMap, compose
from nmqec.codes import Code, code_by_name, stabilizer_code
from nmqec.errors import ConfigError
from nmqec.noise import NoiseParams, ad_noise, gamma_of_t, preset
from nmqec.recovery import RecoverySpec, leung, noise_image, petz, syndrome_recovery

OUTPUTS = ("fidelity_curve", "m_eigencurves", "divisibility_report", "kl_overlaps", "poly_fit")

_NM_TIME = {"t_max": 30.0, "steps": 300}
_PETZ_FIXED = {"kind": "petz", "adaptation": "fixed", "reference": "markov"}
_PETZ_EXACT = {"kind": "petz", "adaptation": "exact"}

BUILTINS: dict[str, dict] = {
    "fig1": {
        "name": "fig1",
        "description": "Worst-case fidelity under non-Markovian damping: bare qubit, five-qubit code, four-qubit Petz.",
        "noise": {"preset": "nm"},
        "time": _NM_TIME,
        "schemes": [
            {"name": "bare", "code": "bare", "recovery": None},
            {"name": "syndrome_513", "code": "five_qubit", "recovery": {"kind": "syndrome"}},
            {"name": "petz_4q_fixed", "code": "four_qubit", "recovery": _PETZ_FIXED},
            {"name": "petz_4q_exact", "code": "four_qubit", "recovery": _PETZ_EXACT},
        ],
        "outputs": ["fidelity_curve"],
    },
    "fig2": {
        "name": "fig2",
        "description": "Four-qubit code: Petz against Leung recovery, both adaptations.",
        "noise": {"preset": "nm"},
        "time": _NM_TIME,
        "schemes": [
            {"name": "petz_4q_fixed", "code": "four_qubit", "recovery": _PETZ_FIXED},
            {"name": "petz_4q_exact", "code": "four_qubit", "recovery": _PETZ_EXACT},
            {"name": "leung_4q_fixed", "code": "four_qubit",
             "recovery": {"kind": "leung", "adaptation": "fixed", "reference": "markov"}},
            {"name": "leung_4q_exact", "code": "four_qubit", "recovery": {"kind": "leung", "adaptation": "exact"}},
        ],
        "outputs": ["fidelity_curve"],
    },
    "fig3": {
        "name": "fig3",
        "description": "Bloch-matrix eigenvalues of the four-qubit Petz composites.",
        "noise": {"preset": "nm"},
        "time": _NM_TIME,
        "schemes": [
            {"name": "petz_4q_fixed", "code": "four_qubit", "recovery": _PETZ_FIXED},
            {"name": "petz_4q_exact", "code": "four_qubit", "recovery": _PETZ_EXACT},
        ],
        "outputs": ["m_eigencurves", "divisibility_report"],
    },
    "fig4": {
        "name": "fig4",
        "description": "Bloch-matrix eigenvalues of the five-qubit code with syndrome recovery.",
        "noise": {"preset": "nm"},
        "time": _NM_TIME,
        "schemes": [{"name": "syndrome_513", "code": "five_qubit", "recovery": {"kind": "syndrome"}}],
        "outputs": ["m_eigencurves", "divisibility_report"],
        "drop_zero_eigenvalues": True,
    },
    "fig6": {
        "name": "fig6",
        "description": "Markovian damping sweep with Petz recovery fixed at gamma = 0.1.",
        "gamma": {"start": 0.0, "stop": 1.0, "steps": 101},
        "schemes": [
            {"name": "petz_4q", "code": "four_qubit",
             "recovery": {"kind": "petz", "adaptation": "fixed", "fixed_gamma": 0.1}},
            {"name": "petz_513", "code": "five_qubit",
             "recovery": {"kind": "petz", "adaptation": "fixed", "fixed_gamma": 0.1}},
        ],
        "outputs": ["fidelity_curve"],
    },
    "kl-appendix-d": {
        "name": "kl-appendix-d",
        "description": "Knill-Laflamme overlaps of the five-qubit code under damping.",
        "gamma": {"start": 0.0, "stop": 1.0, "steps": 11},
        "schemes": [{"name": "code_513", "code": "five_qubit", "recovery": None}],
        "outputs": ["kl_overlaps"],
    },
}
BUILTINS["fig5"] = dict(copy.deepcopy(BUILTINS["fig6"]), name="fig5")


def _schema() -> dict:
    return json.loads(resources.files("nmqec").joinpath("scenario.schema.json").read_text())


@dataclass(frozen=True, eq=False)
class Scheme:
    name: str
    code: Code
    recovery: RecoverySpec | None


@dataclass(frozen=True, eq=False)
class Scenario:
    """A validated, resolved scenario.

    Exactly one of ``noise`` + ``time_grid`` (a time sweep) or ``gamma_grid``
    (a sweep over the damping strength with Markovian amplitude damping) is set.
    """

    name: str
    schemes: tuple[Scheme, ...]
    noise: NoiseParams | None = None
    time_grid: tuple[float, int] | None = None
    gamma_grid: tuple[float, float, int] | None = None
    outputs: tuple[str, ...] = ("fidelity_curve",)
    grid_n: int = 60
    refine_iters: int = 200
    tol_slope: float = 1e-8
    drop_zero_eigenvalues: bool = False
    fit_degree: int = 6
    fit_constrain_f0: bool = True
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def is_time_sweep(self) -> bool:
        return self.time_grid is not None

    def grid(self) -> np.ndarray:
        if self.time_grid is not None:
            t_max, steps = self.time_grid
            return np.linspace(0.0, t_max, steps)
        start, stop, steps = self.gamma_grid
        return np.linspace(start, stop, steps)


def _resolve_code(spec) -> Code:
    if isinstance(spec, str):
        return code_by_name(spec)
    return stabilizer_code(
        spec["stabilizers"],
        logical_z=spec.get("logical_z"),
        name="custom",
        correctable_paulis=spec.get("correctable_paulis", "XYZ"),
    )


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as JSON when possible.

    Integer path components index into lists (``schemes.0.recovery.fixed_gamma=0.2``).
    """
    doc = copy.deepcopy(doc)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        parts = key.strip().split(".")
        node = doc
        try:
            for p in parts[:-1]:
                node = node[int(p)] if isinstance(node, list) else node.setdefault(p, {})
            last = parts[-1]
            if isinstance(node, list):
                node[int(last)] = value
            else:
                node[last] = value
        except (ValueError, IndexError, TypeError, AttributeError) as exc:
            raise ConfigError(f"cannot apply override {item!r}: {exc}") from None
    return doc


def load_scenario(doc: dict, overrides=None) -> Scenario:
    """Validate a scenario document (after overrides) and resolve its names.

    Raises
    ------
    ConfigError
        For schema violations and unresolvable or inconsistent settings.
    """
    doc = apply_overrides(doc, overrides)
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"scenario invalid at {where}: {exc.message}") from None
    has_time, has_gamma = "time" in doc, "gamma" in doc
    if has_time == has_gamma:
        raise ConfigError("scenario needs exactly one of 'time' or 'gamma'")
    if has_time and "noise" not in doc:
        raise ConfigError("a time sweep needs a 'noise' section")
    if has_gamma and "noise" in doc:
        raise ConfigError("a gamma sweep uses Markovian damping directly; drop the 'noise' section")
    names = [s["name"] for s in doc["schemes"]]
    if len(set(names)) != len(names):
        raise ConfigError(f"scheme names must be unique: {names}")

    noise = None
    if "noise" in doc:
        n = doc["noise"]
        noise = preset(n["preset"]) if "preset" in n else NoiseParams(n["gamma0"], n["b"])
    schemes = []
    for s in doc["schemes"]:
        try:
            code = _resolve_code(s["code"])
            rec = s.get("recovery")
            spec = RecoverySpec(**rec) if rec else None
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"scheme {s['name']!r}: {exc}") from None
        if spec is not None and spec.reference is not None and has_gamma:
            raise ConfigError(f"scheme {s['name']!r}: a reference preset needs a time sweep")
        if spec is not None and spec.kind == "syndrome" and not code.stabilizers:
            raise ConfigError(f"scheme {s['name']!r}: syndrome recovery needs a stabilizer code")
        schemes.append(Scheme(s["name"], code, spec))

    fit = doc.get("fit", {})
    return Scenario(
        name=doc["name"],
        schemes=tuple(schemes),
        noise=noise,
        time_grid=(float(doc["time"]["t_max"]), int(doc["time"]["steps"])) if has_time else None,
        gamma_grid=(
            float(doc["gamma"].get("start", 0.0)),
            float(doc["gamma"].get("stop", 1.0)),
            int(doc["gamma"]["steps"]),
        ) if has_gamma else None,
        outputs=tuple(doc.get("outputs", ["fidelity_curve"])),
        grid_n=int(doc.get("grid_n", 60)),
        refine_iters=int(doc.get("refine_iters", 200)),
        tol_slope=float(doc.get("tol_slope", 1e-8)),
        drop_zero_eigenvalues=bool(doc.get("drop_zero_eigenvalues", False)),
        fit_degree=int(fit.get("degree", 6)),
        fit_constrain_f0=bool(fit.get("constrain_f0", True)),
        raw=doc,
    )


def builtin(name: str, overrides=None) -> Scenario:
    try:
        doc = BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown builtin scenario {name!r}; choose from {sorted(BUILTINS)}") from None
    return load_scenario(doc, overrides)


def load_scenario_file(path, overrides=None) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: scenario must be a JSON object")
    return load_scenario(doc, overrides)


@dataclass(frozen=True, eq=False)
class PointResult:
    """One scheme evaluated at one grid point."""

    f2_min: float
    angles: tuple[float, float]
    m: np.ndarray
    unitality: float
    ep_rank: int
    action: np.ndarray = field(repr=False, default=None)


@dataclass(eq=False)
class ScenarioResult:
    scenario: Scenario
    times: np.ndarray
    gammas: np.ndarray
    points: dict[str, list[PointResult]]

    def f2(self, scheme: str) -> np.ndarray:
        return np.array([p.f2_min for p in self.points[scheme]])

    def m_series(self, scheme: str) -> np.ndarray:
        return np.array([p.m for p in self.points[scheme]])

    def unitality(self, scheme: str) -> np.ndarray:
        return np.array([p.unitality for p in self.points[scheme]])

    def ep_ranks(self, scheme: str) -> np.ndarray:
        return np.array([p.ep_rank for p in self.points[scheme]])

    def divisibility(self, scheme: str) -> DivisibilityReport:
        axis = self.times if self.scenario.is_time_sweep else self.gammas
        return p_divisibility_scan(self.m_series(scheme), times=axis, tol_slope=self.scenario.tol_slope)

    def fidelity_rows(self):
        """``(t, gamma, scheme, f2_min, theta, phi)`` ordered by grid index, then scheme order."""
        for i in range(len(self.gammas)):
            for s in self.scenario.schemes:
                p = self.points[s.name][i]
                yield (self.times[i], self.gammas[i], s.name, p.f2_min, p.angles[0], p.angles[1])


def _ad_noise_cached(cache: dict, gamma: float, n: int) -> SignedKrausMap:
    key = (gamma, n)
    if key not in cache:
        cache[key] = ad_noise(gamma, n)
    return cache[key]


class _Runner:
    def __init__(self, s: Scenario):
        self.s = s
        self.static = {}
        for sch in s.schemes:
            rec = sch.recovery
            if rec is None:
                continue
            if rec.kind == "syndrome":
                self.static[sch.name] = syndrome_recovery(sch.code)
            elif rec.adaptation == "fixed" and rec.fixed_gamma is not None:
                self.static[sch.name] = build_recovery(rec, sch.code, ad_noise(rec.fixed_gamma, sch.code.n_phys))

    def recovery_at(self, sch: Scheme, noise: SignedKrausMap, t: float) -> SignedKrausMap | None:
        rec = sch.recovery
        if rec is None:
            return None
        if sch.name in self.static:
            return self.static[sch.name]
        if rec.adaptation == "exact":
            return build_recovery(rec, sch.code, noise)
        ref_gamma = gamma_of_t(t, preset(rec.reference))
        return build_recovery(rec, sch.code, ad_noise(ref_gamma, sch.code.n_phys))

    def point(self, t: float, gamma: float) -> dict[str, PointResult]:
        cache: dict = {}
        out = {}
        for sch in self.s.schemes:
            noise = _ad_noise_cached(cache, gamma, sch.code.n_phys)
            rec = self.recovery_at(sch, noise, t)
            channel = noise if rec is None else compose(rec, noise, check_tp=False)
            f2, angles = worst_case_fidelity(channel, sch.code, self.s.grid_n, self.s.refine_iters)
            lact = logical_action(channel, sch.code)
            m, _ = m_from_action(lact)
            rank = int(np.linalg.matrix_rank(noise_image(sch.code, noise), tol=1e-12))
            out[sch.name] = PointResult(f2, angles, m, unitality_defect(channel, sch.code), rank, lact)
        return out


def build_recovery(spec: RecoverySpec, code: Code, noise: SignedKrausMap) -> SignedKrausMap:
    """Recovery of kind ``spec.kind`` adapted to ``noise`` (ignored for syndrome recovery)."""
    if spec.kind == "petz":
        return petz(code, noise)
    if spec.kind == "leung":
        return leung(code, noise)
    return syndrome_recovery(code)


def run(s: Scenario, threads: int = 1) -> ScenarioResult:
    """Evaluate every scheme at every grid point.

    Grid points are independent and are spread over ``threads`` worker
    threads; results are stored by grid index, so the output does not depend
    on the thread count.
    """
    grid = s.grid()
    if s.is_time_sweep:
        times = grid
        gammas = np.array([gamma_of_t(t, s.noise) for t in times])
    else:
        times = np.full(len(grid), math.nan)
        gammas = grid
    runner = _Runner(s)
    args = list(zip(times, gammas))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: runner.point(*a), args))
    else:
        results = [runner.point(*a) for a in args]
    points = {sch.name: [r[sch.name] for r in results] for sch in s.schemes}
    return ScenarioResult(s, times, gammas, points)


def m_matrix_series(result: ScenarioResult, scheme: str) -> list[MMatrix]:
    return [MMatrix(p.m) for p in result.points[scheme]]
