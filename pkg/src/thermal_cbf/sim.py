"""Closed-loop navigation harness.

Ground truth is a set of geometric shapes rasterized once into a global
occupancy map. Sensing is an idealized window crop centered on the robot
(no occlusion), matching a motion-capture style setup rather than ray
casting. Each control step: sense, synthesize the safety field over the
local map (skipped when nothing is in range), sample h and its gradient at
the robot, filter the nominal command, integrate one period.

If a solve fails mid-episode the previous frame's field is reused and the
step is flagged; a failure with no previous field terminates the episode.

Multi-robot episodes step round-robin: every robot plans against the other
robots' previous poses (stamped into its sensed map as disks), then all
states advance together.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ScenarioError, SolverFailure
from .field import SafetyField, SynthesisParams, gradient_at, synthesize, value_at
from .krylov import SolverConfig
from .ogm import GridMap
from .robot import DiffeoParams, NominalParams, RobotState, integrate_single, integrate_unicycle, nominal_control, unicycle_from_velocity
from .safety_filter import ControlInput2D, FilterParams, filter as filter_control

log = logging.getLogger("thermal_cbf.sim")


# ---------------------------------------------------------------------------
# World geometry


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    radius: float

    def contains(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.radius**2

    def bounds(self):
        return (self.cx - self.radius, self.cy - self.radius,
                self.cx + self.radius, self.cy + self.radius)


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    w: float
    h: float

    def contains(self, x, y):
        return (self.x0 <= x) & (x <= self.x0 + self.w) & (self.y0 <= y) & (y <= self.y0 + self.h)

    def bounds(self):
        return (self.x0, self.y0, self.x0 + self.w, self.y0 + self.h)


@dataclass(frozen=True)
class SenseConfig:
    height: int = 200
    width: int = 200
    cell_size: float = 0.01


@dataclass(frozen=True)
class RobotSpec:
    start: RobotState
    goals: tuple


@dataclass(frozen=True)
class Scenario:
    arena_w: float
    arena_h: float
    obstacles: tuple
    robots: tuple  # one RobotSpec per robot; single-robot scenarios have one
    sense: SenseConfig
    synthesis: SynthesisParams
    filter_params: FilterParams
    nominal: NominalParams
    dt: float
    model: str = "single_integrator"
    diffeo: DiffeoParams | None = None
    max_steps: int = 4000
    mutual_radius_m: float | None = None

    def __post_init__(self):
        if not (self.arena_w > 0 and self.arena_h > 0):
            raise ScenarioError("arena dimensions must be positive")
        if not self.robots:
            raise ScenarioError("scenario needs at least one robot")
        for spec in self.robots:
            if len(spec.goals) < 1:
                raise ScenarioError("each robot needs at least one goal")
        if self.dt <= 0:
            raise ScenarioError("dt must be positive")
        if self.max_steps < 1:
            raise ScenarioError("max_steps must be >= 1")
        for n in (self.sense.height, self.sense.width):
            if n < 2 or n % 2 != 0:
                raise ScenarioError("local map dimensions must be even and >= 2")
        if not self.sense.cell_size > 0:
            raise ScenarioError("sense cell_size must be positive")
        if self.model not in ("single_integrator", "unicycle"):
            raise ScenarioError(f"unknown model {self.model!r}")
        if self.model == "unicycle" and self.diffeo is None:
            object.__setattr__(self, "diffeo", DiffeoParams())

    @property
    def start(self) -> RobotState:
        return self.robots[0].start

    @property
    def goals(self) -> tuple:
        return self.robots[0].goals

    def other_robot_radius(self) -> float:
        if self.mutual_radius_m is not None:
            return self.mutual_radius_m
        return self.synthesis.robot_radius_m


def _get(d: dict, key: str, what: str):
    try:
        return d[key]
    except (KeyError, TypeError):
        raise ScenarioError(f"missing {what} field {key!r}") from None


def _shape_from_dict(d: dict):
    kind = _get(d, "type", "obstacle")
    if kind == "circle":
        cx, cy = _get(d, "center", "circle")
        return Circle(float(cx), float(cy), float(_get(d, "radius", "circle")))
    if kind == "rect":
        x0, y0 = _get(d, "corner", "rect")
        w, h = _get(d, "extents", "rect")
        return Rect(float(x0), float(y0), float(w), float(h))
    raise ScenarioError(f"unknown obstacle type {kind!r}")


def _robot_from_dict(start: dict, goals) -> RobotSpec:
    st = RobotState(
        x=float(_get(start, "x", "start")),
        y=float(_get(start, "y", "start")),
        theta=float(start.get("theta", 0.0)),
    )
    goal_list = tuple((float(g[0]), float(g[1])) for g in goals)
    return RobotSpec(start=st, goals=goal_list)


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from the documented JSON layout; every structural or
    range problem raises ScenarioError."""
    try:
        arena = _get(doc, "arena", "scenario")
        sense_doc = doc.get("sense", {})
        syn_doc = doc.get("synthesis", {})
        cfg = SolverConfig(
            tol=float(syn_doc.get("tol", 1e-8)),
            max_iters=syn_doc.get("max_iters"),
            restart=int(syn_doc.get("restart", 50)),
        )
        synthesis = SynthesisParams(
            a=float(syn_doc.get("a", 1.0)),
            b_val=float(syn_doc.get("b", 1.0)),
            delta_m=float(syn_doc.get("delta_m", 0.15)),
            robot_radius_m=float(syn_doc.get("robot_radius_m", 0.0)),
            solver=syn_doc.get("solver", "gmres"),
            solver_cfg=cfg,
        )
        filt_doc = doc.get("filter", {})
        filter_params = FilterParams(
            gamma=float(filt_doc.get("gamma", 0.15)),
            v_max=float(filt_doc.get("v_max", 0.15)),
            grad_eps=float(filt_doc.get("grad_eps", 1e-9)),
        )
        nom_doc = doc.get("nominal", {})
        nominal = NominalParams(
            k=float(nom_doc.get("k", 0.15)),
            goal_eps=float(nom_doc.get("goal_eps", 0.005)),
        )
        if "robots" in doc:
            robots = tuple(
                _robot_from_dict(_get(r, "start", "robot"), _get(r, "goals", "robot"))
                for r in doc["robots"]
            )
        else:
            robots = (_robot_from_dict(_get(doc, "start", "scenario"), _get(doc, "goals", "scenario")),)
        diffeo = None
        if "diffeo" in doc:
            diffeo = DiffeoParams(r=float(_get(doc["diffeo"], "r", "diffeo")))
        return Scenario(
            arena_w=float(_get(arena, "width", "arena")),
            arena_h=float(_get(arena, "height", "arena")),
            obstacles=tuple(_shape_from_dict(o) for o in doc.get("obstacles", [])),
            robots=robots,
            sense=SenseConfig(
                height=int(sense_doc.get("height", 200)),
                width=int(sense_doc.get("width", 200)),
                cell_size=float(sense_doc.get("cell_size", 0.01)),
            ),
            synthesis=synthesis,
            filter_params=filter_params,
            nominal=nominal,
            dt=float(doc.get("dt", 0.05)),
            model=doc.get("model", "single_integrator"),
            diffeo=diffeo,
            max_steps=int(doc.get("max_steps", 4000)),
            mutual_radius_m=(float(doc["mutual_radius_m"]) if "mutual_radius_m" in doc else None),
        )
    except ScenarioError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise ScenarioError(f"invalid scenario document: {exc}") from exc


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


# ---------------------------------------------------------------------------
# Rasterization and sensing


def rasterize_world(scn: Scenario) -> GridMap:
    """Ground-truth global map: a cell is occupied iff its center lies inside
    any obstacle shape (boundaries inclusive)."""
    cs = scn.sense.cell_size
    for shape in scn.obstacles:
        x0, y0, x1, y1 = shape.bounds()
        if x0 < 0 or y0 < 0 or x1 > scn.arena_w or y1 > scn.arena_h:
            raise ScenarioError(f"obstacle {shape} extends outside the arena")
    h = max(1, int(round(scn.arena_h / cs)))
    w = max(1, int(round(scn.arena_w / cs)))
    xs = (np.arange(w) + 0.5) * cs
    ys = (np.arange(h) + 0.5) * cs
    gx, gy = np.meshgrid(xs, ys)
    occ = np.zeros((h, w), dtype=bool)
    for shape in scn.obstacles:
        occ |= shape.contains(gx, gy)
    return GridMap(cells=occ, cell_size=cs, origin=(0.5 * cs, 0.5 * cs))


def sense_local(global_map: GridMap, p, sense: SenseConfig) -> GridMap:
    """Window of the global map centered at the cell containing p. Cells
    outside the global extent read as free; the window origin preserves
    world coordinates."""
    cs = global_map.cell_size
    ox, oy = global_map.origin
    ci = int(math.floor((p[1] - oy) / cs + 0.5))
    cj = int(math.floor((p[0] - ox) / cs + 0.5))
    i0 = ci - sense.height // 2
    j0 = cj - sense.width // 2
    window = np.zeros((sense.height, sense.width), dtype=bool)
    gi0, gi1 = max(i0, 0), min(i0 + sense.height, global_map.height)
    gj0, gj1 = max(j0, 0), min(j0 + sense.width, global_map.width)
    if gi0 < gi1 and gj0 < gj1:
        window[gi0 - i0 : gi1 - i0, gj0 - j0 : gj1 - j0] = global_map.cells[gi0:gi1, gj0:gj1]
    return GridMap(cells=window, cell_size=cs, origin=(ox + j0 * cs, oy + i0 * cs))


def _stamp_disks(local: GridMap, disks) -> GridMap:
    """Mark cells whose centers lie within any (x, y, radius) disk occupied."""
    if not disks:
        return local
    cells = np.array(local.cells)
    xs = local.origin[0] + np.arange(local.width) * local.cell_size
    ys = local.origin[1] + np.arange(local.height) * local.cell_size
    for x, y, r in disks:
        cells |= (xs[None, :] - x) ** 2 + (ys[:, None] - y) ** 2 <= r**2
    return GridMap(cells=cells, cell_size=local.cell_size, origin=local.origin)


# ---------------------------------------------------------------------------
# Episode logs and metrics


@dataclass
class StepRecord:
    t: float
    x: float
    y: float
    theta: float
    h: float
    grad_x: float
    grad_y: float
    unom_x: float
    unom_y: float
    ux: float
    uy: float
    constraint_active: bool = False
    degenerate: bool = False
    clamped: bool = False
    field_reused: bool = False
    sense_ms: float = 0.0
    assembly_ms: float = 0.0
    solve_ms: float = 0.0
    sample_ms: float = 0.0
    filter_ms: float = 0.0
    step_ms: float = 0.0
    iterations: int = 0
    n_unknowns: int = 0


@dataclass
class EpisodeLog:
    records: list = dc_field(default_factory=list)
    goal_arrivals: list = dc_field(default_factory=list)  # (goal index, time)
    termination: str = "max_steps"
    robot_id: int = 0


@dataclass
class Metrics:
    min_h: float
    collisions: int
    goals_reached: int
    steps: int
    termination: str
    mean_assembly_ms: float
    max_assembly_ms: float
    mean_solve_ms: float
    max_solve_ms: float
    mean_transition_cells: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def metrics(log_: EpisodeLog, scn: Scenario) -> Metrics:
    """Aggregate an episode. Collision counting is exact shape containment of
    the logged robot centers against the un-inflated ground-truth geometry.
    Timing means exclude obstacle-free steps (no synthesis happened)."""
    recs = log_.records
    collisions = 0
    for r in recs:
        if any(s.contains(r.x, r.y) for s in scn.obstacles):
            collisions += 1
    synth = [r for r in recs if r.n_unknowns > 0]
    mean = lambda vals: float(np.mean(vals)) if vals else 0.0
    peak = lambda vals: float(np.max(vals)) if vals else 0.0
    return Metrics(
        min_h=min((r.h for r in recs), default=scn.synthesis.b_val),
        collisions=collisions,
        goals_reached=len(log_.goal_arrivals),
        steps=len(recs),
        termination=log_.termination,
        mean_assembly_ms=mean([r.assembly_ms for r in synth]),
        max_assembly_ms=peak([r.assembly_ms for r in synth]),
        mean_solve_ms=mean([r.solve_ms for r in synth]),
        max_solve_ms=peak([r.solve_ms for r in synth]),
        mean_transition_cells=mean([r.n_unknowns for r in synth]),
    )


# ---------------------------------------------------------------------------
# The control loop


class _RobotRunner:
    """Per-robot loop state: pose, goal progress, last good field, log."""

    def __init__(self, scn: Scenario, spec: RobotSpec, robot_id: int):
        self.scn = scn
        self.state = spec.start
        self.goals = spec.goals
        self.goal_idx = 0
        self.prev_field: SafetyField | None = None
        self.log = EpisodeLog(robot_id=robot_id)
        self.done = False

    def control_point(self) -> tuple[float, float]:
        """Point the planar velocity command actually steers. For the
        unicycle it is the look-ahead point r ahead of the axle (that point
        has exact single-integrator dynamics under the velocity map), so h
        and its gradient are sampled there; the barrier guarantee then
        transfers to the commanded point."""
        if self.scn.model == "unicycle":
            r = self.scn.diffeo.r
            return (self.state.x + r * math.cos(self.state.theta),
                    self.state.y + r * math.sin(self.state.theta))
        return self.state.position

    def check_start(self, global_map: GridMap, disks) -> None:
        p = self.state.position
        if not (0 <= p[0] <= self.scn.arena_w and 0 <= p[1] <= self.scn.arena_h):
            raise ScenarioError(f"start {p} outside the arena")
        if any(s.contains(p[0], p[1]) for s in self.scn.obstacles):
            raise ScenarioError(f"start {p} lies inside an obstacle")
        local = _stamp_disks(sense_local(global_map, p, self.scn.sense), disks)
        if local.occupied_count() > 0:
            field = synthesize(local, self.scn.synthesis)
            h0 = value_at(field, self.control_point())
            if not h0 > 0:
                raise ScenarioError(f"start safety value {h0:.4f} is not positive")
            self.prev_field = field

    def plan(self, t: float, global_map: GridMap, disks):
        """Compute this step's command from the current pose; returns the
        prepared StepRecord + command, or None when all goals are done."""
        p = self.state.position
        ctrl = self.control_point()
        while self.goal_idx < len(self.goals) and math.dist(ctrl, self.goals[self.goal_idx]) < self.scn.nominal.goal_eps:
            self.log.goal_arrivals.append((self.goal_idx, t))
            self.goal_idx += 1
        if self.goal_idx >= len(self.goals):
            self.done = True
            self.log.termination = "all_goals_reached"
            return None

        rec = StepRecord(t=t, x=self.state.x, y=self.state.y, theta=self.state.theta,
                         h=self.scn.synthesis.b_val, grad_x=0.0, grad_y=0.0,
                         unom_x=0.0, unom_y=0.0, ux=0.0, uy=0.0)
        t0 = time.perf_counter()
        local = _stamp_disks(sense_local(global_map, p, self.scn.sense), disks)
        rec.sense_ms = (time.perf_counter() - t0) * 1e3

        u_nom = nominal_control(ctrl, self.goals[self.goal_idx], self.scn.nominal)
        rec.unom_x, rec.unom_y = u_nom.vx, u_nom.vy

        if local.occupied_count() == 0:
            # Nothing in range: execute the nominal command directly.
            u = u_nom
        else:
            field = None
            try:
                field = synthesize(local, self.scn.synthesis)
                self.prev_field = field
            except SolverFailure as exc:
                if self.prev_field is None:
                    raise
                log.warning("robot %d t=%.2fs: %s; reusing previous field", self.log.robot_id, t, exc)
                field = self.prev_field
                rec.field_reused = True
            rec.assembly_ms = field.stats.assemble_ms if not rec.field_reused else 0.0
            rec.solve_ms = field.stats.solve_ms if not rec.field_reused else 0.0
            rec.iterations = field.stats.solve.iterations if not rec.field_reused else 0
            rec.n_unknowns = field.stats.n_unknowns if not rec.field_reused else 0

            t0 = time.perf_counter()
            rec.h = value_at(field, ctrl)
            rec.grad_x, rec.grad_y = gradient_at(field, ctrl)
            rec.sample_ms = (time.perf_counter() - t0) * 1e3

            t0 = time.perf_counter()
            outcome = filter_control(u_nom, rec.h, (rec.grad_x, rec.grad_y), self.scn.filter_params)
            rec.filter_ms = (time.perf_counter() - t0) * 1e3
            u = outcome.u
            rec.constraint_active = outcome.constraint_active
            rec.degenerate = outcome.degenerate
            rec.clamped = outcome.clamped

        rec.ux, rec.uy = u.vx, u.vy
        rec.step_ms = rec.assembly_ms + rec.solve_ms + rec.sample_ms + rec.filter_ms
        return rec, u

    def commit(self, rec: StepRecord, u: ControlInput2D) -> None:
        if self.scn.model == "unicycle":
            v, omega = unicycle_from_velocity(self.state.theta, u, self.scn.diffeo)
            self.state = integrate_unicycle(self.state, v, omega, self.scn.dt)
        else:
            x, y = integrate_single(self.state.position, u, self.scn.dt)
            self.state = RobotState(x=x, y=y, theta=self.state.theta)
        self.log.records.append(rec)


def _other_disks(runners, me: int, radius: float):
    return [(r.state.x, r.state.y, radius) for k, r in enumerate(runners) if k != me]


def run_episode(scn: Scenario, field_sink=None) -> EpisodeLog:
    """Single-robot closed loop; returns the per-step log.

    field_sink, when given, is called as field_sink(step_index, SafetyField)
    after each synthesis (used for per-frame dumps).
    """
    if len(scn.robots) != 1:
        raise ScenarioError("run_episode handles one robot; use run_multi_episode")
    return run_multi_episode(scn, field_sink=field_sink)[0]


def run_multi_episode(scn: Scenario, field_sink=None) -> list[EpisodeLog]:
    """Round-robin multi-robot loop: all robots plan against the previous
    poses (other robots stamped into the sensed maps as disks), then all
    integrate. Returns one EpisodeLog per robot."""
    global_map = rasterize_world(scn)
    runners = [_RobotRunner(scn, spec, k) for k, spec in enumerate(scn.robots)]
    radius = scn.other_robot_radius()

    for k, r in enumerate(runners):
        r.check_start(global_map, _other_disks(runners, k, radius))

    for step in range(scn.max_steps):
        t = step * scn.dt
        plans = []
        try:
            for k, r in enumerate(runners):
                plans.append(None if r.done else r.plan(t, global_map, _other_disks(runners, k, radius)))
        except SolverFailure as exc:
            log.error("t=%.2fs: unrecoverable solver failure: %s", t, exc)
            for r in runners:
                if not r.done:
                    r.log.termination = "solver_failure"
            break
        if all(r.done for r in runners):
            break
        for r, plan in zip(runners, plans):
            if plan is not None:
                rec, u = plan
                r.commit(rec, u)
                if field_sink is not None and rec.n_unknowns > 0 and len(runners) == 1:
                    field_sink(step, r.prev_field)
    return [r.log for r in runners]


# ---------------------------------------------------------------------------
# Episode directory contract


def write_episode_outputs(log_: EpisodeLog, scn: Scenario, out_dir, prefix: str = "") -> Metrics:
    """Write trajectory.csv, h_log.csv, timings.csv and metrics.json."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    path = lambda name: os.path.join(out_dir, prefix + name)

    with open(path("trajectory.csv"), "w") as fh:
        fh.write("t,x,y,theta,vx,vy,h\n")
        for r in log_.records:
            fh.write(f"{r.t:.9g},{r.x:.9g},{r.y:.9g},{r.theta:.9g},{r.ux:.9g},{r.uy:.9g},{r.h:.9g}\n")
    with open(path("h_log.csv"), "w") as fh:
        fh.write("t,h\n")
        for r in log_.records:
            fh.write(f"{r.t:.9g},{r.h:.9g}\n")
    with open(path("timings.csv"), "w") as fh:
        fh.write("t,assembly_ms,solve_ms,iterations,n_unknowns\n")
        for r in log_.records:
            fh.write(f"{r.t:.9g},{r.assembly_ms:.6g},{r.solve_ms:.6g},{r.iterations},{r.n_unknowns}\n")

    m = metrics(log_, scn)
    doc = m.to_dict()
    doc["goal_arrivals"] = [{"goal": g, "t": t} for g, t in log_.goal_arrivals]
    with open(path("metrics.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return m
