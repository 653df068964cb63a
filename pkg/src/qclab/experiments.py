"""Named experiments behind the CLI.

Each ``run_<name>(cfg, out_dir, seed)`` returns an :class:`Outcome` holding
tolerance checks, informational observations and the data files written.
Targets come from closed-form oracles (Gaussian moments, analytic
trajectories); measurements come from the grid pipeline.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import born, classical, coherent, evolve, kernel_space, multiparticle, observables
from .config import grid_from_config, potential_from_config, units_from_config
from .coherent import CoherentParams
from .grid import GridSpec, WaveFunction, coherent_values, l2_inner, position_variance
from .potentials import PotentialSpec, linear_ramp


@dataclass(frozen=True)
class Check:
    """One measured quantity against its target.

    ``mode`` is ``"abs"`` (absolute difference), ``"rel"`` (relative to the
    target) or ``"bound"`` (the measurement itself is a residual that must not
    exceed the tolerance; the target is zero).
    """

    name: str
    identity: str
    measured: float
    target: float
    tolerance: float
    mode: str = "abs"

    @property
    def residual(self) -> float:
        if self.mode == "bound":
            return abs(self.measured)
        diff = abs(self.measured - self.target)
        if self.mode == "rel":
            return diff / abs(self.target) if self.target != 0 else diff
        return diff

    @property
    def passed(self) -> bool:
        r = self.residual
        return bool(np.isfinite(r) and r <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "identity": self.identity, "measured": _num(self.measured),
                "target": _num(self.target), "residual": _num(self.residual),
                "tolerance": self.tolerance, "mode": self.mode, "passed": self.passed}


@dataclass
class Outcome:
    checks: list = field(default_factory=list)
    observations: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _params(center, momentum, sigma) -> CoherentParams:
    return CoherentParams(np.atleast_1d(center), np.atleast_1d(momentum), sigma)


def _write_rows(path: Path, header, rows) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    return path.name


# closed-form components of the Schrodinger velocity of a 1D packet under a
# potential at most quadratic: V = -F x + k/2 (x - c)^2
def packet_oracle(params: CoherentParams, mass: float, hbar: float, force: float = 0.0,
                  stiffness: float = 0.0, center: float = 0.0) -> dict:
    a = float(params.center[0])
    p = float(params.momentum[0])
    s = params.sigma
    mean_v = -force * a + 0.5 * stiffness * ((a - center) ** 2 + s**2)
    energy = p**2 / (2 * mass) + hbar**2 / (8 * mass * s**2) + mean_v
    slope = -force + stiffness * (a - center)
    return {
        "phase": energy / hbar,
        "spatial": p / (mass * 2 * s),
        "momentum": -s * slope / hbar,
        "spreading": math.sqrt(2) * hbar / (8 * mass * s**2) - stiffness * s**2 / (math.sqrt(2) * hbar),
    }


def run_decompose(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    u = units_from_config(cfg["units"])
    tol = cfg["tolerances"]
    pk = cfg["packet"]
    params = _params(pk["center"], pk["momentum"], pk["sigma"])
    res = Outcome()
    frame = coherent.tangent_frame(params, grid, u.hbar)
    cases = [("free", PotentialSpec.free(), {}),
             ("linear", PotentialSpec.linear(cfg["linear_force"]), {"force": cfg["linear_force"]})]
    h = cfg["harmonic"]
    hparams = _params(h["center"], h["momentum"], pk["sigma"])
    cases.append(("harmonic", PotentialSpec.harmonic(h["stiffness"]),
                  {"stiffness": h["stiffness"]}))
    rows = []
    for label, V, kw in cases:
        p = hparams if label == "harmonic" else params
        fr = coherent.tangent_frame(p, grid, u.hbar) if label == "harmonic" else frame
        vel = evolve.state_velocity(fr.base, V, u.mass, u.hbar)
        dec = coherent.decompose_velocity(vel, fr, p)
        want = packet_oracle(p, u.mass, u.hbar, **kw)
        got = {"phase": dec.phase_component, "spatial": dec.spatial[0],
               "momentum": dec.momentum[0], "spreading": dec.spreading}
        for key in ("phase", "spatial", "momentum", "spreading"):
            res.checks.append(Check(f"{label}.{key}", f"velocity-component-{key}", got[key],
                                    want[key], tol["component_abs"]))
        res.checks.append(Check(f"{label}.residual", "decomposition-completeness",
                                dec.residual_norm / dec.velocity_norm, 0.0, tol["residual_rel"],
                                "bound"))
        speed2 = sum(v**2 for v in want.values())
        res.checks.append(Check(f"{label}.speed_squared", "velocity-norm-squared",
                                dec.velocity_norm**2, speed2, tol["speed_abs"]))
        res.observations[label] = dec.to_dict()
        rows.append([dec.phase_component, dec.spatial[0], dec.momentum[0], dec.spreading,
                     dec.residual_norm, dec.velocity_norm])
    path = out / "decomposition.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case", "phase", "spatial", "momentum", "spreading", "residual", "speed"])
        for (label, _, _), row in zip(cases, rows):
            w.writerow([label] + [repr(float(v)) for v in row])
    res.files.append(path.name)
    return res


def run_evolve(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    u = units_from_config(cfg["units"])
    tol = cfg["tolerances"]
    pk = cfg["packet"]
    V = potential_from_config(cfg["potential"])
    if V.family != "harmonic":
        raise ValueError("the evolve experiment traces a harmonic oscillation")
    omega_f = math.sqrt(V.stiffness / u.mass)
    period = 2 * math.pi / omega_f
    steps = int(cfg["periods"]) * int(cfg["steps_per_period"])
    T = cfg["periods"] * period
    dt = T / steps
    stride = int(cfg["diagnostics_stride"])
    snap_stride = max(steps // max(int(cfg["snapshots"]), 1), 1)
    phi0 = coherent.omega(_params(pk["center"], pk["momentum"], pk["sigma"]), grid, u.hbar)
    traj = evolve.propagate(phi0, V, u.mass, u.hbar, dt, T, snapshot_stride=snap_stride,
                            diagnostics_stride=stride)
    a0 = pk["center"][0] - V.center[0]
    p0 = pk["momentum"][0]
    x_exact = V.center[0] + a0 * np.cos(omega_f * traj.times) \
        + p0 / (u.mass * omega_f) * np.sin(omega_f * traj.times)
    res = Outcome()
    res.checks.append(Check("position_trace", "ehrenfest-oscillator", float(
        np.abs(traj.x_mean[:, 0] - x_exact).max()), 0.0, tol["trace_abs"], "bound"))
    res.checks.append(Check("norm", "unitarity", float(np.abs(traj.norm - 1).max()), 0.0,
                            tol["norm_abs"], "bound"))
    e0 = traj.energy[0]
    res.checks.append(Check("energy_drift", "phase-component-conserved",
                            float(np.abs(traj.energy - e0).max() / abs(e0)), 0.0,
                            tol["energy_rel"], "bound"))
    res.observations["dt"] = dt
    res.observations["energy_spread_drift"] = float(
        np.abs(traj.energy_spread - traj.energy_spread[0]).max())
    res.observations["renormalizations"] = len(traj.log)
    traj.to_csv(out / "trajectory.csv")
    res.files.append("trajectory.csv")
    snapdir = out / "snapshots"
    snapdir.mkdir(exist_ok=True)
    res.files += [str(Path(p).relative_to(out)) for p in traj.write_snapshots(snapdir)]
    return res


def run_spread(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    u = units_from_config(cfg["units"])
    s = cfg["sigma"]
    phi0 = coherent.omega(_params([0.0] * grid.dim, [0.0] * grid.dim, s), grid, u.hbar)
    traj = evolve.propagate(phi0, PotentialSpec.free(), u.mass, u.hbar, cfg["dt"],
                            cfg["duration"], diagnostics_stride=10)
    t = traj.times
    exact = s**2 + (u.hbar * t / (2 * u.mass * s)) ** 2
    measured = traj.width[:, 0] ** 2
    res = Outcome()
    final = float(position_variance(traj.final_state)[0])
    res.checks.append(Check("sigma_t_squared", "free-spreading-law", final, float(exact[-1]),
                            cfg["tolerances"]["width_rel"], "rel"))
    res.observations["max_rel_error_along_run"] = float(np.abs(measured / exact - 1).max())
    res.files.append(_write_rows(out / "spreading.csv", ["t", "sigma_t_sq", "exact"],
                                 zip(t, measured, exact)))
    return res


CASE_CODES = {"free": 0, "linear": 1, "harmonic": 2}


def _ehrenfest_case(name, V, params, grid, u, dt, T, tol, res, rows):
    steps = max(int(round(T / dt)), 1)
    traj = evolve.propagate(coherent.omega(params, grid, u.hbar), V, u.mass, u.hbar,
                            T / steps, T)
    r = evolve.ehrenfest_residuals(traj, V)
    rx, rp = r.max()
    res.checks.append(Check(f"{name}.position", "ehrenfest-position", rx, 0.0, tol, "bound"))
    res.checks.append(Check(f"{name}.momentum", "ehrenfest-momentum", rp, 0.0, tol, "bound"))
    rows.extend((CASE_CODES[name], t, a, b)
                for t, a, b in zip(r.times[::10], r.position[::10, 0], r.momentum[::10, 0]))


def run_ehrenfest(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    u = units_from_config(cfg["units"])
    tol = cfg["tolerances"]
    dt = cfg["dt"]
    res = Outcome()
    rows: list = []
    h = cfg["harmonic"]
    period = 2 * math.pi * math.sqrt(u.mass / h["stiffness"])
    _ehrenfest_case("harmonic", PotentialSpec.harmonic(h["stiffness"]),
                    _params(h["center"], 0.0, h["sigma"]), grid, u, dt, h["periods"] * period,
                    tol["ehrenfest_abs"], res, rows)
    # without an intrinsic frequency the time unit is the spreading time 2 m sigma^2 / hbar
    f = cfg["free"]
    tau = 2 * u.mass * f["sigma"] ** 2 / u.hbar
    _ehrenfest_case("free", PotentialSpec.free(),
                    _params(f["center"], u.mass * f["velocity"], f["sigma"]), grid, u, f["dt"],
                    f["periods"] * tau, tol["ehrenfest_abs"], res, rows)
    lin = cfg["linear"]
    tau = 2 * u.mass * lin["sigma"] ** 2 / u.hbar
    _ehrenfest_case("linear", PotentialSpec.linear(lin["force"]),
                    _params(lin["center"], u.mass * lin["velocity"], lin["sigma"]), grid, u, lin["dt"],
                    lin["periods"] * tau, tol["ehrenfest_abs"], res, rows)
    pr = cfg["projection_rate"]
    params = _params(pr["center"], pr["momentum"], pr["sigma"])
    potentials = [
        ("free", PotentialSpec.free()),
        ("linear", PotentialSpec.linear(pr["force"])),
        ("harmonic", PotentialSpec.harmonic(pr["stiffness"])),
        ("linear_ramp", PotentialSpec.linear(pr["force"], schedule=linear_ramp(pr["ramp_rate"]))),
    ]
    for name, V in potentials:
        t0 = pr["t0"] if V.time_dependent else 0.0
        rate = evolve.projection_rate_check(params, V, grid, u.mass, u.hbar, t0, pr["step"])
        res.checks.append(Check(f"projection_rate.{name}", "spatial-projection-rate",
                                float(rate.rate[0]), float(rate.expected[0]),
                                tol["projection_rate_abs"]))
    res.files.append(_write_rows(out / "ehrenfest_residuals.csv",
                                 ["case", "t", "position_residual", "momentum_residual"], rows))
    res.observations["case_codes"] = CASE_CODES
    return res


def run_constrained(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    u = units_from_config(cfg["units"])
    tol = cfg["tolerances"]
    res = Outcome()
    h = cfg["harmonic"]
    V = PotentialSpec.harmonic(h["stiffness"])
    T = h["periods"] * 2 * math.pi * math.sqrt(u.mass / h["stiffness"])
    dt = T / h["steps"]
    p0 = _params(h["center"], h["momentum"], h["sigma"])
    ct = classical.constrained_evolve(p0, V, grid, u.mass, u.hbar, dt, T)
    nt = classical.newton_integrate(u.mass, V, p0.center, p0.momentum / u.mass, dt, T)
    res.checks.append(Check("harmonic.position", "constrained-equals-newton",
                            float(np.abs(ct.center - nt.position).max()), 0.0,
                            tol["position_abs"], "bound"))
    res.observations["harmonic.max_discarded_norm"] = float(ct.discarded_norm.max())
    ct.to_csv(out / "constrained_harmonic.csv", nt, u.mass)
    res.files.append("constrained_harmonic.csv")

    lin = cfg["linear"]
    V = PotentialSpec.linear(lin["force"])
    T = lin["duration"]
    dt = T / lin["steps"]
    p0 = _params(lin["center"], lin["momentum"], lin["sigma"])
    ct = classical.constrained_evolve(p0, V, grid, u.mass, u.hbar, dt, T)
    nt = classical.newton_integrate(u.mass, V, p0.center, p0.momentum / u.mass, dt, T)
    res.checks.append(Check("linear.position", "constrained-equals-newton",
                            float(np.abs(ct.center - nt.position).max()), 0.0,
                            tol["position_abs"], "bound"))
    p_exact = lin["momentum"] + lin["force"] * ct.times
    res.checks.append(Check("linear.momentum", "constant-force-impulse",
                            float(np.abs(ct.momentum[:, 0] - p_exact).max()), 0.0,
                            tol["momentum_abs"], "bound"))
    ct.to_csv(out / "constrained_linear.csv", nt, u.mass)
    res.files.append("constrained_linear.csv")
    return res


def run_action(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    m = cfg["units"]["mass"]
    K = kernel_space.KernelSpace(cfg["sigma"])
    tol = cfg["tolerances"]
    n = int(cfg["samples"])
    res = Outcome()
    f = cfg["free"]
    t = np.linspace(0.0, f["duration"], n)
    path = f["velocity"] * t
    act = classical.action_functional(path, t, m, PotentialSpec.free(), K)
    res.checks.append(Check("free.h_vs_classical", "action-reduction", act.h_action,
                            act.classical_action, tol["action_rel"], "rel"))
    res.checks.append(Check("free.oracle", "free-action", act.h_action,
                            0.5 * m * f["velocity"] ** 2 * f["duration"], tol["oracle_rel"], "rel"))
    h = cfg["harmonic"]
    k = h["stiffness"]
    w = math.sqrt(k / m)
    T = 0.5 * math.pi / w
    t = np.linspace(0.0, T, n)
    A, B = h["amplitude_cos"], h["amplitude_sin"]
    path = A * np.cos(w * t) + B * np.sin(w * t)
    V = PotentialSpec.harmonic(k)
    act = classical.action_functional(path, t, m, V, K)
    res.checks.append(Check("harmonic.h_vs_classical", "action-reduction", act.h_action,
                            act.classical_action, tol["action_rel"], "rel"))
    res.checks.append(Check("harmonic.oracle", "oscillator-action", act.h_action,
                            classical.oscillator_action(A, B, T, m, k), tol["oracle_rel"], "rel"))
    # stationarity of the straight free path
    t = np.linspace(0.0, f["duration"], n)
    base = classical.action_functional(f["velocity"] * t, t, m, PotentialSpec.free(), K).h_action
    rows = []
    coeff_exact = 0.5 * m * (math.pi / f["duration"]) ** 2 * f["duration"] / 2
    for eps in cfg["stationarity_eps"]:
        bumped = f["velocity"] * t + eps * np.sin(math.pi * t / f["duration"])
        da = classical.action_functional(bumped, t, m, PotentialSpec.free(), K).h_action - base
        coeff = da / eps**2
        rows.append((eps, da, coeff))
        res.checks.append(Check(f"stationarity.eps={eps:g}", "least-action-second-order",
                                coeff, coeff_exact, tol["stationarity_rel"], "rel"))
    res.files.append(_write_rows(out / "stationarity.csv", ["eps", "delta_action", "coefficient"],
                                 rows))
    return res


def run_born(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    tol = cfg["tolerances"]
    s = cfg["sigma"]
    res = Outcome()
    sweep = born.equivalence_sweep(s, grid, int(cfg["separations"]),
                                   max_sigmas=cfg["max_sigmas"])
    res.checks.append(Check("equivalence_sweep", "born-normal-equivalence",
                            max(e.residual for e in sweep), 0.0, tol["equivalence_abs"], "bound"))
    born.write_sweep_csv(sweep, out / "equivalence_sweep.csv")
    res.files.append("equivalence_sweep.csv")

    sh = cfg["sharp"]
    params = _params([0.0] * grid.dim, [0.0] * grid.dim, sh["sigma"])
    divisors = [int(d) for d in sh["divisors"]]
    widths = [sh["sigma"] / d for d in divisors]
    lim = born.sharp_state_limit(params, params.center, widths, grid, sh["probe"])
    idx = divisors.index(int(sh["check_divisor"]))
    res.checks.append(Check(f"sharp_ratio.{sh['probe']}", "sharp-probe-limit",
                            float(lim.ratios[idx]), 1.0, tol["sharp_ratio_rel"], "rel"))
    res.checks.append(Check(f"sharp_order.{sh['probe']}", "sharp-probe-order",
                            float(lim.orders[idx - 1]), 2.0, tol["order_abs"]))
    res.observations["sharp"] = {"probe": lim.probe, "widths": lim.probe_widths.tolist(),
                                 "ratios": lim.ratios.tolist(),
                                 "analytic_limit": lim.analytic_limit}
    wide = born.sharp_state_limit(params, params.center, [sh["sigma"]], grid, sh["probe"])
    res.observations["sharp_mismatch_at_equal_width"] = {
        "ratio": float(wide.ratios[0]), "flagged": list(wide.flagged)}
    rows = []
    for target in cfg["distance_targets"]:
        sep, got = born.separation_for_distance(target, s, grid, tol["distance_abs"])
        rows.append((target, sep, got))
        res.checks.append(Check(f"distance_realised.{target:g}", "distance-takes-all-values",
                                got, target, tol["distance_abs"]))
    res.files.append(_write_rows(out / "distance_realisation.csv",
                                 ["target", "separation", "achieved"], rows))
    return res


def run_twobody(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    hbar = cfg["units"]["hbar"]
    m1, m2 = cfg["masses"]
    tol = cfg["tolerances"]
    c1, c2 = cfg["particle1"], cfg["particle2"]
    p1 = _params(c1["center"], c1["momentum"], c1["sigma"])
    p2 = _params(c2["center"], c2["momentum"], c2["sigma"])
    k = cfg["stiffness"]
    res = Outcome()
    psi = multiparticle.tensor_state(p1, p2, grid, hbar)
    frames = multiparticle.particle_frames(p1, p2, grid, hbar)
    res.checks.append(Check("cross_orthogonality", "per-particle-frames-orthogonal",
                            multiparticle.cross_orthogonality(frames), 0.0,
                            tol["orthogonality_abs"], "bound"))
    free1, free2 = multiparticle.per_particle_components(psi, p1, p2, m1, m2, PotentialSpec.free(),
                                                         hbar)
    for i, (pp, m, comp) in enumerate(((p1, m1, free1), (p2, m2, free2)), start=1):
        v = pp.momentum[0] / m
        res.checks.append(Check(f"free.spatial{i}", "per-particle-spatial", comp.spatial[0],
                                v / (2 * pp.sigma), tol["component_abs"]))
    V = PotentialSpec.coupled(k)
    cp1, cp2 = multiparticle.per_particle_components(psi, p1, p2, m1, m2, V, hbar)
    grad = (k * (p1.center[0] - p2.center[0]), -k * (p1.center[0] - p2.center[0]))
    for i, (pp, m, comp) in enumerate(((p1, m1, cp1), (p2, m2, cp2)), start=1):
        res.checks.append(Check(f"coupled.spatial{i}", "per-particle-spatial", comp.spatial[0],
                                pp.momentum[0] / m / (2 * pp.sigma), tol["component_abs"]))
        res.checks.append(Check(f"coupled.momentum{i}", "per-particle-momentum",
                                comp.momentum[0], -grad[i - 1] * pp.sigma / hbar,
                                tol["component_abs"]))
    res.observations["coupled"] = {"particle1": cp1.to_dict(), "particle2": cp2.to_dict()}

    dt, T, stride = cfg["dt"], cfg["duration"], int(cfg["diagnostics_stride"])
    sep = PotentialSpec.harmonic(k)
    tr = multiparticle.two_body_propagate(psi, m1, m2, sep, dt, T, hbar,
                                          diagnostics_stride=stride)
    res.checks.append(Check("separable.schmidt", "product-preserved",
                            multiparticle.schmidt_number(tr.final_state) - 1, 0.0,
                            tol["schmidt_abs"], "bound"))
    tr = multiparticle.two_body_propagate(psi, m1, m2, V, dt, T, hbar, diagnostics_stride=stride)
    total = tr.p_mean.sum(axis=1)
    res.checks.append(Check("coupled.total_momentum", "translation-invariance",
                            float(np.abs(total - total[0]).max()), 0.0, tol["momentum_abs"],
                            "bound"))
    res.observations["coupled.final_schmidt_number"] = multiparticle.schmidt_number(tr.final_state)
    multiparticle.write_grid_csv(tr.final_state, out / "coupled_density.csv")
    res.files.append("coupled_density.csv")
    tr = multiparticle.two_body_propagate(psi, m1, m2, PotentialSpec.free(), dt, T, hbar,
                                          diagnostics_stride=stride)
    for i, (pp, m) in enumerate(((p1, m1), (p2, m2))):
        exact = pp.sigma**2 + (hbar * T / (2 * m * pp.sigma)) ** 2
        res.checks.append(Check(f"free.width{i + 1}", "free-spreading-law",
                                float(tr.width[-1, i] ** 2), exact, tol["width_rel"], "rel"))

    con = cfg["constrained"]
    g2 = GridSpec(2, int(con["n"]), grid.box_length)
    dtc = con["duration"] / con["steps"]
    ct = multiparticle.constrained_two_body(p1, p2, V, g2, m1, m2, hbar, dtc, con["duration"])
    nt = multiparticle.two_body_newton(p1, p2, V, m1, m2, dtc, con["duration"])
    res.checks.append(Check("constrained.position", "constrained-equals-newton",
                            float(np.abs(ct.centers - nt.position).max()), 0.0,
                            tol["constrained_abs"], "bound"))
    res.files.append(_write_rows(
        out / "constrained_twobody.csv", ["t", "a1", "a2", "a1_newton", "a2_newton"],
        ((t, *a, *b) for t, a, b in zip(ct.times, ct.centers, nt.position))))
    return res


def random_state(grid: GridSpec, rng: np.random.Generator, terms: int = 3) -> WaveFunction:
    """Normalised superposition of a few packets placed well inside the box.

    Widths and centres keep every packet at least ``11 sigma`` from the
    edge, so the periodic seam (where ``x`` jumps) sees nothing above
    roundoff.
    """
    half = grid.half_length
    vals = np.zeros(grid.shape, dtype=complex)
    for _ in range(terms):
        s = rng.uniform(0.3, 0.7)
        reach = max(half - 11 * s, 0.0)
        a = rng.uniform(-reach, reach, grid.dim)
        p = rng.uniform(-2.0, 2.0, grid.dim)
        vals += (rng.normal() + 1j * rng.normal()) * coherent_values(grid, a, p, s)
    phi = WaveFunction(grid, vals)
    return phi.normalize()


def random_observable(rng: np.random.Generator, hbar: float = 1.0) -> observables.LinearOperator:
    """Real polynomial in ``x`` plus real polynomial in ``p``, both of degree two."""
    cx = rng.uniform(-1, 1, 3)
    cp = rng.uniform(-1, 1, 3)
    return observables.polynomial_position(cx) + observables.polynomial_momentum(cp, hbar)


def run_geometry(cfg: dict, out: Path, seed: int = 0) -> Outcome:
    grid = grid_from_config(cfg["grid"])
    pgrid = grid_from_config(cfg["property_grid"])
    u = units_from_config(cfg["units"])
    tol = cfg["tolerances"]
    s = cfg["sigma"]
    K = kernel_space.KernelSpace(s)
    res = Outcome()
    rng = np.random.default_rng(seed)

    # kernel identities, closed form and on the grid
    a = [0.3]
    d0 = kernel_space.delta(a)
    d1 = kernel_space.delta(a, weight=-1.0, multi_index=(1,))
    res.checks.append(Check("delta_norm", "kernel-delta-norm",
                            kernel_space.delta_h_inner(d0, d0, K).real, 1.0,
                            tol["kernel_closed_abs"]))
    res.checks.append(Check("derivative_norm", "kernel-derivative-norm",
                            kernel_space.delta_h_inner(d1, d1, K).real, 1 / (4 * s**2),
                            tol["kernel_closed_abs"]))
    worst = 0.0
    for _ in range(20):
        e1 = kernel_space.delta(rng.uniform(-2, 2, 1), complex(rng.normal(), rng.normal()),
                                (int(rng.integers(0, 3)),))
        e2 = kernel_space.delta(rng.uniform(-2, 2, 1), complex(rng.normal(), rng.normal()),
                                (int(rng.integers(0, 3)),))
        closed = kernel_space.delta_h_inner(e1, e2, K)
        gridv = l2_inner(kernel_space.rho_sigma(e1, K, grid), kernel_space.rho_sigma(e2, K, grid))
        worst = max(worst, abs(closed - gridv))
    res.checks.append(Check("factorisation", "kernel-factorisation", worst, 0.0,
                            tol["kernel_grid_abs"], "bound"))
    worst = 0.0
    for _ in range(20):
        phi, psi = random_state(grid, rng), random_state(grid, rng)
        direct = kernel_space.h_inner_grid(phi, psi, K)
        smoothed = l2_inner(kernel_space.apply_rho(phi, K), kernel_space.apply_rho(psi, K))
        worst = max(worst, abs(direct - smoothed))
    res.checks.append(Check("factorisation.grid_functions", "kernel-factorisation", worst, 0.0,
                            tol["kernel_grid_abs"], "bound"))

    # isometric embedding over random straight paths
    closed_err = grid_err = 0.0
    times = np.linspace(0.0, 1.0, 5)
    for _ in range(int(cfg["paths"])):
        start, v = rng.uniform(-3, 3), rng.uniform(-2, 2)
        path = start + v * times
        proj = kernel_space.delta_path_projections(path, times, K)
        closed_err = max(closed_err, float(np.abs(proj.h_speed / proj.euclidean_speed - 1).max()))
        rho = kernel_space.rho_path_speed(path, times, K, grid)
        grid_err = max(grid_err, float(np.abs(rho / proj.euclidean_speed - 1).max()))
    res.checks.append(Check("embedding.closed", "isometric-embedding", closed_err, 0.0,
                            tol["embedding_closed_rel"], "bound"))
    res.checks.append(Check("embedding.grid", "isometric-embedding", grid_err, 0.0,
                            tol["embedding_grid_rel"], "bound"))

    # projective speed
    hfree = observables.hamiltonian(PotentialSpec.free(), u.mass, u.hbar)
    moving = coherent.omega(_params(0.0, u.mass * 1.0, s), grid, u.hbar)
    ps = observables.projective_speed(moving, hfree, u.hbar)
    res.checks.append(Check("projective_speed.fs", "projective-speed", ps.finite_difference,
                            ps.speed, tol["projective_abs"]))
    res.checks.append(Check("projective_speed.oracle", "projective-speed", ps.speed,
                            math.sqrt(1.5), tol["projective_abs"]))
    hosc = observables.hamiltonian(PotentialSpec.harmonic(1.0), u.mass, u.hbar)
    ground_width = math.sqrt(u.hbar / (2 * u.mass * 1.0))
    ground = coherent.omega(_params(0.0, 0.0, ground_width), grid, u.hbar)
    ps0 = observables.projective_speed(ground, hosc, u.hbar)
    res.checks.append(Check("stationary.speed", "stationary-state", ps0.speed, 0.0,
                            tol["stationary_abs"], "bound"))
    res.checks.append(Check("stationary.fs", "stationary-state", ps0.finite_difference, 0.0,
                            tol["stationary_abs"], "bound"))
    res.checks.append(Check("stationary.full_speed", "stationary-state", ps0.full_speed,
                            0.5 * math.sqrt(1.0 / u.mass), tol["stationary_abs"]))

    # acceleration split on the packet at rest
    rest = coherent.omega(_params(0.0, 0.0, s), grid, u.hbar)
    acc = observables.acceleration_decomposition(rest, hfree, u.hbar)
    dp = u.hbar / (2 * s)
    p4, p8 = 3 * dp**4, 105 * dp**8
    target = math.sqrt(p8 - p4**2) / (2 * u.mass) ** 2 / u.hbar**2
    res.checks.append(Check("acceleration.tangential", "phase-tangential-acceleration",
                            acc.phase_tangential, 0.0, tol["tangential_abs"], "bound"))
    res.checks.append(Check("acceleration.orthogonal", "energy-square-uncertainty",
                            acc.orthogonal_norm, target, tol["orthogonal_rel"], "rel"))
    res.observations["acceleration.radial_vs_speed_squared"] = [acc.radial, -acc.speed_squared]

    # property suites
    cases = int(cfg["cases"])
    tang = sym = comm = cons = 0.0
    cc = cfg["conservation"]
    xop, pop = observables.position(0), observables.momentum(0, u.hbar)
    for _ in range(cases):
        phi = random_state(pgrid, rng)
        psi = random_state(pgrid, rng)
        A = random_observable(rng, u.hbar)
        field_ = observables.vector_field(A, phi)
        tang = max(tang, abs(l2_inner(phi, field_).real))
        sym = max(sym, abs(l2_inner(phi, psi) - np.conj(l2_inner(psi, phi))))
        chk = observables.lie_bracket_check(xop, pop, phi, phi * (1j * u.hbar))
        comm = max(comm, chk.relative)
    for _ in range(cases):
        params = _params(rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(0.4, 0.8))
        V = [PotentialSpec.free(), PotentialSpec.linear(rng.uniform(-1, 1)),
             PotentialSpec.harmonic(rng.uniform(0.2, 2.0))][int(rng.integers(0, 3))]
        phi = coherent.omega(params, pgrid, u.hbar)
        tr = evolve.propagate(phi, V, u.mass, u.hbar, cc["dt"], cc["dt"] * cc["steps"])
        de = np.abs(tr.energy - tr.energy[0]).max() / max(abs(tr.energy[0]), 1e-300)
        ds = np.abs(tr.energy_spread - tr.energy_spread[0]).max() / tr.energy_spread[0]
        cons = max(cons, de, ds)
    res.checks.append(Check("property.tangency", "vector-field-tangent", tang, 0.0,
                            tol["tangency_abs"], "bound"))
    res.checks.append(Check("property.conjugate_symmetry", "inner-product-symmetry", sym, 0.0,
                            tol["symmetry_abs"], "bound"))
    res.checks.append(Check("property.conservation", "energy-moments-conserved", cons, 0.0,
                            tol["conservation_rel"], "bound"))
    res.checks.append(Check("property.commutator", "bracket-equals-commutator", comm, 0.0,
                            tol["commutator_rel"], "bound"))
    res.observations["cases"] = cases
    return res


RUNNERS = {
    "decompose": run_decompose,
    "evolve": run_evolve,
    "spread": run_spread,
    "ehrenfest": run_ehrenfest,
    "constrained": run_constrained,
    "action": run_action,
    "born": run_born,
    "twobody": run_twobody,
    "geometry": run_geometry,
}
