"""Command line entry point: ``rydlat <subcommand> --config FILE [--set k=v] [--out DIR] [--threads N]``."""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import blockade as bk
from . import budget, lattice, motional, spectrum
from .config import apply_overrides, default_config, load_json, params_to_config, parse_config_dict
from .errors import RydlatError, SchemaError
from .output import Emitter, dumps, sha256_text, write_surface_csv
from .params import TWO_PI

SUBCOMMANDS = (
    "potential-scan",
    "lorentzian-fit",
    "spectrum",
    "ground-state",
    "loss-budget",
    "bbr",
    "blockade",
    "resonance-map",
)


def pmap(fn, items, threads: int):
    """Ordered map, optionally over a thread pool; output order never depends on ``threads``."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _hz(w):
    return np.asarray(w) / TWO_PI


def _num(task: str, key: str, v, integer=False, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"tasks.{task}.{key}", "expected a number")
    if integer and int(v) != v:
        raise SchemaError(f"tasks.{task}.{key}", "expected an integer")
    if positive and not v > 0:
        raise SchemaError(f"tasks.{task}.{key}", "must be > 0")
    return int(v) if integer else float(v)


def _list(task, key, v):
    vals = v if isinstance(v, list) else [v]
    return [_num(task, key, x) for x in vals]


class Runner:
    def __init__(self, scenario, emitter: Emitter, threads: int = 1):
        self.s = scenario
        self.p = scenario.params
        self.sw = scenario.standing_wave
        self.em = emitter
        self.threads = threads

    def meta(self, name, **extra):
        m = {
            "subcommand": name,
            "params": params_to_config(self.p),
            "task": self.s.tasks.get(name, {}),
            "seed": self.s.seed,
            "version": __version__,
        }
        m.update(extra)
        return m

    # -- subcommands ----------------------------------------------------------

    def potential_scan(self):
        t = self.s.task("potential-scan")
        name = "potential-scan"
        d = abs(self.p.delta)
        lo = _num(name, "omega2_min_over_abs_delta", t["omega2_min_over_abs_delta"], positive=True)
        hi = _num(name, "omega2_max_over_abs_delta", t["omega2_max_over_abs_delta"], positive=True)
        n = _num(name, "n_intensity", t["n_intensity"], integer=True, positive=True)
        o2 = np.linspace(lo * d, hi * d, n)
        a = self.p.omega2c
        un = pmap(lambda b: lattice.pair_potential(self.p, a, b), o2, self.threads)
        ua = lattice.potential_analytic(self.p, a, o2)
        off = spectrum.resonance_offset_hwhm(self.p.delta, a, o2, self.p.gamma_p)
        rows = zip(_hz(o2), _hz(un), _hz(ua), off)
        self.em.csv(
            "potential_scan_intensity.csv",
            ["omega2_x2_over_2pi_hz", "u_numeric_over_2pi_hz", "u_analytic_over_2pi_hz", "offset_hwhm"],
            rows,
            self.meta(name, profile="intensity", omega2_x1_over_2pi_hz=a / TWO_PI),
        )
        w, u0 = lattice.lorentzian_params(self.p, self.sw)
        hw = t["x_half_width_m"]
        hw = 8 * w if hw is None else _num(name, "x_half_width_m", hw, positive=True)
        m = _num(name, "n_position", t["n_position"], integer=True, positive=True)
        x = np.linspace(-hw, hw, m)

        def at(xx):
            b = self.sw.omega2(xx)
            rho, u = lattice.trap_center_state(self.p, a, b)
            return u, lattice.loss_rate(self.p, rho, 1)

        res = pmap(at, x, self.threads)
        u = np.array([r[0] for r in res])
        loss = np.array([r[1] for r in res])
        lor = lattice.lorentzian_profile(lattice.resonant_depth(self.p), w, 0.0, x)
        rows = zip(x, _hz(u), _hz(lor), loss, lattice.loss_shortcut(self.p, u))
        self.em.csv(
            "potential_scan_position.csv",
            ["x2_m", "u_numeric_over_2pi_hz", "u_lorentzian_over_2pi_hz", "loss_hz", "loss_shortcut_hz"],
            rows,
            self.meta(name, profile="position", w_m=w, u0_over_2pi_hz=u0 / TWO_PI),
        )

    def lorentzian_fit(self):
        name = "lorentzian-fit"
        t = self.s.task(name)
        w, u0 = lattice.lorentzian_params(self.p, self.sw)
        hw = t["x_half_width_m"]
        hw = 4 * w if hw is None else _num(name, "x_half_width_m", hw, positive=True)
        m = _num(name, "n_position", t["n_position"], integer=True, positive=True)
        x = np.linspace(-hw, hw, m)
        a = self.p.omega2c
        u = np.array(pmap(lambda xx: lattice.pair_potential(self.p, a, self.sw.omega2(xx)), x, self.threads))
        fit = lattice.fit_lorentzian(x, u)
        model = lattice.lorentzian_profile(fit.u0, fit.w, fit.x0, x)
        self.em.csv("lorentzian_fit_samples.csv", ["x2_m", "u_numeric_rad_per_s", "u_fit_rad_per_s"], zip(x, u, model), self.meta(name))
        self.em.json(
            "lorentzian_fit.json",
            {
                "u0_fit_rad_per_s": fit.u0,
                "w_fit_m": fit.w,
                "x0_fit_m": fit.x0,
                "rms_residual_rad_per_s": fit.rms,
                "w_formula_m": w,
                "u0_lorentzian_rad_per_s": u0,
                "u0_closed_form_resonant_rad_per_s": lattice.resonant_depth(self.p),
                "w_ratio": fit.w / w,
                "metadata": self.meta(name),
            },
        )

    def spectrum(self):
        name = "spectrum"
        t = self.s.task(name)
        d = abs(self.p.delta)
        x1 = t["omega2_x1_over_2pi_hz"]
        x1 = [self.p.omega2c] if x1 is None else [v * TWO_PI for v in _list(name, "omega2_x1_over_2pi_hz", x1)]
        lo = _num(name, "omega2_min_over_abs_delta", t["omega2_min_over_abs_delta"], positive=True)
        hi = _num(name, "omega2_max_over_abs_delta", t["omega2_max_over_abs_delta"], positive=True)
        n = _num(name, "n", t["n"], integer=True, positive=True)
        rows = spectrum.spectrum_scan(self.p.delta, x1, np.linspace(lo * d, hi * d, n))
        self.em.csv(
            "spectrum.csv",
            ["omega2_x1", "omega2_x2", "lambda_minus", "lambda_1", "lambda_plus"],
            rows / TWO_PI,
            self.meta(name, units="all columns are f/2pi in Hz"),
        )

    def ground_state(self):
        name = "ground-state"
        t = self.s.task(name)
        period = self.sw.period
        lo = -period / 8 if t["x_min_m"] is None else _num(name, "x_min_m", t["x_min_m"])
        hi = period / 8 if t["x_max_m"] is None else _num(name, "x_max_m", t["x_max_m"])
        if not hi > lo:
            raise SchemaError(f"tasks.{name}.x_max_m", "must exceed x_min_m")
        n = _num(name, "n", t["n"], integer=True, positive=True)
        x = lo + np.arange(n) * (hi - lo) / n
        kind = t["surface"]
        if kind not in ("numeric", "analytic"):
            raise SchemaError(f"tasks.{name}.surface", "must be 'numeric' or 'analytic'")
        surf = lattice.potential_surface(self.p, self.sw, x, x, kind)
        dt = _num(name, "dt_fraction", t["dt_fraction"], positive=True) * motional.stability_bound(self.p.mass, x[1] - x[0])
        tol = _num(name, "tol_over_2pi_hz", t["tol_over_2pi_hz"], positive=True) * TWO_PI
        g = motional.ground_state(
            surf, self.p.mass, dt, tol, _num(name, "g_nl", t["g_nl"]), _num(name, "max_iters", t["max_iters"], integer=True, positive=True)
        )
        p1, p2, corr = motional.density_marginals(g)
        guess = t["mode_guess_m"]
        if guess is None:
            i, j = np.unravel_index(np.argmin(surf.values), surf.values.shape)
            guess = (x[i], x[j])
        center = motional.find_extremum(surf, guess)
        try:
            modes = motional.mode_analysis(surf, center, self.p.mass, psi=g).__dict__
        except RydlatError as exc:
            modes = {"error": f"{type(exc).__name__}: {exc}"}
        write_surface_csv(self.em.path("ground_state_surface.csv"), surf, self.meta(name))
        self.em.add(self.em.path("ground_state_surface.csv"))
        dens = [(a, b, g.density[i, j]) for i, a in enumerate(x) for j, b in enumerate(x)]
        self.em.csv("ground_state_density.csv", ["x1_m", "x2_m", "density"], dens, self.meta(name))
        self.em.json(
            "ground_state.json",
            {
                "energy_rad_per_s": g.energy,
                "propagator_energy_rad_per_s": g.propagator_energy,
                "kinetic_rad_per_s": g.kinetic,
                "potential_rad_per_s": g.potential,
                "norm": g.norm,
                "iterations": g.iterations,
                "dt_s": dt,
                "correlation": corr,
                "modes": modes,
                "metadata": self.meta(name),
            },
        )

    def loss_budget(self):
        name = "loss-budget"
        t = self.s.task(name)
        target = _num(name, "gamma_target_hz", t["gamma_target_hz"], positive=True)
        o2c = t["omega2c_over_2pi_hz"]
        o2c = [self.p.omega2c] if o2c is None else [v * TWO_PI for v in _list(name, "omega2c_over_2pi_hz", o2c)]
        sgn = math.copysign(1.0, self.p.delta)

        def cal(o):
            p = self.p.with_(omega2c=o, delta=sgn * o / 2)
            return budget.calibrate_omega1(p, target)

        res = pmap(cal, o2c, self.threads)
        rows = [(o / TWO_PI, c.omega1 / TWO_PI, c.u0 / TWO_PI, c.loss, c.loss_shortcut) for o, c in zip(o2c, res)]
        self.em.csv(
            "loss_budget.csv",
            ["omega2c_over_2pi_hz", "omega1_over_2pi_hz", "u0_over_2pi_hz", "loss_hz", "loss_shortcut_hz"],
            rows,
            self.meta(name, detuning_rule="delta = sign * omega2c / 2"),
        )

    def bbr(self):
        name = "bbr"
        t = self.s.task(name)
        temps = t["temperatures_k"]
        thr = _num(name, "threshold", t["threshold"], positive=True)
        if t["p_r"] is not None:
            pr = _num(name, "p_r", t["p_r"], positive=True)
            res = [budget.budget_from_pr(pr, T, thr) for T in temps]
        else:
            ns = _num(name, "n_sites", t["n_sites"], integer=True, positive=True)
            res = [budget.bbr_budget(ns, self.p.omega1, self.p.omega2c, T, thr) for T in temps]
        rows = [(b.temperature, b.p_r, b.tau_max) for b in res]
        self.em.csv("bbr.csv", ["temperature_k", "p_r", "tau_max_s"], rows, self.meta(name))

    def blockade(self):
        name = "blockade"
        t = self.s.task(name)
        if t["manifold_path"]:
            m = bk.load_manifold(t["manifold_path"])
            source = {"manifold_path": str(t["manifold_path"])}
        else:
            m = bk.synth_manifold(
                self.s.seed,
                _num(name, "n_states", t["n_states"], integer=True, positive=True),
                _num(name, "detuning_scale_over_2pi_hz", t["detuning_scale_over_2pi_hz"]) * TWO_PI,
                _num(name, "coupling_scale_over_2pi_hz_m3", t["coupling_scale_over_2pi_hz_m3"]) * TWO_PI,
                _num(name, "sparsity", t["sparsity"]),
            )
            source = {"synthetic_seed": self.s.seed}
        r = np.geomspace(
            _num(name, "r_min_m", t["r_min_m"], positive=True),
            _num(name, "r_max_m", t["r_max_m"], positive=True),
            _num(name, "n_r", t["n_r"], integer=True, positive=True),
        )
        omega_t = bk.effective_rabi(self.p)
        window = bk.default_window(omega_t, _num(name, "periods", t["periods"], positive=True))
        n_samples = _num(name, "n_samples", t["n_samples"], integer=True, positive=True)
        res = pmap(
            lambda rr: bk.leakage_scan(m, self.p, [rr], window=window, n_samples=n_samples, convention=t["convention"])[0],
            r,
            self.threads,
        )
        self.em.csv(
            "blockade.csv",
            ["r_m", "leakage_max"],
            res,
            self.meta(name, omega_t_rad_per_s=omega_t, window_s=window, n_states=m.n_states, **source),
        )

    def resonance_map(self):
        name = "resonance-map"
        t = self.s.task(name)
        dim = _num(name, "dimensionality", t["dimensionality"], integer=True)
        if dim not in (1, 3):
            raise SchemaError(f"tasks.{name}.dimensionality", "must be 1 or 3")
        sw = self.p.standing_wave(dim)
        lo = 0.0 if t["x_min_m"] is None else _num(name, "x_min_m", t["x_min_m"])
        hi = sw.period if t["x_max_m"] is None else _num(name, "x_max_m", t["x_max_m"])
        n = _num(name, "n", t["n"], integer=True, positive=True)
        x = np.linspace(lo, hi, n)
        pos = x if dim == 1 else np.outer(x, np.ones(3)) / math.sqrt(3)
        field = lattice.resonance_surface(sw, self.p.delta, self.p.gamma_p, pos, pos)
        surf = lattice.PotentialSurface(x, x, field, {"quantity": "(omega2(x1)^2 + omega2(x2)^2 - 8 delta^2) / gamma_p", "dimensionality": dim})
        if dim == 3:
            surf.metadata["positions"] = "r = x (1, 1, 1) / sqrt(3)"
        write_surface_csv(self.em.path("resonance_map.csv"), surf, self.meta(name), value_name="offset_rad_per_s")
        self.em.add(self.em.path("resonance_map.csv"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rydlat", description="Interaction-induced dressing lattice: scans and figure data.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="scenario JSON (default: the shipped reference scenario)")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override a config value by dotted path")
    ap.add_argument("--out", help="output directory (overrides output_dir)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    return ap


def run(subcommand: str, scenario, out_dir=None, threads: int = 1, inputs: dict | None = None) -> int:
    if subcommand not in SUBCOMMANDS:
        raise SchemaError("subcommand", f"unknown subcommand {subcommand!r}")
    out = Path(out_dir or scenario.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    em = Emitter(out, inputs or {"effective_config_sha256": sha256_text(dumps(scenario.raw)), "seed": scenario.seed})
    em.inputs.setdefault("subcommand", subcommand)
    getattr(Runner(scenario, em, threads), subcommand.replace("-", "_"))()
    em.manifest()
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads < 1:
        ap.error("--threads must be >= 1")
    try:
        if args.config:
            doc = load_json(args.config)
            text = Path(args.config).read_text(encoding="utf-8")
            config_hash = sha256_text(text)
            config_name = Path(args.config).name
        else:
            doc = default_config()
            config_hash = sha256_text(dumps(doc))
            config_name = "<default>"
        doc = apply_overrides(doc, args.overrides)
        scenario = parse_config_dict(doc)
        inputs = {
            "config": config_name,
            "config_sha256": config_hash,
            "overrides": list(args.overrides),
            "effective_config_sha256": sha256_text(dumps(doc)),
            "seed": scenario.seed,
            "subcommand": args.subcommand,
        }
        return run(args.subcommand, scenario, args.out, args.threads, inputs)
    except RydlatError as exc:
        print(f"rydlat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"rydlat: invalid input: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"rydlat: I/O error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
