"""Command-line front end: validate, allocate, run, analyze, sweep.

Exit codes: 0 all enabled monitors/checks pass, 1 monitor or check
failure, 2 scenario parse/validation error, 3 runtime error (integration
blow-up and kin).
"""

from __future__ import annotations

import argparse
import glob as globmod
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import yaml

from .analysis import equilibrium_residual, observability_rank, passivity_check, sparsity_audit
from .graphs import incidence_matrix, input_indicator, is_connected, is_zero_forcing, numerical_rank
from .model import aggregate_balance
from .scenario import (
    Scenario,
    ScenarioParseError,
    ScenarioValidationError,
    load_preset,
    load_scenario,
    preset_names,
)
from .sim import (
    IntegrationError,
    constraint_monitor,
    convergence_metrics,
    convergence_monitor,
    equilibrium_reference,
    integrate,
    lyapunov_monitor,
    reference_state,
)

EXIT_OK = 0
EXIT_MONITOR = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _resolve(name_or_path: str) -> Scenario:
    if os.path.exists(name_or_path):
        return load_scenario(name_or_path)
    if name_or_path in preset_names():
        return load_preset(name_or_path)
    raise ScenarioParseError(
        f"{name_or_path!r} is neither a scenario file nor a preset {preset_names()}"
    )


def _apply_overrides(scn: Scenario, args) -> Scenario:
    integ = scn.integration
    if getattr(args, "dt", None) is not None:
        integ = replace(integ, dt=float(args.dt))
    if getattr(args, "horizon", None) is not None:
        integ = replace(integ, horizon=float(args.horizon))
    return replace(scn, integration=integ) if integ is not scn.integration else scn


def _allocation_report(scn: Scenario) -> str:
    eff = scn.prepared()
    lines = [f"optimal allocation report: {scn.name}", ""]
    topo, plant, cfg, comp = eff.topology, eff.plant, eff.controller, eff.compartmental
    times = [0.0] + eff.schedule.switch_times()
    for t0 in times:
        d = eff.schedule.d_at(t0)
        ybar = eff.schedule.ybar_at(t0)
        ref = equilibrium_reference(eff.variant, topo, plant, cfg, d, ybar, comp=comp)
        lines.append(f"segment from t={t0:g}:")
        lines.append(f"  d            = {np.array2string(d, precision=6)}")
        lines.append(f"  ybar         = {np.array2string(ybar, precision=6)}")
        lines.append(f"  kappa        = {ref.kappa[0]:.10g} (uniform marginal cost)")
        lines.append(f"  u_bar        = {np.array2string(ref.u, precision=10)}")
        lines.append(f"  lambda_bar   = {np.array2string(ref.lam, precision=10)}")
        lines.append(f"  total cost   = {cfg.cost.total(ref.u):.10g}")
        lines.append(f"  balance 1'(Eu-d) = {aggregate_balance(topo, ref.u, d):.3e}")
        lines.append(f"  inputs in range  = {ref.inputs_in_range}")
        lines.append(f"  flows feasible   = {ref.flows_feasible}")
        lines.append("")
    return "\n".join(lines)


def cmd_validate(args) -> int:
    scn = _resolve(args.scenario)
    print(f"{scn.name}: scenario valid "
          f"(variant={scn.variant}, n={scn.topology.n}, m={scn.topology.m}, p={scn.topology.p})")
    return EXIT_OK


def cmd_allocate(args) -> int:
    scn = _resolve(args.scenario)
    report = _allocation_report(scn)
    print(report)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "allocation.txt"), "w") as fh:
            fh.write(report)
    return EXIT_OK


def cmd_run(args) -> int:
    scn = _apply_overrides(_resolve(args.scenario), args)
    out_dir = args.out or f"out/{scn.name}"
    os.makedirs(out_dir, exist_ok=True)
    log = integrate(scn)
    log.to_csv(os.path.join(out_dir, "trajectory.csv"))
    with open(os.path.join(out_dir, "allocation.txt"), "w") as fh:
        fh.write(_allocation_report(scn))

    results = []
    mon = scn.monitors
    if mon.constraints:
        results.append(constraint_monitor(log))
    if mon.lyapunov:
        results.append(lyapunov_monitor(log))
    if mon.convergence_y_band is not None:
        results.append(convergence_monitor(log, mon.convergence_y_band, mon.convergence_u_band))

    rep = convergence_metrics(log, y_band=mon.convergence_y_band or 1e-3)
    lines = [f"verification report: {scn.name}", ""]
    for w in log.warnings:
        lines.append(f"warning: {w}")
    if log.warnings:
        lines.append("")
    for res in results:
        lines.append(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.details}")
    lines.append("")
    lines.append(f"sustained oscillation detected: {rep.sustained_oscillation}")
    for i, seg in enumerate(rep.segments):
        lines.append(
            f"segment {i}: terminal |y-ybar|_inf = {seg.terminal_y_err:.6g}"
            + (f", terminal |u-ubar|_inf = {seg.terminal_u_err:.6g}" if seg.terminal_u_err is not None else "")
            + (f", settled at t = {seg.settle_time_y:g}" if seg.settle_time_y is not None else ", not settled")
        )
    lines.append(f"min flow margin  = {log.min_margin_flow:.6g}")
    lines.append(f"min input margin = {log.min_margin_input:.6g}")
    # storage levels may go negative; that is reported, never enforced
    lines.append(f"min storage level over run = {float(log.x.min()):.6g}"
                 + ("  (negative storage reached)" if log.x.min() < 0 else ""))
    report = "\n".join(lines)
    with open(os.path.join(out_dir, "verification.txt"), "w") as fh:
        fh.write(report)
    print(report)
    return EXIT_OK if all(r.passed for r in results) else EXIT_MONITOR


def cmd_analyze(args) -> int:
    scn = _resolve(args.scenario).prepared()
    topo, plant, cfg, comp = scn.topology, scn.plant, scn.controller, scn.compartmental
    d = scn.schedule.d_at(0.0)
    ybar = scn.schedule.ybar_at(0.0)
    summary: dict = {"name": scn.name, "variant": scn.variant, "checks": {}}
    lines = [f"analysis report: {scn.name}", ""]
    failed = False

    def record(key: str, ok: bool, text: str):
        nonlocal failed
        summary["checks"][key] = {"pass": bool(ok), "detail": text}
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {key}: {text}")
        failed = failed or not ok

    B = incidence_matrix(topo)
    E = input_indicator(topo)
    rank_b = numerical_rank(B)
    record("incidence_rank", rank_b == topo.n - 1,
           f"rank(B) = {rank_b}, n-1 = {topo.n - 1} (connected = {is_connected(topo)})")
    rank_be = numerical_rank(np.hstack([B, E]))
    record("actuation_rank", rank_be == topo.n, f"rank([B E]) = {rank_be}, n = {topo.n}")

    zf = is_zero_forcing(topo, topo.actuated)
    if scn.variant == "potential":
        record("zero_forcing_actuated", zf,
               f"A9: actuated set {list(topo.actuated)} zero forcing = {zf}")
    else:
        summary["checks"]["zero_forcing_actuated"] = {"pass": True, "detail": f"informational: {zf}"}
        lines.append(f"[info] zero_forcing_actuated: {zf}")

    linear_maps = all(s.kind == "identity" for s in cfg.flow_maps + plant.output_maps)
    if linear_maps:
        rank_o, obs = observability_rank(topo, plant.t_x, cfg.t_mu)
        record("observability_rank", obs, f"rank = {rank_o} of n = {topo.n}")

    ref = equilibrium_reference(scn.variant, topo, plant, cfg, d, ybar, comp=comp)
    record("attainable_reference", ref.complete,
           f"A5: inputs_in_range = {ref.inputs_in_range}, flows_feasible = {ref.flows_feasible}")
    if ref.complete and scn.variant != "reduced":
        w_ref = reference_state(scn.variant, ref)
        xi_ref = ref.xi if ref.xi is not None else ref.lam
        phi_ref = ref.phi if ref.phi is not None else ref.u
        res = equilibrium_residual(topo, plant, cfg, ref.x, ref.mu, xi_ref, ref.theta, phi_ref,
                                   d, ybar, comp=comp)
        res_tol = 1e-9 * max(1.0, abs(ref.kappa[0]))  # cancellation scales with kappa
        record("equilibrium_residual", res.max_residual <= res_tol,
               f"max residual {res.max_residual:.3e} (<= {res_tol:.1e})")
        pas = passivity_check(scn.variant, topo, plant, cfg, ref, d, ybar,
                              trials=args.trials, comp=comp)
        record("passivity_identities", pas.max_rel_mismatch <= 1e-8 and pas.compartmental_sign_ok,
               f"max relative mismatch {pas.max_rel_mismatch:.3e} over {pas.trials} states")
        aud = sparsity_audit(scn.variant, topo, plant, cfg, d, ybar, comp=comp)
        record("controller_sparsity", aud, "Jacobian reads only locally available states")

    report = "\n".join(lines)
    print(report)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "analysis.txt"), "w") as fh:
            fh.write(report)
        with open(os.path.join(args.out, "analysis.yaml"), "w") as fh:
            yaml.safe_dump(summary, fh, sort_keys=False)
    return EXIT_MONITOR if failed else EXIT_OK


def cmd_presets(args) -> int:
    for name in preset_names():
        scn = load_preset(name)
        print(f"{name}: {scn.variant}, n={scn.topology.n}, m={scn.topology.m}, "
              f"p={scn.topology.p}, horizon={scn.integration.horizon:g} {scn.integration.time_unit}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    paths = sorted(globmod.glob(args.pattern))
    if not paths:
        print(f"no scenario files match {args.pattern!r}", file=sys.stderr)
        return EXIT_VALIDATION

    def one(path: str) -> int:
        ns = argparse.Namespace(scenario=path, out=None, dt=None, horizon=None)
        scn = _resolve(path)
        ns.out = os.path.join(args.out or "out", scn.name)
        return cmd_run(ns)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        codes = list(pool.map(one, paths))
    bad = [p for p, c in zip(paths, codes) if c != EXIT_OK]
    print(f"sweep: {len(paths) - len(bad)}/{len(paths)} scenarios passed")
    for p in bad:
        print(f"  failed: {p}")
    return EXIT_OK if not bad else EXIT_MONITOR


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flowreg",
                                 description="flow-network regulation: simulate, verify, report")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a scenario and write trajectory/reports")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None, help="output directory (default out/<name>)")
    p_run.add_argument("--dt", type=float, default=None, help="override the step size")
    p_run.add_argument("--horizon", type=float, default=None, help="override the horizon")
    p_run.set_defaults(fn=cmd_run)

    p_val = sub.add_parser("validate", help="parse and validate a scenario")
    p_val.add_argument("scenario")
    p_val.set_defaults(fn=cmd_validate)

    p_alloc = sub.add_parser("allocate", help="optimal allocation report only")
    p_alloc.add_argument("scenario")
    p_alloc.add_argument("--out", default=None)
    p_alloc.set_defaults(fn=cmd_allocate)

    p_an = sub.add_parser("analyze", help="offline verification checks")
    p_an.add_argument("scenario")
    p_an.add_argument("--out", default=None)
    p_an.add_argument("--trials", type=int, default=1000)
    p_an.set_defaults(fn=cmd_analyze)

    p_pre = sub.add_parser("presets", help="list built-in scenario presets")
    p_pre.set_defaults(fn=cmd_presets)

    p_sw = sub.add_parser("sweep", help="run every scenario matching a glob")
    p_sw.add_argument("pattern")
    p_sw.add_argument("--out", default=None)
    p_sw.add_argument("--jobs", type=int, default=None)
    p_sw.set_defaults(fn=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ScenarioParseError, ScenarioValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IntegrationError as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception:
        traceback.print_exc()
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
