"""Command-line orchestration.

Every subcommand resolves its configuration (defaults, optional INI file,
``--override section.key=value``), runs, writes one CSV artifact plus one
JSON manifest named after the configuration hash, and exits 0 on success,
2 on configuration errors (with a machine-readable JSON error on stderr),
3 when a sweep finished with failed cells, 1 on hard failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import struct
import sys

import numpy as np

from .acceptance import selftest
from .conditions import ParamTuple
from .config import ConfigError, load_config
from .experiments import (boundary_sweep, dirichlet_norm_test,
                          frequency_block_test, rescaled_bump_test,
                          shifted_bump_test)
from .grid import Grid, constant_field, forward_transform
from .norms import bessel_kernel, lq_norm
from .operators import (gamma_young_check, heat_kernel_field,
                        mg_sobolev_gamma_norm, schatten_heat_norm)
from .output import OpTimer, RunManifest, config_hash, write_csv
from .rng import stream
from .series import (SeriesSpec, _linfit, hs_gamma_norm_exact, mc_gamma_norm,
                     sq_function_gamma_norm)
from .spde import (DiagonalNoise, SpdeConfig, simulate, spacetime_norm,
                   trajectory_norms)
from .systems import (Coloring, FourierSystem, HaarSystem, ShiftedBumpSystem,
                      bump_values, haar_lattice_sums)

EXIT_OK = 0
EXIT_HARD = 1
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def build_grid(block: dict) -> Grid:
    return Grid(block.get("dim", 1), block.get("n", 1024), block.get("length", 1.0))


def build_system(block: dict, dim: int):
    kind = block.get("kind", "fourier")
    if kind == "fourier":
        return FourierSystem(dim)
    if kind == "haar":
        return HaarSystem(dim, block.get("j_min", 0), block.get("j_max", 6))
    if kind == "shifted_bump":
        return ShiftedBumpSystem(dim, block.get("extent", 4), block.get("width", 0.5))
    raise ConfigError(f"unknown system kind {kind!r}")


def build_coloring(block: dict, dim: int, n_terms: int) -> Coloring:
    kind = block.get("kind", "matern")
    if kind == "matern":
        return Coloring.matern(block.get("alpha", 0.5))
    if kind == "power_law":
        return Coloring.power_law(block.get("alpha", 0.5))
    if kind == "block":
        return Coloring.block_indicator(block.get("level", 3))
    if kind == "haar":
        return Coloring.haar(block.get("alpha", 0.5), block.get("beta", 1.0), dim)
    if kind == "constant":
        return Coloring.constant(block.get("value", 1.0), n_terms)
    if kind == "explicit":
        return Coloring.explicit(block.get("values", []))
    raise ConfigError(f"unknown coloring kind {kind!r}")


def build_g(block: dict, grid: Grid):
    if not block:
        return None
    kind = block.get("kind", "one")
    if kind == "one":
        return None
    if kind == "constant":
        return constant_field(grid, block.get("value", 1.0))
    if kind == "bump":
        w = block.get("width", 0.5)
        coords = [np.broadcast_to(x, grid.shape) for x in grid.coords()]
        return forward_transform(grid, bump_values(coords, grid.length / 2.0, w * grid.length))
    raise ConfigError(f"unknown g kind {kind!r}")


def _params_from(block: dict) -> ParamTuple:
    zeta = block["zeta"]
    if zeta <= 0:
        zeta = math.inf
    return ParamTuple(block["d"], block["s"], block["q"], block["eta"], zeta)


# ---------------------------------------------------------------------------
# subcommand runners: each returns (records, columns, verdicts, exit_code)


def run_series_norm(cfg, seed, workers):
    grid = build_grid(cfg["grid"])
    system = build_system(cfg.get("system", {}), grid.dim)
    blk = cfg["series"]
    coloring = build_coloring(cfg.get("coloring", {}), grid.dim, blk["n_terms"])
    g = build_g(cfg.get("g", {}), grid)
    spec = SeriesSpec(grid, system, coloring, blk["n_terms"], blk["s"], blk["q"], g=g)
    est = mc_gamma_norm(spec, blk["samples"], seed=seed, workers=workers,
                        oversample=cfg["run"]["oversample"])
    row = {"n_terms": blk["n_terms"], "s": blk["s"], "q": blk["q"],
           "samples": est.samples, "seed": est.seed, "mean_sq": est.mean,
           "stderr": est.stderr, "mean_norm": est.mean_norm,
           "sq_function": sq_function_gamma_norm(spec, oversample=cfg["run"]["oversample"]),
           "hs_exact": hs_gamma_norm_exact(spec) if blk["q"] == 2 else math.nan}
    return [row], list(row.keys()), {}, EXIT_OK


def run_sweep(cfg, seed, workers):
    blk = cfg["sweep"]
    tuples = [ParamTuple(blk["d"], s, blk["q"], blk["eta"],
                         blk["zeta"] if blk["zeta"] > 0 else math.inf)
              for s in blk["s_values"]]
    cells = boundary_sweep(tuples, blk["construction"], blk["scales"])
    rows = []
    failed = 0
    for c in cells:
        rows.append({"d": c.params.d, "s": c.params.s, "q": c.params.q,
                     "eta": c.params.eta, "zeta": c.params.zeta,
                     "construction": c.construction, "slack": c.slack,
                     "classification": c.classification, "label": c.label,
                     "exponent": c.exponent, "r2": c.r2, "status": c.status})
        failed += c.status == "failed"
    code = EXIT_PARTIAL if failed else EXIT_OK
    return rows, list(rows[0].keys()) if rows else _sweep_columns(), {"failed_cells": failed}, code


def _sweep_columns():
    return ["d", "s", "q", "eta", "zeta", "construction", "slack",
            "classification", "label", "exponent", "r2", "status"]


def _two_sided_rows(records, fit):
    rows = []
    for r in records:
        rows.append({"construction": r.construction, "scale_index": r.scale_index,
                     "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio,
                     "fitted_exponent": fit.exponent, "predicted_exponent": fit.predicted,
                     "r2": fit.r2})
    return rows


def run_freq_block(cfg, seed, workers):
    params = _params_from(cfg["params"])
    blk = cfg["freq_block"]
    records, fit = frequency_block_test(params, range(blk["n_min"], blk["n_max"] + 1),
                                        oversample=cfg["run"]["oversample"])
    rows = _two_sided_rows(records, fit)
    return rows, list(rows[0].keys()), {"fitted_exponent": fit.exponent}, EXIT_OK


def run_rescaled_bump(cfg, seed, workers):
    params = _params_from(cfg["params"])
    blk = cfg["rescaled_bump"]
    records, fit = rescaled_bump_test(params, range(blk["m_min"], blk["m_max"] + 1),
                                      n=blk["n"], width=blk["width"],
                                      oversample=cfg["run"]["oversample"])
    rows = _two_sided_rows(records, fit)
    return rows, list(rows[0].keys()), {"fitted_exponent": fit.exponent}, EXIT_OK


def run_shifted_bump(cfg, seed, workers):
    params = _params_from(cfg["params"])
    blk = cfg["shifted_bump"]
    records, fit, _ = shifted_bump_test(params, blk["extents"],
                                        resolution=blk["resolution"],
                                        width=blk["width"],
                                        oversample=cfg["run"]["oversample"])
    rows = _two_sided_rows(records, fit)
    return rows, list(rows[0].keys()), {"fitted_exponent": fit.exponent}, EXIT_OK


def run_dirichlet(cfg, seed, workers):
    blk = cfg["dirichlet"]
    rows_raw, fit = dirichlet_norm_test(blk["eta"], blk["n_values"],
                                        oversample=cfg["run"]["oversample"])
    rows = [{"N": N, "terms": terms, "norm": val, "eta": blk["eta"],
             "fitted_exponent": fit.exponent, "predicted_exponent": fit.predicted,
             "r2": fit.r2}
            for N, terms, val in rows_raw]
    return rows, list(rows[0].keys()), {"fitted_exponent": fit.exponent}, EXIT_OK


def run_gamma_young(cfg, seed, workers):
    grid = build_grid(cfg["grid"])
    blk = cfg["gamma_young"]
    s, q = blk["s"], blk["q"]
    r = grid.dim / (grid.dim - s)
    eta = 1.0 / (1.0 / q + 0.5 - 1.0 / r)
    kernel = bessel_kernel(grid, s)
    rows = []
    for i in range(blk["trials"]):
        gen = stream(seed, i)
        g = forward_transform(grid, gen.standard_normal(grid.shape))
        lhs, rhs, ratio = gamma_young_check(kernel, g, q, r, eta,
                                            oversample=cfg["run"]["oversample"])
        rows.append({"trial": i, "s": s, "q": q, "r": r, "eta": eta,
                     "lhs": lhs, "rhs": rhs, "ratio": ratio})
    ratios = [row["ratio"] for row in rows]
    verdicts = {"ratio_spread": max(ratios) / min(ratios)}
    return rows, list(rows[0].keys()), verdicts, EXIT_OK


def run_mg_sobolev(cfg, seed, workers):
    grid = build_grid(cfg["grid"])
    blk = cfg["mg_sobolev"]
    coords = [np.broadcast_to(x, grid.shape) for x in grid.coords()]
    rows = []
    for m in range(blk["levels"]):
        w = blk["width"] * 2.0**-m
        g = forward_transform(grid, bump_values(coords, w / 2.0, w))
        val = mg_sobolev_gamma_norm(g, blk["s"], blk["q"],
                                    oversample=cfg["run"]["oversample"])
        g_eta = lq_norm(g, blk["eta"], oversample=cfg["run"]["oversample"])
        rows.append({"level": m, "s": blk["s"], "q": blk["q"], "eta": blk["eta"],
                     "gamma_norm": val, "g_eta_norm": g_eta,
                     "constant": val / g_eta})
    consts = [r["constant"] for r in rows]
    return rows, list(rows[0].keys()), {"constant_spread": max(consts) / min(consts)}, EXIT_OK


def run_schatten_heat(cfg, seed, workers):
    blk = cfg["schatten"]
    grid = Grid(blk["d"], blk["n"])
    one = constant_field(grid, 1.0)
    ts = np.geomspace(blk["t_min"], blk["t_max"], blk["points"])
    rows = []
    for t in ts:
        val = schatten_heat_norm(one, float(t))
        row = {"d": blk["d"], "t": float(t), "norm_g1": val,
               "scaled_g1": float(t) ** (blk["d"] / 4.0) * val}
        if blk.get("witness", True):
            kern = heat_kernel_field(grid, float(t))
            gt = forward_transform(grid, np.sqrt(np.maximum(kern.values(), 0.0)))
            row["norm_witness"] = schatten_heat_norm(gt, float(t))
        rows.append(row)
    verdicts = {}
    if blk.get("witness", True):
        slope, _ = _linfit(np.log(ts), np.log([r["norm_witness"] for r in rows]))
        verdicts["witness_exponent"] = slope
    return rows, list(rows[0].keys()), verdicts, EXIT_OK


def run_heat_sim(cfg, seed, workers):
    grid = build_grid(cfg["grid"])
    blk = cfg["heat"]
    kind = blk["noise"]
    if kind == "matern":
        noise = DiagonalNoise.matern(grid, blk.get("alpha", 0.5))
    elif kind == "white":
        noise = DiagonalNoise.white(grid, blk.get("cutoff"))
    elif kind == "single_mode":
        noise = DiagonalNoise.single_mode(grid, blk.get("mode", 1),
                                          blk.get("amplitude", 1.0))
    else:
        raise ConfigError(f"unknown noise kind {kind!r}")
    config = SpdeConfig(grid, noise, T=blk["t_horizon"], dt=blk["dt"],
                        integrator=blk.get("integrator", "exact_ou"))
    rows = []
    dump = blk.get("dump_states")
    for i in range(blk["trajectories"]):
        traj = simulate(config, seed=seed, traj_index=i)
        norms = trajectory_norms(traj, blk["s"], blk["q"])
        st = spacetime_norm(traj, blk.get("p", 2.0), blk["s"], blk["q"])
        for t, h in zip(traj.times, norms):
            rows.append({"trajectory": i, "time": float(t), "h_norm": float(h),
                         "lp_spacetime": st.lp, "max_in_time": st.max_h})
        if dump and i == 0:
            dump_states(traj, dump)
    return rows, list(rows[0].keys()), {"trajectories": blk["trajectories"]}, EXIT_OK


def run_scaling(cfg, seed, workers):
    from .spde import scaling_diagnostic
    grid = build_grid(cfg["grid"])
    blk = cfg["scaling"]
    zeta = 1.0 / blk["alpha"] * grid.dim
    params = ParamTuple(grid.dim, blk["s"], blk["q"], blk["eta"], zeta)
    rep = scaling_diagnostic(blk["alpha"], zeta, params,
                             range(blk["m_min"], blk["m_max"] + 1), grid=grid,
                             levels=blk["levels"], beta=blk["beta"],
                             oversample=cfg["run"]["oversample"])
    rows = [{"m": m, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs,
             "fitted_exponent": rep.exponent, "predicted_exponent": rep.predicted,
             "r2": rep.r2}
            for m, lhs, rhs in rep.points]
    return rows, list(rows[0].keys()), {"fitted_exponent": rep.exponent}, EXIT_OK


def run_haar_divergence(cfg, seed, workers):
    blk = cfg["haar"]
    js = list(range(2, blk["j_max"] + 1))
    rows = []
    for zeta in blk["zeta_values"]:
        sums = haar_lattice_sums(blk["alpha"], blk["beta"], zeta, blk["d"], js)
        crit = abs(zeta - blk["d"] / blk["alpha"]) <= 1e-9
        for J, val in zip(js, sums):
            rows.append({"zeta": zeta, "J": J, "partial_sum": float(val),
                         "critical": crit})
    return rows, list(rows[0].keys()), {}, EXIT_OK


def run_selftest(cfg, seed, workers):
    records, timings = selftest(seed, workers=workers)
    verdicts = {r["name"]: bool(r["passed"]) for r in records}
    code = EXIT_OK if all(verdicts.values()) else EXIT_HARD
    return records, ["criterion", "name", "passed", "metrics"], verdicts, code, timings


RUNNERS = {
    "series-norm": run_series_norm,
    "sweep": run_sweep,
    "freq-block": run_freq_block,
    "rescaled-bump": run_rescaled_bump,
    "shifted-bump": run_shifted_bump,
    "dirichlet": run_dirichlet,
    "gamma-young": run_gamma_young,
    "mg-sobolev": run_mg_sobolev,
    "schatten-heat": run_schatten_heat,
    "heat-sim": run_heat_sim,
    "scaling": run_scaling,
    "haar-divergence": run_haar_divergence,
    "selftest": run_selftest,
}


def dump_states(traj, path: str) -> None:
    """Binary state dump: little-endian header (dims u32, n u32, count u64),
    then count * n^dims complex doubles, interleaved re/im."""
    grid = traj.states[0].grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<IIQ", grid.dim, grid.n, len(traj.states)))
        for st in traj.states:
            fh.write(np.ascontiguousarray(st.coeffs, dtype="<c16").tobytes())


def load_states(path: str):
    """Inverse of dump_states; returns (dims, n, list of coefficient arrays)."""
    with open(path, "rb") as fh:
        dims, n, count = struct.unpack("<IIQ", fh.read(16))
        shape = (n,) * dims
        out = []
        for _ in range(count):
            buf = fh.read(16 * n**dims)
            out.append(np.frombuffer(buf, dtype="<c16").reshape(shape).copy())
    return dims, n, out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gammanoise",
        description="Spectral laboratory for colored Gaussian noise on the torus")
    parser.add_argument("command", choices=sorted(RUNNERS))
    parser.add_argument("--config", help="INI configuration file")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--out", help="output CSV path (overrides config)")
    parser.add_argument("--workers", type=int,
                        help="worker count (overrides config and GAMMANOISE_WORKERS)")
    parser.add_argument("--override", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="config override")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.command, args.config, args.override)
    except ConfigError as exc:
        json.dump({"error": "config", "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_CONFIG

    seed = args.seed if args.seed is not None else cfg["run"]["seed"]
    out = args.out if args.out is not None else cfg["run"]["out"]
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("GAMMANOISE_WORKERS", cfg["run"]["workers"]))

    timer = OpTimer()
    try:
        result = RUNNERS[args.command](cfg, seed, workers)
    except (ConfigError, ValueError) as exc:
        # domain validation failures are configuration problems
        json.dump({"error": "config", "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_CONFIG
    except Exception as exc:  # hard failure: report and signal
        json.dump({"error": type(exc).__name__, "detail": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_HARD

    if len(result) == 5:
        records, columns, verdicts, code, op_timings = result
    else:
        records, columns, verdicts, code = result
        op_timings = {}

    chash = config_hash(args.command, cfg, seed)
    rows = [{**r, "manifest": chash} for r in records]
    write_csv(rows, out, columns=list(columns) + ["manifest"])

    manifest = RunManifest(command=args.command, config_hash=chash, seed=seed,
                           wall_time_s=timer.total(),
                           op_timings=op_timings or timer.timings,
                           artifacts=[os.path.basename(out)], verdicts=verdicts)
    manifest.write(_manifest_path(out, chash))
    if args.command == "selftest":
        for r in records:
            status = "PASS" if r["passed"] else "FAIL"
            print(f"criterion {r['criterion']:>2} [{status}] {r['name']}")
    print(f"{args.command}: wrote {out} (manifest {chash})")
    return code


def _manifest_path(out: str, chash: str) -> str:
    base = os.path.dirname(out) or "."
    return os.path.join(base, f"manifest-{chash}.json")


if __name__ == "__main__":
    sys.exit(main())
