"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 missing artifact, 4 blow-up.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import ConfigError, load_config
from .fom import BlowUp
from .io import MissingArtifact, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_MISSING, EXIT_BLOWUP = 0, 2, 3, 4


def _modes(s: str) -> list:
    return [int(x) for x in s.split(",") if x.strip()]


def _cmd_fom(cfg, args):
    arch, trace = pipeline.stage_fom(cfg)
    print(f"fom: {len(trace.rows) - 1} steps, {arch.K} snapshots -> {cfg.output}")


def _cmd_pod(cfg, args):
    basis = pipeline.stage_pod(cfg)
    s = basis.sigma
    print(f"pod: M={basis.M} M_bc={basis.M_bc} sigma_M/sigma_1={s[basis.M - 1] / s[0]:.3e}")


def _cmd_rom_setup(cfg, args):
    r = pipeline.stage_rom_setup(cfg)
    print(f"rom-setup: M={r.M} rho(Dr)={r.rho_Dr:.6g}")


def _cmd_rom_run(cfg, args):
    out = pipeline.stage_rom_run(cfg, modes=args.modes)
    for (label, M), tr in sorted(out.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        print(f"rom-run: case {label} M={M} steps={len(tr.rows) - 1}")


def _cmd_compare(cfg, args):
    an = pipeline.stage_compare(cfg)
    sys.stdout.write(an.report.to_text())


def _cmd_eigencheck(cfg, args):
    an = pipeline.analyse(cfg)
    name = "fig9_eigs.csv"
    header, rows = an.tables[name]
    write_csv(pipeline.Paths(cfg).root / "eigencheck.csv", header, rows)
    for k, ea in an.report.eigen.items():
        print(f"eigencheck {k}: eps_redeig={ea.eps_redeig:.6g} eps_gersh={ea.eps_gersh:.6g}")


def _cmd_alpha_sweep(cfg, args):
    header, rows = pipeline.alpha_sweep_table(cfg)
    path = pipeline.Paths(cfg).root / "alpha_sweep.csv"
    write_csv(path, header, rows)
    print(f"alpha-sweep: {len(rows)} rows -> {path}")


def _cmd_plot_data(cfg, args):
    print(f"plot-data: -> {pipeline.stage_plot_data(cfg)}")


def _cmd_run(cfg, args):
    pipeline.run_pipeline(cfg)
    print(f"run: done -> {cfg.output}")


COMMANDS = {
    "fom": (_cmd_fom, "run the full-order model and archive snapshots"),
    "pod": (_cmd_pod, "build the POD basis from the snapshot archive"),
    "rom-setup": (_cmd_rom_setup, "assemble the reduced operators"),
    "rom-run": (_cmd_rom_run, "integrate the ROM (adaptive and constant step)"),
    "compare": (_cmd_compare, "timestep ratios, errors and the best-approximation check"),
    "eigencheck": (_cmd_eigencheck, "eigenbound accuracy at the final ROM state"),
    "alpha-sweep": (_cmd_alpha_sweep, "alpha-family bounds on several meshes"),
    "plot-data": (_cmd_plot_data, "write per-figure CSV files and a summary"),
    "run": (_cmd_run, "run every enabled stage in order"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="romstep", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="case configuration file")
        sp.add_argument("--output", help="override output.dir")
        if name in ("rom-run",):
            sp.add_argument("--modes", type=_modes, help="comma-separated subset of rom.modes")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg.output = args.output
        COMMANDS[args.command][0](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingArtifact as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except BlowUp as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
