"""Run every stage for one case file and print the comparison report.

    python3 -u scripts/run_case.py configs/shear_layer.cfg [--output DIR]
"""
import argparse
import logging
import time

from romstep import pipeline
from romstep.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--output")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s: %(message)s")

    cfg = load_config(args.config)
    if args.output:
        cfg.output = args.output
    setup = pipeline.build_case(cfg)
    for name, stage in (("fom", pipeline.stage_fom), ("pod", pipeline.stage_pod),
                        ("rom-setup", pipeline.stage_rom_setup),
                        ("rom-run", pipeline.stage_rom_run)):
        t0 = time.perf_counter()
        stage(cfg, setup)
        print(f"{name:10s} {time.perf_counter() - t0:8.1f} s", flush=True)
    plots = pipeline.stage_plot_data(cfg, setup)
    print((pipeline.Paths(cfg).report).read_text(), end="")
    print(f"plot data in {plots}")


if __name__ == "__main__":
    main()
