#!/usr/bin/env python3
"""
Wave-packet scattering simulator - Main Runner
Runs one mode of the simulator from a config file and reports the gates
"""
import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from src.config import load_config, parse_config, render_config
from src.errors import ConfigurationError, RunFailedError
from src.graph import execute
from src.recipes import emit_figure_recipes

# Load environment variables from .env file
load_dotenv()

MODES = ("run1d", "run2d", "oracle", "analyze", "compare")
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def configure_logging():
    level = os.getenv("WELLPACKET_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Quantum wave-packet scattering off attractive wells")
    parser.add_argument("mode", choices=MODES + ("recipes",), help="run mode, or `recipes` to write the figure configs")
    parser.add_argument("--config", help="run configuration file (optional for analyze)")
    parser.add_argument("--out", help="output directory; for analyze, the run directory to re-analyze")
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="replace one configuration value; repeatable",
    )
    parser.add_argument("--recipes-dir", help="target directory for `recipes`")
    return parser


def print_summary(manifest, output_dir: str):
    print("\n" + "=" * 60)
    print("RUN COMPLETED")
    print("=" * 60)
    print(f"📁 Output: {output_dir}")
    print(f"⏱️  Wall clock: {manifest.wall_clock_seconds:.1f} s")
    print(f"📄 Files: {len(manifest.files)}")
    for name, gate in sorted(manifest.gates.items()):
        marker = "✅" if gate.passed else "❌"
        print(f"{marker} {name}: {gate.value:.3e} (limit {gate.threshold:.0e})")


def main(argv=None) -> int:
    """
    Parse the command line, run the requested mode and map the outcome to an exit code.
    """
    configure_logging()
    args = build_parser().parse_args(argv)

    if args.mode == "recipes":
        paths = emit_figure_recipes(args.recipes_dir)
        print(f"✅ Wrote {len(paths)} recipe(s) to {os.path.dirname(paths[0])}")
        return EXIT_OK

    overrides = [f"mode={args.mode}"] + list(args.override)
    try:
        if args.config:
            config, _ = load_config(args.config, overrides)
        elif args.mode == "analyze":
            config = parse_config("", overrides)
        else:
            raise ConfigurationError("--config is required for this mode", key="config")
    except ConfigurationError as e:
        print(f"❌ Configuration error: {e}")
        return EXIT_CONFIG
    except OSError as e:
        print(f"❌ Cannot read configuration: {e}")
        return EXIT_CONFIG

    output_dir = args.out or config.output.output_dir
    print(f"🚀 Starting {config.mode} run -> {output_dir}")
    try:
        manifest = execute(config, render_config(config), output_dir=output_dir)
    except RunFailedError as e:
        print(f"❌ Run failed: {e}")
        return EXIT_CONFIG if e.kind == "config" else EXIT_NUMERIC
    except KeyboardInterrupt:
        print("\n\n⏹️  Run cancelled by user.")
        return EXIT_NUMERIC

    print_summary(manifest, output_dir)
    if not manifest.passed:
        print("\n❌ At least one invariant gate failed.")
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
