#!/usr/bin/env python3
import argparse
import sys

from . import __version__
from . import jobs


def make_parser() -> argparse.ArgumentParser:
    """Create an argument parser with argparse"""

    main_parser = argparse.ArgumentParser(prog="spectral-zeta")
    main_parser.description = (
        "Spectral zeta functions, Casimir energies, determinants and "
        "operator-regularization checks. Results are printed as JSON."
    )
    main_parser.add_argument("--version", action="version", version=__version__)
    subparsers = main_parser.add_subparsers(help="action")

    for command in jobs.SUBCOMMANDS:
        parser = command.make_parser(subparsers.add_parser(command.name))
        parser.set_defaults(func=command.main)
    parser = jobs.make_parser(subparsers.add_parser("run"))
    parser.set_defaults(func=jobs.main)
    return main_parser


def main(argv=None):
    main_parser = make_parser()

    args = main_parser.parse_args(argv)
    if hasattr(args, "func"):
        # run the selected action
        args.func(args)
    else:
        main_parser.print_help()
        sys.exit(1)


if __name__ == "__main__":
    main()
