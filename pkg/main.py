import sys
import logging
import argparse

from simulations import commands
from util import config as run_config
from util import util
from util.errors import ConfigError, SimulationError

subcommands = {
    "walk": commands.cmd_walk,              # Localized single-photon walks
    "bands": commands.cmd_bands,            # Dispersion, group velocity, winding
    "wavepacket": commands.cmd_wavepacket,  # Gaussian packets, Brillouin sweeps, cat states
    "twophoton": commands.cmd_twophoton,    # IPT / DPT joint distributions
    "hologram": commands.cmd_hologram,      # Phase masks for state preparation
    "radial": commands.cmd_radial           # q-plate radial coefficients, pupil overlaps
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def run(command, user_config=None, overrides=None):
    config = run_config.resolve(command, user_config, overrides)
    if config.get("output") and not util.options["output"]:
        util.Paths.OUTPUT = config["output"]
    logging.info(f"Running {command} into {util.Paths.OUTPUT}")
    return subcommands[command](config)


def _cli_options():
    parser = argparse.ArgumentParser(prog=util.TOOL_NAME)
    optional = parser._action_groups.pop()
    optional.add_argument('-c', '--config', dest="config", help="JSON file with run parameters")
    optional.add_argument('--set', dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                          help="Override a config value, dotted keys address nested objects")
    optional.add_argument('-o', '--output', dest="output", help="Custom output directory")
    optional.add_argument('-w', '--workers', dest="workers", type=int, default=1,
                          help="Threads used by parallel sweeps")
    optional.add_argument('-f', '--figure', dest="figure", help="Run a bundled figure config")
    optional.add_argument('--list-figures', dest="list_figures", action='store_true',
                          help="List the bundled figure configs")
    optional.add_argument('-v', '--verbose', action='store_true')
    optional.add_argument('-q', '--quiet', action='store_true')
    optional.add_argument('--version', action='version', version=f"{util.TOOL_NAME} {util.VERSION}")

    required = parser.add_argument_group("required arguments")
    required.add_argument('command', nargs="?", choices=sorted(subcommands),
                          help="Simulation to run (not needed with --figure)")

    parser._action_groups.append(optional)

    return parser


def _run_cli(argv=None):
    parser = _cli_options()
    options = parser.parse_args(argv)
    if options.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif options.quiet:
        logging.getLogger().setLevel(logging.WARNING)
    util.update_options({
        "output": options.output if options.output else False,
        "workers": max(options.workers, 1)
    })

    if options.list_figures:
        for name in util.list_figures():
            print(name)
        return []

    if options.figure:
        command, user_config = run_config.load_figure(options.figure)
        util.merge(user_config, run_config.load_user_config(options.config))
    elif options.command:
        command, user_config = options.command, run_config.load_user_config(options.config)
    else:
        raise ConfigError("a subcommand or --figure is required", field="command")
    return run(command, user_config, options.overrides)


def main(argv=None):
    if not logging.getLogger().handlers:
        logging.basicConfig(format="%(levelname)s %(message)s")
    logging.getLogger().setLevel(logging.INFO)
    logging.info("Simulation started")
    try:
        paths = _run_cli(argv)
    except KeyboardInterrupt:
        logging.warning("Simulation aborted")
        sys.exit()
    except ConfigError as e:
        logging.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except SimulationError as e:
        logging.error(f"{type(e).__name__}: {e}")
        return EXIT_NUMERIC
    except OSError as e:
        logging.error(f"I/O failure: {e}")
        return EXIT_IO
    for path in paths:
        logging.debug(f"output {path}")
    logging.info("Simulation finished")
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
