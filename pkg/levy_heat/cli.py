"""
Command line entry point: ``levy-heat <subcommand> [--config PATH] ...``.

Exit status 0 means every check passed, 2 a rejected config, 3 a Monte Carlo
acceptance failure and 4 a failed identity check.
"""
import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional

from .backends import ExperimentBackend
from .constants import (EXIT_IDENTITY, EXIT_OK, EXIT_STATISTICAL,
                        EXIT_VALIDATION, OUTPUT_DIRECTORY_VARIABLE)
from .errors import (ConvergenceError, InsufficientDataError, LevyHeatError,
                     ParseError, StatisticalVoidError, ValidationError,
                     VerificationError)
from .parsers import parse_config, read_config
from .registrars import DirectoryRegistrar
from .types import ExperimentConfig
from .validators import validate_config

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'
EXIT_FAILURE = 1

COMMANDS: Dict[str, Callable[[ExperimentBackend], object]] = {
    'solve': ExperimentBackend.handle_solve,
    'strong-rates': ExperimentBackend.handle_strong_rates,
    'weak-rates': ExperimentBackend.handle_weak_rates,
    'ratio': ExperimentBackend.handle_ratio,
    'covariance': ExperimentBackend.handle_covariance,
    'malliavin-verify': ExperimentBackend.handle_malliavin_verify,
    'operator-checks': ExperimentBackend.handle_operator_checks,
}


def build_parser() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(
      prog='levy-heat',
      description='Numerical experiments for the stochastic heat equation '
      'driven by pure-jump Lévy noise.')
  parser.add_argument('--log-level',
                      default='INFO',
                      choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                      help='Logging threshold on stderr.')
  commands = parser.add_subparsers(dest='command', metavar='command')
  commands.required = True
  for name in list(COMMANDS) + ['describe']:
    sub = commands.add_parser(name)
    sub.add_argument('--config',
                     default=None,
                     help='Experiment config file; built-in defaults if '
                     'omitted.')
    sub.add_argument('--seed',
                     type=int,
                     default=None,
                     help='Master seed, overrides the config.')
    sub.add_argument('--workers',
                     type=int,
                     default=None,
                     help='Worker processes, overrides the config; 0 uses '
                     'every core.')
    sub.add_argument('--out',
                     default=None,
                     help='Output directory; falls back to ${} and then the '
                     'config.'.format(OUTPUT_DIRECTORY_VARIABLE))
  return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
  config = (read_config(args.config)
            if args.config is not None else parse_config(''))
  if args.seed is not None: config.mc.seed = args.seed
  if args.workers is not None: config.mc.workers = args.workers
  if args.out is not None:
    config.output.directory = args.out
  elif os.environ.get(OUTPUT_DIRECTORY_VARIABLE):
    config.output.directory = os.environ[OUTPUT_DIRECTORY_VARIABLE]
  validate_config(config)
  return config


def exit_code(error: LevyHeatError) -> int:
  if isinstance(error, (ValidationError, ParseError)):
    return EXIT_VALIDATION
  if isinstance(error,
                (StatisticalVoidError, InsufficientDataError,
                 ConvergenceError)):
    return EXIT_STATISTICAL
  if isinstance(error, VerificationError):
    return EXIT_IDENTITY
  return EXIT_FAILURE


def run(args: argparse.Namespace) -> int:
  try:
    config = load_config(args)
    backend = ExperimentBackend(
        config=config, registrar=DirectoryRegistrar(config.output.directory))
    if args.command == 'describe':
      sys.stdout.write(backend.describe())
    else:
      COMMANDS[args.command](backend)
  except LevyHeatError as e:
    logger.error('%s: %s', type(e).__name__, e)
    return exit_code(e)
  logger.info('%s finished', args.command)
  return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
  args = build_parser().parse_args(argv)
  logging.basicConfig(level=getattr(logging, args.log_level),
                      format=LOG_FORMAT,
                      stream=sys.stderr)
  return run(args)
