import sys
import os
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
import logging

import click

from commands.attack import attack_cmd
from commands.capacity import capacity_cmd
from commands.check import check_cmd
from commands.constants import constants_cmd
from commands.generate import generate_cmd
from commands.search import search_cmd
from commands.survey import survey_cmd
from commands.tolerance import tolerance_cmd
from config import Config


@click.group('tverberg')
@click.version_option(Config.VERSION)
@click.option('--log-level', default=None, help='overrides LOG_LEVEL')
def cli(log_level):
    """Exact experiments on colourful Tverberg partitions with tolerance."""
    logging.basicConfig(
        level=(log_level or Config.LOG_LEVEL).upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
        force=True,
    )


cli.add_command(generate_cmd)
cli.add_command(check_cmd)
cli.add_command(tolerance_cmd)
cli.add_command(search_cmd)
cli.add_command(attack_cmd)
cli.add_command(capacity_cmd)
cli.add_command(constants_cmd)
cli.add_command(survey_cmd)

if __name__ == '__main__':
    cli()
