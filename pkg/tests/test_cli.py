from fractions import Fraction

import orjson
import pytest
from click.testing import CliRunner

from cli.index import cli
from config import Config
from commands.check import random_origin_halfspaces
from commands.common import EXIT_BUDGET, EXIT_INPUT_ERROR
from services.errors import GeometryError
from services.report_service import load_configuration


@pytest.fixture
def run(tmp_path):
    runner = CliRunner(mix_stderr=False)

    def invoke(*args):
        return runner.invoke(cli, [*args, '--out', str(tmp_path)])
    return invoke


def results_of(outcome):
    assert outcome.exit_code == 0, outcome.output
    return orjson.loads(outcome.stdout)


def test_generate_perfect_split(run, tmp_path):
    results = results_of(run('generate', '--kind', 'perfect_split', '-N', '4', '-r', '3', '-d', '2', '--seed', '3'))
    assert results['perfect_split'] is True
    assert load_configuration(results['path']).N == 4
    assert (tmp_path / 'generate.json').exists()


def test_perfect_split_beyond_helly(run):
    outcome = run('generate', '--kind', 'perfect_split', '-N', '3', '-r', '4', '-d', '2')
    assert outcome.exit_code == EXIT_INPUT_ERROR
    assert orjson.loads(outcome.stdout)['success'] is False


def test_spec_out_of_range(run):
    assert run('tolerance', '-r', '1').exit_code == EXIT_INPUT_ERROR


def test_constants(run):
    results = results_of(run('constants', '--r-max', '4', '--d-max', '1', '-N', '100', '-f', '10'))
    row = next(row for row in results['table'] if row['r'] == 4 and row['d'] == 1)
    assert row['q'] == '2/3'
    assert row['p_r'] == '5/8'
    assert results['bounds']['tolerance_bound'] == 84


def test_tolerance_of_nested_pairs(run):
    results = results_of(run('tolerance', '--kind', 'nested_pairs', '-N', '4', '-d', '1'))
    assert results['best']['report']['tolerance'] == 1
    assert results['hyperplane_break']['consistent'] is True


def test_search_nested_pairs(run):
    results = results_of(run('search', '--kind', 'nested_pairs', '-N', '6', '-d', '1', '--target', '2',
                             '--trials', '200', '--seed', '1'))
    assert results['found'] is True


def test_attack_on_a_perfect_split(run):
    results = results_of(run('attack', '--kind', 'perfect_split', '-N', '4', '-r', '3', '-d', '2', '--seed', '2'))
    assert results['attack']['rule'] == 'containment'
    assert results['within_p_r_N'] is True
    assert results['attack']['broken_verified'] is True


def test_attack_with_a_certificate_file(run, tmp_path):
    capacity = results_of(run('capacity', '-N', '3', '-r', '2', '-d', '1', '--seed', '4'))
    path = tmp_path / 'certificate.json'
    path.write_bytes(orjson.dumps(capacity['certificate']))
    results = results_of(run('attack', '-N', '3', '-r', '2', '-d', '1', '--seed', '4', '--certificate', str(path)))
    assert results['attack']['f'] == capacity['f']


def test_capacity_budget(run):
    outcome = run('capacity', '--kind', 'nested_pairs', '-N', '4', '-d', '1', '--budget-families', '5')
    assert outcome.exit_code == EXIT_BUDGET
    assert orjson.loads(outcome.stdout)['error'] == 'Budget exhausted'


def test_capacity_of_pairs_matches_hyperplanes(run):
    results = results_of(run('capacity', '-N', '3', '-r', '2', '-d', '2', '--seed', '6'))
    assert results['f'] == results['n_prime']


def test_check_passes(run):
    results = results_of(run('check', '-N', '2', '-r', '3', '-d', '2', '--trials', '20'))
    assert results['passed'] is True
    assert all(suite['passed'] for suite in results['suites'].values())


def test_missing_configuration_file(run, tmp_path):
    assert run('tolerance', '--config', str(tmp_path / 'nope.json')).exit_code == EXIT_INPUT_ERROR


def test_spec_file_with_flag_override(run, tmp_path):
    spec = tmp_path / 'spec.json'
    spec.write_bytes(orjson.dumps({'kind': 'nested_pairs', 'N': 6, 'r': 2, 'd': 1}))
    results = results_of(run('tolerance', '--spec', str(spec), '-N', '4'))
    assert results['configuration'] == {'N': 4, 'r': 2, 'd': 1}


def test_results_are_reproducible(run):
    args = ('search', '-N', '3', '-r', '2', '-d', '2', '--seed', '11', '--trials', '5', '--target', '3')
    assert results_of(run(*args)) == results_of(run(*args))


@pytest.mark.parametrize('command', ['check', 'tolerance', 'capacity'])
@pytest.mark.parametrize('data', [{'d': 1, 'r': 1, 'classes': [[['0']], [['1']]]},
                                  {'d': 1, 'r': 2, 'classes': []}])
def test_degenerate_configuration_files(run, tmp_path, command, data):
    path = tmp_path / 'degenerate.json'
    path.write_bytes(orjson.dumps(data))
    outcome = run(command, '--config', str(path))
    assert outcome.exit_code == EXIT_INPUT_ERROR
    assert orjson.loads(outcome.stdout)['error'] == 'Invalid input'


def test_origin_half_spaces_need_a_dimension():
    with pytest.raises(GeometryError):
        random_origin_halfspaces(0, 5, 0)
    assert len(random_origin_halfspaces(2, 5, 0)) == 5


def test_tolerance_adds_the_q_bound_beyond_helly(run):
    results = results_of(run('tolerance', '-N', '3', '-r', '3', '-d', '1', '--seed', '2'))
    block = results['q_bound']
    assert block['q'] == '2/3'
    assert block['q_N'] == '2/1'
    assert block['within_ceil_minus_one'] == (results['best']['report']['tolerance'] <= 1)


def test_tolerance_has_no_q_bound_up_to_helly(run):
    assert 'q_bound' not in results_of(run('tolerance', '-N', '3', '-r', '2', '-d', '1'))


def test_survey(run, tmp_path):
    results = results_of(run('survey', '-N', '2', '-r', '3', '-d', '1', '--trials', '2', '--seed', '4',
                             '--format', 'both'))
    assert results['samples'] == 2
    assert [entry['kind'] for entry in results['entries']] == ['random', 'clustered']
    assert results['smallest']['ratio'] == min((e['ratio'] for e in results['entries']),
                                               key=lambda text: Fraction(text))
    assert (tmp_path / 'survey.csv').read_text().splitlines()[0] == 'N,r,d,kind,seed,tolerance,ratio,breaks_within_q'


def test_survey_needs_more_parts(run):
    assert run('survey', '-N', '2', '-r', '2', '-d', '1', '--trials', '1').exit_code == EXIT_INPUT_ERROR


def test_family_budget_comes_from_config_unless_flagged(run, monkeypatch):
    monkeypatch.setattr(Config, 'FAMILY_BUDGET', 5)
    args = ('capacity', '--kind', 'nested_pairs', '-N', '4', '-d', '1')
    assert run(*args).exit_code == EXIT_BUDGET
    assert results_of(run(*args, '--budget-families', '1000000'))['f'] >= 1
