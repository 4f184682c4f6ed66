import os
from dotenv import load_dotenv

load_dotenv()


def _flag(name, default='False'):
    return os.getenv(name, default).lower() in ('true', '1', 't')


# values come from the .env file or the environment, falling back to the defaults below.
# cli flags win over anything set here.
class Config:
    VERSION = '0.1.0'
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    OUTPUT_DIR = os.getenv('TVERBERG_OUTPUT_DIR', 'reports')
    SUBSET_BUDGET = int(os.getenv('SUBSET_BUDGET', '200000'))
    FAMILY_BUDGET = int(os.getenv('FAMILY_BUDGET', '1000000'))
    PARTITION_BUDGET = int(os.getenv('PARTITION_BUDGET', '50000'))
    MATRIX_BUDGET = int(os.getenv('MATRIX_BUDGET', '70000'))
    INTERVAL_PRECISION = int(os.getenv('INTERVAL_PRECISION', '64'))
    SHOW_PROGRESS = _flag('SHOW_PROGRESS')
