import hashlib
import json
from functools import wraps

import click

from config import ConfigError
from datasets import DatasetError
from expr import ExpressionSyntaxError


EXIT_USAGE = 2
EXIT_DATA = 3


def hash64(seed, key):
    """Stable 64-bit seed derived from a run seed and a genome key."""
    digest = hashlib.blake2b(f'{seed}:{key}'.encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(',', ':'))


def config_hash(*parts):
    """Short digest of JSON-serialisable configuration parts."""
    return hashlib.sha256(canonical_json(list(parts)).encode('utf-8')).hexdigest()[:32]


def handle_cli_errors(f):
    """Turn domain errors into the documented exit codes."""
    @wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ExpressionSyntaxError as e:
            click.echo(f'syntax error at {e}', err=True)
            raise SystemExit(EXIT_USAGE)
        except ConfigError as e:
            click.echo(f'config error: {e}', err=True)
            raise SystemExit(EXIT_USAGE)
        except DatasetError as e:
            click.echo(f'dataset error: {e}', err=True)
            raise SystemExit(EXIT_DATA)
    return decorated
