import logging
from typing import Callable

from flask import Flask

import config
from cli import cli
from models import RunManifest

logging.basicConfig(level=config.LOG_LEVEL)

app = Flask(__name__)
app.config['SECRET_KEY'] = config.SECRET_KEY
app.json.sort_keys = False

from api import api_bp

app.register_blueprint(api_bp)
app.cli.add_command(cli, 'fractal')

try:
    import redis  # type: ignore

    table_cache = redis.Redis.from_url(config.REDIS_URL, decode_responses=True)
except Exception:
    table_cache = None


def cached_table_csv(manifest: RunManifest, build: Callable[[], str]) -> str:
    """Return the CSV for ``manifest``, building it on a cache miss.

    Results are cached in ``table_cache`` keyed by the manifest's
    computation parameters. Cache failures are ignored so the table is still
    built normally.
    """
    key = manifest.cache_key()
    if table_cache:
        try:
            cached = table_cache.get(key)
            if cached:
                if isinstance(cached, bytes):
                    cached = cached.decode()
                return cached
        except Exception:
            app.logger.warning('table cache unavailable', exc_info=True)
    csv_text = build()
    if table_cache:
        try:
            table_cache.setex(key, config.TABLE_CACHE_TTL, csv_text)
        except Exception:
            pass
    return csv_text


@app.route('/')
def index():
    return {
        'name': 'gasket-fractal',
        'version': config.TOOL_VERSION,
        'endpoints': sorted(
            str(rule) for rule in app.url_map.iter_rules() if str(rule).startswith('/api')
        ),
    }


if __name__ == '__main__':
    app.run(host=config.HOST, port=config.PORT, debug=True)
