"""Runtime settings for the gasket fractal tools.

Values are read from the environment (optionally populated from a ``.env``
file in the project root).  Command-line flags take precedence over the
defaults defined here.
"""

from __future__ import annotations

import os

from dotenv import load_dotenv

load_dotenv()

# Lattice depth used by the ``figures`` command.
FIGURE_DEPTH = int(os.getenv("FIGURE_DEPTH", 7))

# Depth of the vertex lattice used to estimate sup norms.
SUP_NORM_DEPTH = int(os.getenv("SUP_NORM_DEPTH", 8))

CHAOS_BURN_IN = int(os.getenv("CHAOS_BURN_IN", 50))
EVAL_DEPTH = int(os.getenv("EVAL_DEPTH", 40))

LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING").upper()

REDIS_URL = os.getenv("REDIS_URL", "redis://localhost:6379/0")
TABLE_CACHE_TTL = int(os.getenv("TABLE_CACHE_TTL", 60 * 60 * 24))

HOST = os.getenv("HOST", "127.0.0.1")
PORT = int(os.getenv("PORT", 5000))
SECRET_KEY = os.getenv("SECRET_KEY", "dev-secret")

TOOL_VERSION = "1.0.0"
