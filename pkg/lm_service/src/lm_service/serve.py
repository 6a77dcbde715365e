"""Process entry point.

Configuration comes from the environment so the service drops into
container schedulers without a config file:

    MODEL_ID  which model to serve (default "builtin:tiny")
    PORT      TCP port to bind (default 8631)
    HOST      bind address (default 127.0.0.1)
"""

from __future__ import annotations

import logging
import os
import sys

from .app import create_app

DEFAULT_PORT = 8631


def main() -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s %(name)s %(message)s"
    )
    try:
        port = int(os.environ.get("PORT", DEFAULT_PORT))
    except ValueError:
        print(f"PORT={os.environ['PORT']!r} is not an integer", file=sys.stderr)
        return 2
    host = os.environ.get("HOST", "127.0.0.1")

    app = create_app()
    if app.state.model is None:
        # Serve anyway: /healthz explains the failure to whatever is
        # probing us, which beats dying silently under a supervisor.
        print(f"warning: {app.state.failure}", file=sys.stderr)

    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
