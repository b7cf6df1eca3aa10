"""CLI entry point: `python -m convergegw` or the `converge-gw` script.

Exit codes: 0 clean, 2 config error, 3 port error.
"""

from __future__ import annotations

import errno
import sys

from .config import config_from_args
from .errors import ApiError, BadConfig, PortInUse, SeedFileInvalid


def main(argv=None) -> int:
    try:
        config = config_from_args(argv)
    except (BadConfig, SeedFileInvalid) as e:
        print(f"config error: {e.message}", file=sys.stderr)
        return 2

    try:
        from .app import create_app
        from .gateway import Gateway

        gateway = Gateway(config)
        app = create_app(gateway)
    except ApiError as e:
        print(f"config error: {e.message}", file=sys.stderr)
        return 2

    import uvicorn

    try:
        uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="warning")
    except OSError as e:
        if e.errno in (errno.EADDRINUSE, errno.EACCES):
            print(f"port error: {PortInUse(str(e)).message}", file=sys.stderr)
            return 3
        raise
    except SystemExit as e:
        # uvicorn exits 1 when the socket cannot bind
        if e.code:
            print("port error: cannot bind port", file=sys.stderr)
            return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
