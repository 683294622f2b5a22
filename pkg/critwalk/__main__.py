import sys

from .cw_cli import main

sys.exit(main())
