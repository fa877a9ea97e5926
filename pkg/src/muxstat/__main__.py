import sys

from muxstat.cli import main

sys.exit(main())
