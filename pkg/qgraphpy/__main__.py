import sys

from qgraphpy.cli import main

sys.exit(main())
