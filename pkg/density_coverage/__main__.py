import sys

from density_coverage.cli import main

sys.exit(main())
