import sys

from risgmlb.harness.cli import main

sys.exit(main())
