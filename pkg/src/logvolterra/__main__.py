import sys

from logvolterra.cli import main

sys.exit(main())
