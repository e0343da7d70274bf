import sys

from gaussctl.cli import main

sys.exit(main())
