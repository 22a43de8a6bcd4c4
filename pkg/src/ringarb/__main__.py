import sys

from ringarb.cli import main

sys.exit(main())
