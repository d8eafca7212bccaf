import sys

from dphav.cli import main

sys.exit(main())
