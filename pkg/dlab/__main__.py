# dlab/__main__.py

import sys

from dlab.api.cli import main

sys.exit(main())
