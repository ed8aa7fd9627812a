import sys

from gapslab.cli import main

sys.exit(main())
