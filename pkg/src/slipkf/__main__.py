import sys

from slipkf.cli import main

sys.exit(main())
