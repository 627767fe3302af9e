import sys

from shellbar.cli import main

sys.exit(main())
