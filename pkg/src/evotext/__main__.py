import sys

from evotext.cli import main

sys.exit(main())
