import sys

from sessrc.cli import main

sys.exit(main())
