import sys

from robord.cli import main

sys.exit(main())
