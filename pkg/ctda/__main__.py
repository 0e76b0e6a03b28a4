import sys

from ctda.cli import main

sys.exit(main())
