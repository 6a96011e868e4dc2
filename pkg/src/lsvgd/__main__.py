import sys

from lsvgd.cli import main

sys.exit(main())
