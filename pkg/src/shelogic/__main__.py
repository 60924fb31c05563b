import sys

from shelogic.cli import main

sys.exit(main())
