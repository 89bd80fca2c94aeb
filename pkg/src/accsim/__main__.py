import sys

from accsim.cli import main

sys.exit(main())
