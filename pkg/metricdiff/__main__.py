import sys
from metricdiff.cli import main

sys.exit(main())
