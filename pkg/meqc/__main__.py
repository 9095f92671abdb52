import sys

from meqc.main import main

sys.exit(main())
