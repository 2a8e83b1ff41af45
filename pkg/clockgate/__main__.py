import sys

from clockgate.main import main

sys.exit(main())
