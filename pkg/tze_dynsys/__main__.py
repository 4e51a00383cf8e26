import sys

from tze_dynsys.main import main

sys.exit(main())
