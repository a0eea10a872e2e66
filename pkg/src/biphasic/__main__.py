import sys

from biphasic.cli import main

sys.exit(main())
