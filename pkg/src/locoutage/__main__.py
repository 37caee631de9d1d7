import sys

from locoutage.cli import main

sys.exit(main())
