import sys

from rigidcrlb.cli import main

sys.exit(main())
