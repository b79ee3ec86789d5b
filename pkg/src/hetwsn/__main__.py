import sys

from hetwsn.cli import main

sys.exit(main())
