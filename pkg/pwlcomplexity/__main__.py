import sys

from pwlcomplexity.cli import main


sys.exit(main())
