import sys

from NetFlowRL.harness.cli import main

sys.exit(main())
