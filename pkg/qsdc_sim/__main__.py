import sys

from qsdc_sim.cli import main

sys.exit(main())
