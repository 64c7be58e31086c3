import sys
from tagseq.cli import main
sys.exit(main())
