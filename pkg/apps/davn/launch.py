# launch.py
import sys
from pathlib import Path

# Get paths
launch_file = Path(__file__).resolve()
app_dir = launch_file.parent                    # apps/davn/
repo_root = app_dir.parent.parent               # repository root
src_dir = repo_root / 'src'                     # src/

# Add to Python path
if str(src_dir) not in sys.path:
    sys.path.insert(0, str(src_dir))

# Import and run
from davnsim.cli import main

if __name__ == "__main__":
    sys.exit(main())
