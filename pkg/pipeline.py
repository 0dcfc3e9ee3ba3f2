"""
Command-line entry point for the tilde-ck toolkit.

    python pipeline.py validate --presentation data/c1.tri
    python pipeline.py ktheory --presentation data/c1.tri
    python pipeline.py ktheory --tensor data/f2.m data/f2.m
    python pipeline.py search --plane 2 --lambda data/c1.lambda --limit 10
"""
import sys
from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
