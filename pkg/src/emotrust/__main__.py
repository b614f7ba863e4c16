"""
emotrust Main Module
====================

Entry point for ``python -m emotrust``.
"""

from emotrust.cli import main

if __name__ == "__main__":
    main()
