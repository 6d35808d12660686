#!/usr/bin/env python3
"""
homlab - homomorphism counts, game comonads and counting logic on finite structures
"""

import sys
from modules.cli import HomlabCLI

def main():
    """Entry point."""
    try:
        cli = HomlabCLI()
        parser = cli.create_parser()
        args = parser.parse_args()
        sys.exit(cli.run(args))
    except Exception as e:
        print(f"Critical error: {e}")
        sys.exit(1)

if __name__ == "__main__":
    main()
