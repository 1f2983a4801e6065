"""Entry point for running rodelab as a module.

This allows the package to be run using:
  python -m rodelab train --config experiments/matrix.yaml

Which is equivalent to the ``rodelab`` console script.
"""

from rodelab.rodelab_main import main

if __name__ == "__main__":
    raise SystemExit(main())
