"""Figure regeneration for combandit regret traces.

Consumes only the public trace-CSV contract; see plot.py for the CLI.
"""

__version__ = "0.1.0"
