"""Allow ``python -m simgap`` to behave like the installed binary."""

from .cli import main

main()
