"""Entry point: python -m src.difq_workbench <verb> ..."""
from .cli import main

if __name__ == "__main__":
    main()
