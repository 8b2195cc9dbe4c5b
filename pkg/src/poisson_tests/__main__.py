"""
Entry point for running poisson_tests as a module.

Usage:
    python -m poisson_tests fisher --model paper --n 100
    python -m poisson_tests simulate --n 5 --u 2 --seed 42
    python -m poisson_tests thresholds --test BT1 --epsilon 0.05
    python -m poisson_tests power --test SFT --n 800 --N 10000
    python -m poisson_tests reproduce table1
"""

from .cli import main

if __name__ == "__main__":
    main()
