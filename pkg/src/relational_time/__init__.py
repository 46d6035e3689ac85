"""Page-Wootters relational time: history states, two-time records and Leggett-Garg tests."""

__version__ = "1.0.0"
