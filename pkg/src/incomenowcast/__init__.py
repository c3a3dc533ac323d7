"""Nowcasting engine for household income distributions under a
labour-market shock, with transfer-policy scenarios and effect decomposition."""

__version__ = "0.1.0"
