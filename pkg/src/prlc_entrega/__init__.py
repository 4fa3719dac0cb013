"""Entrega priorizada (PRLC) de dados em camadas a partir de múltiplos servidores."""

__version__ = "0.1.0"
