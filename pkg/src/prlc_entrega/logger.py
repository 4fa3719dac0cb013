"""
Configuração centralizada do logging.
Saída: terminal (nível de NIVEL_LOG_TERMINAL, INFO por padrão) e um único arquivo .log por
processo em logs/ (DEBUG+), com timestamp e PID no nome para não misturar os processos
paralelos de simulate e sweep.
"""

import logging
import os
import sys
from datetime import datetime

from prlc_entrega import configuracoes

_FORMATO_ARQUIVO = logging.Formatter(
    "%(asctime)s | %(levelname)-8s | %(processName)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
_FORMATO_CONSOLE = logging.Formatter("%(levelname)-8s | %(name)s | %(message)s")

# Handlers compartilhados por todos os módulos do processo atual
_handlers: dict[str, logging.Handler] = {}
_pid_handlers: int | None = None


def _handlers_do_processo() -> tuple[logging.Handler, logging.Handler]:
    global _pid_handlers
    if _pid_handlers != os.getpid():
        # processo filho: cada um abre o seu arquivo
        _handlers.clear()
        _pid_handlers = os.getpid()

    if not _handlers:
        pasta_logs = configuracoes.PASTA_LOGS_ABSOLUTA
        pasta_logs.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        arquivo_log = pasta_logs / f"prlc_entrega_{timestamp}_{os.getpid()}.log"

        handler_arquivo = logging.FileHandler(arquivo_log, encoding="utf-8", delay=True)
        handler_arquivo.setLevel(logging.DEBUG)
        handler_arquivo.setFormatter(_FORMATO_ARQUIVO)

        handler_console = logging.StreamHandler(sys.stdout)
        handler_console.setLevel(getattr(logging, configuracoes.NIVEL_LOG_TERMINAL, logging.INFO))
        handler_console.setFormatter(_FORMATO_CONSOLE)

        _handlers["arquivo"] = handler_arquivo
        _handlers["console"] = handler_console
    return _handlers["arquivo"], _handlers["console"]


def configurar_logger_da_aplicacao(nome_do_modulo: str) -> logging.Logger:
    """
    Retorna um logger configurado para o módulo.
    Escreve no terminal a partir de NIVEL_LOG_TERMINAL e no arquivo .log do processo em DEBUG+.
    """
    logger = logging.getLogger(nome_do_modulo)
    handlers = _handlers_do_processo()
    if all(h in logger.handlers for h in handlers):
        return logger

    logger.handlers.clear()
    logger.setLevel(logging.DEBUG)
    logger.propagate = False
    for handler in handlers:
        logger.addHandler(handler)
    return logger


def definir_nivel_terminal(nivel: str) -> None:
    """Troca o nível do terminal de todos os loggers do processo (ex.: DEBUG com --verbose)."""
    _, handler_console = _handlers_do_processo()
    handler_console.setLevel(getattr(logging, nivel.strip().upper(), logging.INFO))
