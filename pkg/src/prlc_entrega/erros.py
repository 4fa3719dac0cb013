"""
Exceções do projeto.
Derivam das exceções embutidas (ValueError, ArithmeticError) para que quem já trata
ValueError continue funcionando.
"""


class ErroDominio(ValueError):
    """Argumento fora do domínio da operação (elemento fora do corpo, dimensão incompatível, estado inválido)."""


class ErroPostoDeficiente(ErroDominio):
    """Sistema sem posto suficiente para resolver ou decodificar."""


class ErroNumerico(ArithmeticError):
    """Valores não finitos ou iteração que não converge dentro do limite."""


class ErroValidacaoConfiguracao(ValueError):
    """Campo de cenário inválido. `caminho` identifica o campo (ex.: enlaces[0].taxa)."""

    def __init__(self, caminho: str, mensagem: str) -> None:
        super().__init__(f"{caminho}: {mensagem}")
        self.caminho = caminho
        self.mensagem = mensagem


class ErroImpressaoDigital(ErroValidacaoConfiguracao):
    """Política ou checkpoint gerado para outro cenário."""


class ErroAutoverificacao(AssertionError):
    """Falha de oráculo no modo de autoverificação."""
