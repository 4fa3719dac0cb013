"""
Aritmética exata em corpos finitos GF(q) e álgebra linear densa (posto, inserção em forma
escalonada reduzida, resolução de sistemas) usada pela codificação PRLC e pelos oráculos
de Monte-Carlo.

Corpos primos usam aritmética modular; extensões GF(p^m) usam as tabelas exp/log do
pacote galois sobre o polinômio primitivo padrão (Conway) de cada grau.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import galois
import numpy as np

from prlc_entrega import configuracoes
from prlc_entrega.erros import ErroDominio, ErroPostoDeficiente
from prlc_entrega.logger import configurar_logger_da_aplicacao

logger = configurar_logger_da_aplicacao(__name__)


@lru_cache(maxsize=None)
def _classe_corpo(q: int) -> type[galois.FieldArray]:
    """Classe FieldArray de GF(q). galois já guarda as classes; o cache evita a checagem de q."""
    logger.debug("Construindo GF(%d).", q)
    return galois.GF(q)


@dataclass(frozen=True)
class EspecCorpo:
    """Corpo finito de ordem q (primo ou potência de primo). Imutável e compartilhável entre threads."""

    q: int

    def __post_init__(self) -> None:
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise ErroDominio(f"Ordem do corpo deve ser inteira: {self.q!r}")
        if self.q < 2 or not galois.is_prime_power(int(self.q)):
            raise ErroDominio(f"Ordem do corpo deve ser potência de primo >= 2: {self.q}")
        if self.q > configuracoes.ORDEM_CORPO_MAXIMA:
            raise ErroDominio(f"Ordem do corpo acima de {configuracoes.ORDEM_CORPO_MAXIMA}: {self.q}")

    @property
    def GF(self) -> type[galois.FieldArray]:
        return _classe_corpo(int(self.q))

    def elemento(self, a: int) -> galois.FieldArray:
        """Converte um inteiro em elemento do corpo; fora de [0, q) é erro de domínio."""
        if isinstance(a, bool) or not isinstance(a, (int, np.integer)):
            raise ErroDominio(f"Elemento deve ser inteiro: {a!r}")
        if not 0 <= int(a) < self.q:
            raise ErroDominio(f"Elemento {a} fora de GF({self.q})")
        return self.GF(int(a))

    def vetor(self, valores: Sequence[int] | np.ndarray) -> galois.FieldArray:
        """Vetor 1-D de elementos do corpo, com checagem de faixa."""
        bruto = np.asarray(valores, dtype=np.int64).reshape(-1)
        if bruto.size and (bruto.min() < 0 or bruto.max() >= self.q):
            raise ErroDominio(f"Vetor com elementos fora de GF({self.q})")
        return self.GF(bruto)

    def aleatorio(self, forma: int | tuple[int, ...], rng: np.random.Generator) -> galois.FieldArray:
        """Elementos uniformes em GF(q) sorteados a partir do gerador informado."""
        return self.GF.Random(forma, seed=rng)

    def zeros(self, forma: int | tuple[int, ...]) -> galois.FieldArray:
        return self.GF.Zeros(forma)


# --- Operações elementares ---


def somar(a: int, b: int, espec: EspecCorpo) -> int:
    return int(espec.elemento(a) + espec.elemento(b))


def subtrair(a: int, b: int, espec: EspecCorpo) -> int:
    return int(espec.elemento(a) - espec.elemento(b))


def multiplicar(a: int, b: int, espec: EspecCorpo) -> int:
    return int(espec.elemento(a) * espec.elemento(b))


def inverter(a: int, espec: EspecCorpo) -> int:
    """Inverso multiplicativo; zero não tem inverso."""
    elemento = espec.elemento(a)
    if int(elemento) == 0:
        raise ErroDominio("Inversão de zero")
    return int(elemento**-1)


def dividir(a: int, b: int, espec: EspecCorpo) -> int:
    return multiplicar(a, inverter(b, espec), espec)


# --- Matrizes ---


@dataclass(frozen=True, eq=False)
class MatrizCorpo:
    """
    Matriz densa sobre GF(q). `escalonada` indica que as entradas já estão em forma
    escalonada reduzida por linhas, sem linhas nulas.
    """

    espec: EspecCorpo
    entradas: galois.FieldArray
    escalonada: bool = False

    @classmethod
    def de_lista(
        cls,
        linhas: Sequence[Sequence[int]] | np.ndarray,
        espec: EspecCorpo,
        colunas: int | None = None,
    ) -> "MatrizCorpo":
        bruto = np.asarray(linhas, dtype=np.int64)
        if bruto.size == 0:
            return cls.vazia(colunas or (bruto.shape[1] if bruto.ndim == 2 else 0), espec)
        if bruto.ndim != 2:
            raise ErroDominio(f"Matriz deve ser 2-D, recebida com forma {bruto.shape}")
        if bruto.min() < 0 or bruto.max() >= espec.q:
            raise ErroDominio(f"Matriz com elementos fora de GF({espec.q})")
        return cls(espec, espec.GF(bruto))

    @classmethod
    def vazia(cls, colunas: int, espec: EspecCorpo) -> "MatrizCorpo":
        return cls(espec, espec.zeros((0, colunas)), escalonada=True)

    @classmethod
    def identidade(cls, n: int, espec: EspecCorpo) -> "MatrizCorpo":
        return cls(espec, espec.GF.Identity(n), escalonada=True)

    @property
    def linhas(self) -> int:
        return int(self.entradas.shape[0])

    @property
    def colunas(self) -> int:
        return int(self.entradas.shape[1])

    def como_lista(self) -> list[list[int]]:
        return self.entradas.view(np.ndarray).astype(int).tolist()

    def forma_escalonada(self) -> "MatrizCorpo":
        """Forma escalonada reduzida sem linhas nulas (mesmo espaço-linha)."""
        if self.escalonada:
            return self
        if self.linhas == 0:
            return MatrizCorpo.vazia(self.colunas, self.espec)
        reduzida = self.entradas.row_reduce()
        nao_nulas = np.any(reduzida.view(np.ndarray) != 0, axis=1)
        return MatrizCorpo(self.espec, reduzida[nao_nulas], escalonada=True)

    def pivos(self) -> list[int]:
        """Colunas-pivô da forma escalonada."""
        base = self.forma_escalonada()
        if base.linhas == 0:
            return []
        return np.argmax(base.entradas.view(np.ndarray) != 0, axis=1).astype(int).tolist()


def posto_matriz(m: MatrizCorpo) -> int:
    """Dimensão do espaço-linha. Matriz vazia tem posto 0."""
    if m.linhas == 0 or m.colunas == 0:
        return 0
    if m.escalonada:
        return m.linhas
    return int(np.linalg.matrix_rank(m.entradas))


def inserir_rref(m: MatrizCorpo, v: Sequence[int] | np.ndarray) -> tuple[MatrizCorpo, bool]:
    """
    Insere o vetor v numa base escalonada reduzida.

    Se v está fora do espaço-linha, devolve a nova base (posto + 1) e True; caso
    contrário devolve a própria matriz, inalterada, e False.
    """
    vetor = v if isinstance(v, m.espec.GF) else m.espec.vetor(v)
    vetor = vetor.reshape(-1)
    if vetor.size != m.colunas:
        raise ErroDominio(f"Vetor com {vetor.size} entradas para matriz com {m.colunas} colunas")

    base = m.forma_escalonada()
    entradas = base.entradas
    if base.linhas:
        pivos = base.pivos()
        resto = vetor - (vetor[pivos].reshape(1, -1) @ entradas).reshape(-1)
    else:
        resto = vetor.copy()

    nao_nulos = np.flatnonzero(resto.view(np.ndarray))
    if nao_nulos.size == 0:
        return m, False

    pivo = int(nao_nulos[0])
    resto = resto / resto[pivo]
    if base.linhas:
        entradas = entradas - entradas[:, pivo].reshape(-1, 1) * resto.reshape(1, -1)
    empilhada = np.vstack([entradas.view(np.ndarray), resto.view(np.ndarray).reshape(1, -1)])
    ordem = np.argsort(np.argmax(empilhada != 0, axis=1), kind="stable")
    return MatrizCorpo(m.espec, m.espec.GF(empilhada[ordem]), escalonada=True), True


def resolver_posto_completo(
    m: MatrizCorpo, lado_direito: MatrizCorpo | Sequence[Sequence[int]] | np.ndarray
) -> MatrizCorpo:
    """
    Resolve m · X = lado_direito para m quadrada de posto completo.
    Matriz singular levanta ErroPostoDeficiente.
    """
    if m.linhas != m.colunas:
        raise ErroDominio(f"Matriz de coeficientes não é quadrada: {m.linhas}x{m.colunas}")
    if isinstance(lado_direito, MatrizCorpo):
        direita = lado_direito.entradas
    else:
        bruto = np.asarray(lado_direito, dtype=np.int64)
        if bruto.ndim == 1:
            bruto = bruto.reshape(-1, 1)
        direita = MatrizCorpo.de_lista(bruto, m.espec).entradas
    if direita.shape[0] != m.linhas:
        raise ErroDominio(f"Lado direito com {direita.shape[0]} linhas para sistema {m.linhas}x{m.linhas}")
    if m.linhas == 0:
        return MatrizCorpo(m.espec, direita)

    posto = posto_matriz(m)
    if posto < m.linhas:
        raise ErroPostoDeficiente(f"Sistema singular: posto {posto} < {m.linhas}")
    try:
        inversa = np.linalg.inv(m.entradas)
    except np.linalg.LinAlgError as e:
        raise ErroPostoDeficiente(f"Sistema singular: {e}") from e
    return MatrizCorpo(m.espec, inversa @ direita)
