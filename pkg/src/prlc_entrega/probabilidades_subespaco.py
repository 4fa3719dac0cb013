"""
Combinatória q-análoga exata: leis da dimensão do span de vetores uniformes e da união
de subespaços, e as probabilidades de decodificação e de transição do vetor de postos
derivadas delas.

Toda a aritmética é racional (`fractions.Fraction`); a conversão para ponto flutuante
acontece só na fronteira da API (`PmfDimensao.como_float`, planejador).
"""

from collections import defaultdict
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from prlc_entrega.erros import ErroDominio
from prlc_entrega.logger import configurar_logger_da_aplicacao

if TYPE_CHECKING:
    from prlc_entrega.codec_prlc import EspecGeracao

logger = configurar_logger_da_aplicacao(__name__)

VetorPosto = tuple[int, ...]
"""Postos cumulativos (r_1, ..., r_L) das submatrizes aninhadas de uma geração."""


class ModoProbabilidade(StrEnum):
    EXATO = "exato"
    Q_INFINITO = "q-infinito"


@dataclass(frozen=True)
class PmfDimensao:
    """
    Distribuição de uma dimensão sobre {0, ..., ambiente}. `massas[d]` é a
    probabilidade exata da dimensão d; a soma é exatamente 1.
    """

    massas: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not self.massas:
            raise ErroDominio("Distribuição sem suporte")
        if any(m < 0 for m in self.massas):
            raise ErroDominio("Distribuição com massa negativa")
        if sum(self.massas) != 1:
            raise ErroDominio(f"Distribuição não normalizada: soma {sum(self.massas)}")

    @classmethod
    def pontual(cls, dimensao: int, ambiente: int) -> "PmfDimensao":
        massas = [Fraction(0)] * (ambiente + 1)
        massas[dimensao] = Fraction(1)
        return cls(tuple(massas))

    @property
    def ambiente(self) -> int:
        return len(self.massas) - 1

    @property
    def suporte(self) -> tuple[int, ...]:
        return tuple(d for d, m in enumerate(self.massas) if m)

    def __getitem__(self, dimensao: int) -> Fraction:
        if 0 <= dimensao < len(self.massas):
            return self.massas[dimensao]
        return Fraction(0)

    def itens(self) -> Iterator[tuple[int, Fraction]]:
        """Pares (dimensão, massa) com massa positiva."""
        return ((d, m) for d, m in enumerate(self.massas) if m)

    def estendida(self, ambiente: int) -> "PmfDimensao":
        """Mesma lei com ambiente maior (massas nulas acrescentadas)."""
        if ambiente < self.ambiente:
            raise ErroDominio(f"Ambiente {ambiente} menor que {self.ambiente}")
        return PmfDimensao(self.massas + (Fraction(0),) * (ambiente - self.ambiente))

    def como_float(self) -> np.ndarray:
        return np.array([float(m) for m in self.massas])


def _validar_ordem(q: int) -> None:
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 2:
        raise ErroDominio(f"Ordem do corpo inválida: {q!r}")


@lru_cache(maxsize=None)
def binomial_gaussiano(a: int, b: int, q: int) -> int:
    """
    Coeficiente q-binomial [a b]_q: número de subespaços de dimensão b de um espaço de
    dimensão a sobre GF(q). Zero quando b > a.
    """
    if a < 0 or b < 0:
        raise ErroDominio(f"Índices negativos no coeficiente gaussiano: ({a}, {b})")
    _validar_ordem(q)
    if b > a:
        return 0
    b = min(b, a - b)
    numerador, denominador = 1, 1
    for i in range(b):
        numerador *= q ** (a - i) - 1
        denominador *= q ** (i + 1) - 1
    return numerador // denominador


# --- Leis de dimensão ---


@lru_cache(maxsize=None)
def _massas_span(n: int, k: int, q: int) -> tuple[Fraction, ...]:
    massas = []
    escala = q ** (n * k)
    for r in range(k + 1):
        if r > n:
            massas.append(Fraction(0))
            continue
        soma = 0
        for i in range(r + 1):
            termo = binomial_gaussiano(r, i, q) * q ** (n * i + (r - i) * (r - i - 1) // 2)
            soma += termo if (r - i) % 2 == 0 else -termo
        massas.append(Fraction(binomial_gaussiano(k, r, q) * soma, escala))
    return tuple(massas)


def pmf_dimensao_span(
    n: int, k: int, q: int, modo: ModoProbabilidade = ModoProbabilidade.EXATO
) -> PmfDimensao:
    """Lei da dimensão do span de n vetores uniformes i.i.d. de um espaço de dimensão k."""
    if n < 0 or k < 0:
        raise ErroDominio(f"Argumentos negativos: n={n}, k={k}")
    if modo is ModoProbabilidade.Q_INFINITO:
        return PmfDimensao.pontual(min(n, k), k)
    _validar_ordem(q)
    return PmfDimensao(_massas_span(n, k, q))


@lru_cache(maxsize=None)
def _massas_uniao(y: int, m: int, k: int, q: int) -> tuple[Fraction, ...]:
    total = binomial_gaussiano(k, m, q)
    massas = [Fraction(0)] * (k + 1)
    for s in range(max(y, m), min(k, y + m) + 1):
        contagem = (
            q ** ((s - m) * (s - y))
            * binomial_gaussiano(k - y, s - y, q)
            * binomial_gaussiano(y, y + m - s, q)
        )
        massas[s] = Fraction(contagem, total)
    return tuple(massas)


def passo_dimensao_uniao(
    y: int, m: int, k: int, q: int, modo: ModoProbabilidade = ModoProbabilidade.EXATO
) -> PmfDimensao:
    """
    Lei de dim(U + W) com dim U = y fixo e W uniforme entre os subespaços de dimensão m
    de um ambiente de dimensão k. Só a uniformidade de W é necessária.
    """
    if min(y, m, k) < 0 or y > k or m > k:
        raise ErroDominio(f"Dimensões inválidas para a união: y={y}, m={m}, k={k}")
    if modo is ModoProbabilidade.Q_INFINITO:
        return PmfDimensao.pontual(min(k, y + m), k)
    _validar_ordem(q)
    return PmfDimensao(_massas_uniao(y, m, k, q))


def pmf_dimensao_uniao_multipla(
    sorteios: Sequence[tuple[int, int]],
    k: int,
    q: int,
    modo: ModoProbabilidade = ModoProbabilidade.EXATO,
) -> PmfDimensao:
    """
    Lei de dim(S_1 + ... + S_R), onde S_i é o span de N_i vetores uniformes de um
    subespaço uniforme de dimensão m_i. Encadeia span e união entrada a entrada.
    """
    atual: dict[int, Fraction] = {0: Fraction(1)}
    for n_i, m_i in sorteios:
        if m_i > k or m_i < 0:
            raise ErroDominio(f"Subespaço de dimensão {m_i} fora do ambiente {k}")
        lei_span = pmf_dimensao_span(n_i, m_i, q, modo)
        proximo: dict[int, Fraction] = defaultdict(Fraction)
        for y, p_y in atual.items():
            for d, p_d in lei_span.itens():
                for s, p_s in passo_dimensao_uniao(y, d, k, q, modo).itens():
                    proximo[s] += p_y * p_d * p_s
        atual = dict(proximo)
    massas = [Fraction(0)] * (k + 1)
    for s, p in atual.items():
        massas[s] = p
    return PmfDimensao(tuple(massas))


# --- Vetores de postos ---


def validar_vetor_posto(postos: Sequence[int], betas: Sequence[int]) -> VetorPosto:
    """Checa 0 <= r_1 <= ... <= r_L e r_l <= beta_l."""
    postos = tuple(int(r) for r in postos)
    if len(postos) != len(betas):
        raise ErroDominio(f"Vetor de postos {postos} com {len(postos)} níveis; esperado {len(betas)}")
    anterior = 0
    for r, beta in zip(postos, betas):
        if r < anterior or r > beta:
            raise ErroDominio(f"Vetor de postos inválido {postos} para betas {tuple(betas)}")
        anterior = r
    return postos


def nivel_decodificavel(postos: Sequence[int], betas: Sequence[int]) -> int:
    """Maior l com r_l = beta_l (0 se nenhum)."""
    nivel = 0
    for l, (r, beta) in enumerate(zip(postos, betas), start=1):
        if r == beta:
            nivel = l
    return nivel


def _validar_chegadas(chegadas: Sequence[int], camadas: int) -> tuple[int, ...]:
    chegadas = tuple(int(z) for z in chegadas)
    if len(chegadas) != camadas or any(z < 0 for z in chegadas):
        raise ErroDominio(f"Chegadas inválidas {chegadas} para {camadas} classes")
    return chegadas


def _cadeia_postos(
    postos: VetorPosto,
    chegadas: tuple[int, ...],
    betas: tuple[int, ...],
    q: int,
    modo: ModoProbabilidade,
) -> dict[VetorPosto, Fraction]:
    # Lei conjunta dos prefixos (r'_1, ..., r'_l), classe a classe em ordem crescente.
    prefixos: dict[VetorPosto, Fraction] = {(): Fraction(1)}
    r_anterior = 0
    for nivel, (beta, r, z) in enumerate(zip(betas, postos, chegadas)):
        proximos: dict[VetorPosto, Fraction] = defaultdict(Fraction)
        lei_span = pmf_dimensao_span(z, beta, q, modo)
        for prefixo, p_prefixo in prefixos.items():
            c_anterior = prefixo[-1] if prefixo else 0
            # R'_{l-1} + R_l, no quociente por R_{l-1}
            juncao = passo_dimensao_uniao(
                c_anterior - r_anterior, r - r_anterior, beta - r_anterior, q, modo
            )
            for y_rel, p_y in juncao.itens():
                y = y_rel + r_anterior
                for d, p_d in lei_span.itens():
                    for c, p_c in passo_dimensao_uniao(y, d, beta, q, modo).itens():
                        proximos[prefixo + (c,)] += p_prefixo * p_y * p_d * p_c
        prefixos = dict(proximos)
        r_anterior = r
        logger.debug("Nível %d: %d prefixos de postos.", nivel + 1, len(prefixos))
    return prefixos


def pmf_transicao_posto(
    postos: Sequence[int],
    chegadas: Sequence[int],
    espec: "EspecGeracao",
    q: int,
    modo: ModoProbabilidade = ModoProbabilidade.EXATO,
) -> dict[VetorPosto, Fraction]:
    """
    Lei conjunta exata do próximo vetor de postos quando chegam z_l pacotes uniformes
    de cada classe l a um buffer com postos `postos`.
    """
    betas = tuple(espec.betas)
    atual = validar_vetor_posto(postos, betas)
    chegadas = _validar_chegadas(chegadas, len(betas))
    if not any(chegadas):
        return {atual: Fraction(1)}
    return dict(_cadeia_postos_cache(atual, chegadas, betas, q, modo))


@lru_cache(maxsize=4096)
def _cadeia_postos_cache(
    postos: VetorPosto,
    chegadas: tuple[int, ...],
    betas: tuple[int, ...],
    q: int,
    modo: ModoProbabilidade,
) -> dict[VetorPosto, Fraction]:
    return _cadeia_postos(postos, chegadas, betas, q, modo)


def pmf_camadas_decodificaveis(
    postos: Sequence[int],
    chegadas: Sequence[int],
    espec: "EspecGeracao",
    q: int,
    modo: ModoProbabilidade = ModoProbabilidade.EXATO,
) -> tuple[Fraction, ...]:
    """Probabilidade de exatamente as primeiras l camadas ficarem decodificáveis, l = 0..L."""
    betas = tuple(espec.betas)
    massas = [Fraction(0)] * (len(betas) + 1)
    for proximo, p in pmf_transicao_posto(postos, chegadas, espec, q, modo).items():
        massas[nivel_decodificavel(proximo, betas)] += p
    return tuple(massas)
