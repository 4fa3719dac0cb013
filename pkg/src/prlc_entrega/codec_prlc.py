"""
Codificação linear aleatória priorizada (PRLC): um pacote de classe l combina apenas as
fontes das camadas 1..l da sua geração. O receptor guarda só pacotes inovadores, ordenados
por classe, e decodifica as primeiras camadas cujo posto cumulativo está completo.
"""

from dataclasses import dataclass, field
from itertools import accumulate

import galois
import numpy as np

from prlc_entrega import configuracoes
from prlc_entrega.corpo_finito import (
    EspecCorpo,
    MatrizCorpo,
    inserir_rref,
    posto_matriz,
    resolver_posto_completo,
)
from prlc_entrega.erros import ErroDominio, ErroPostoDeficiente
from prlc_entrega.logger import configurar_logger_da_aplicacao
from prlc_entrega.probabilidades_subespaco import VetorPosto, nivel_decodificavel

logger = configurar_logger_da_aplicacao(__name__)


@dataclass(frozen=True)
class EspecGeracao:
    """
    Estrutura de uma geração: alfas (pacotes por camada), deltas (redução de distorção
    por camada, em dB), atraso de reprodução D0 e duração da geração DG, em slots.
    """

    alfas: tuple[int, ...]
    deltas: tuple[float, ...]
    atraso_reproducao: int
    duracao_geracao: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "alfas", tuple(int(a) for a in self.alfas))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        if not self.alfas:
            raise ErroDominio("Geração sem camadas")
        if len(self.deltas) != len(self.alfas):
            raise ErroDominio(f"{len(self.deltas)} deltas para {len(self.alfas)} camadas")
        if any(a < 1 for a in self.alfas):
            raise ErroDominio(f"Camada sem pacotes: alfas={self.alfas}")
        if any(d < 0 or not np.isfinite(d) for d in self.deltas):
            raise ErroDominio(f"Deltas devem ser finitos e não negativos: {self.deltas}")
        if self.duracao_geracao < 1 or self.atraso_reproducao < 0:
            raise ErroDominio(
                f"Tempos inválidos: D0={self.atraso_reproducao}, DG={self.duracao_geracao}"
            )

    @property
    def camadas(self) -> int:
        return len(self.alfas)

    @property
    def betas(self) -> tuple[int, ...]:
        return tuple(accumulate(self.alfas))

    @property
    def beta_total(self) -> int:
        return sum(self.alfas)

    @property
    def distorcoes_cumulativas(self) -> tuple[float, ...]:
        """(Δ_0, Δ_1, ..., Δ_L) com Δ_0 = 0."""
        return (0.0, *accumulate(self.deltas))

    def prazo(self, geracao: int) -> int:
        """Prazo de decodificação D_n = D0 + n·DG."""
        return self.atraso_reproducao + geracao * self.duracao_geracao


# --- Pacotes ---


def bytes_por_simbolo(q: int) -> int:
    return 1 if q <= 256 else 2


@dataclass(frozen=True, eq=False)
class Pacote:
    """Pacote codificado: cabeçalho com β_L coeficientes e carga de tamanho fixo."""

    geracao: int
    classe: int
    coeficientes: galois.FieldArray
    carga: galois.FieldArray

    def para_bytes(self) -> bytes:
        """Layout little-endian: u4 geração, u2 classe, coeficientes, carga."""
        tipo = "<u1" if bytes_por_simbolo(type(self.coeficientes).order) == 1 else "<u2"
        return (
            int(self.geracao).to_bytes(4, byteorder="little")
            + int(self.classe).to_bytes(2, byteorder="little")
            + self.coeficientes.view(np.ndarray).astype(tipo).tobytes()
            + self.carga.view(np.ndarray).astype(tipo).tobytes()
        )

    @classmethod
    def de_bytes(cls, dados: bytes, espec_corpo: EspecCorpo, beta_total: int) -> "Pacote":
        tamanho = bytes_por_simbolo(espec_corpo.q)
        tipo = "<u1" if tamanho == 1 else "<u2"
        if len(dados) < 6 + beta_total * tamanho or (len(dados) - 6) % tamanho:
            raise ErroDominio(f"Pacote truncado: {len(dados)} bytes")
        geracao = int.from_bytes(dados[:4], byteorder="little")
        classe = int.from_bytes(dados[4:6], byteorder="little")
        simbolos = np.frombuffer(dados[6:], dtype=tipo).astype(np.int64)
        return cls(
            geracao,
            classe,
            espec_corpo.vetor(simbolos[:beta_total]),
            espec_corpo.vetor(simbolos[beta_total:]),
        )


def sobrecarga_cabecalho(espec: EspecGeracao, espec_corpo: EspecCorpo) -> int:
    """Bytes de cabeçalho de codificação por pacote (β_L símbolos)."""
    return espec.beta_total * bytes_por_simbolo(espec_corpo.q)


def gerar_fontes(
    espec: EspecGeracao,
    espec_corpo: EspecCorpo,
    rng: np.random.Generator,
    tamanho_carga: int = configuracoes.TAMANHO_CARGA_PADRAO,
) -> galois.FieldArray:
    """Pacotes-fonte aleatórios de uma geração (β_L linhas)."""
    return espec_corpo.aleatorio((espec.beta_total, tamanho_carga), rng)


def codificar_pacote(
    fontes: galois.FieldArray,
    geracao: int,
    classe: int,
    espec: EspecGeracao,
    rng: np.random.Generator,
) -> Pacote:
    """Combinação linear uniforme das primeiras β_l fontes da geração."""
    if not 1 <= classe <= espec.camadas:
        raise ErroDominio(f"Classe {classe} fora de 1..{espec.camadas}")
    beta = espec.betas[classe - 1]
    if fontes.ndim != 2 or fontes.shape[0] < beta:
        raise ErroDominio(f"Fontes insuficientes para a classe {classe}: precisa de {beta}")
    GF = type(fontes)
    coeficientes = GF.Zeros(espec.beta_total)
    coeficientes[:beta] = GF.Random(beta, seed=rng)
    carga = (coeficientes[:beta].reshape(1, -1) @ fontes[:beta]).reshape(-1)
    return Pacote(geracao, classe, coeficientes, carga)


# --- Buffer de decodificação ---


def _empilhar(GF: type[galois.FieldArray], linhas: list[galois.FieldArray]) -> galois.FieldArray:
    return GF(np.vstack([linha.view(np.ndarray) for linha in linhas]))


@dataclass
class _MatrizDecodificacao:
    """Linhas inovadoras de uma geração (ordem crescente de classe) e bases por nível."""

    classes: list[int] = field(default_factory=list)
    coeficientes: list[galois.FieldArray] = field(default_factory=list)
    cargas: list[galois.FieldArray] = field(default_factory=list)
    bases: list[MatrizCorpo] = field(default_factory=list)


class BufferDecodificacao:
    """
    Matrizes de decodificação das gerações ativas de um receptor. Dono único: só o
    receptor simulado que o criou altera o buffer.
    """

    def __init__(self, espec: EspecGeracao, espec_corpo: EspecCorpo) -> None:
        self.espec = espec
        self.espec_corpo = espec_corpo
        self.obsoletos = 0
        self._geracao_minima = 0
        self._matrizes: dict[int, _MatrizDecodificacao] = {}

    # --- Consulta ---

    def _matriz(self, geracao: int) -> _MatrizDecodificacao:
        if geracao < self._geracao_minima:
            raise ErroDominio(f"Geração {geracao} já expirou")
        if geracao not in self._matrizes:
            colunas = self.espec.beta_total
            self._matrizes[geracao] = _MatrizDecodificacao(
                bases=[MatrizCorpo.vazia(colunas, self.espec_corpo) for _ in self.espec.betas]
            )
        return self._matrizes[geracao]

    def ativa(self, geracao: int) -> bool:
        return geracao >= self._geracao_minima

    def vetor_posto(self, geracao: int) -> VetorPosto:
        return tuple(base.linhas for base in self._matriz(geracao).bases)

    def linhas_por_classe(self, geracao: int) -> tuple[int, ...]:
        """n_l: quantidade de linhas armazenadas de cada classe."""
        classes = self._matriz(geracao).classes
        return tuple(classes.count(l) for l in range(1, self.espec.camadas + 1))

    def matriz_coeficientes(self, geracao: int) -> MatrizCorpo:
        matriz = self._matriz(geracao)
        if not matriz.coeficientes:
            return MatrizCorpo.vazia(self.espec.beta_total, self.espec_corpo)
        return MatrizCorpo(self.espec_corpo, _empilhar(self.espec_corpo.GF, matriz.coeficientes))

    # --- Atualização ---

    def expirar_ate(self, geracao: int) -> None:
        """Descarta as gerações anteriores a `geracao`; pacotes delas passam a ser obsoletos."""
        if geracao <= self._geracao_minima:
            return
        self._geracao_minima = geracao
        for antiga in [g for g in self._matrizes if g < geracao]:
            del self._matrizes[antiga]

    def _reconstruir_bases(self, matriz: _MatrizDecodificacao, a_partir: int) -> None:
        for nivel in range(a_partir, self.espec.camadas + 1):
            base = MatrizCorpo.vazia(self.espec.beta_total, self.espec_corpo)
            for classe, linha in zip(matriz.classes, matriz.coeficientes):
                if classe <= nivel:
                    base, _ = inserir_rref(base, linha)
            matriz.bases[nivel - 1] = base

    def _linha_participante(self, matriz: _MatrizDecodificacao, vetor: galois.FieldArray, nivel: int) -> int:
        """Índice de uma linha de classe `nivel` com coeficiente não nulo na expressão de vetor."""
        GF = self.espec_corpo.GF
        indices = [i for i, c in enumerate(matriz.classes) if c <= nivel]
        for i in indices:
            if matriz.classes[i] != nivel:
                continue
            restantes = [matriz.coeficientes[j] for j in indices if j != i]
            empilhada = _empilhar(GF, [*restantes, vetor]) if restantes else vetor.reshape(1, -1)
            if posto_matriz(MatrizCorpo(self.espec_corpo, empilhada)) == len(restantes) + 1:
                return i
        raise ErroDominio(f"Nenhuma linha de classe {nivel} participa da combinação")

    def receber(self, pacote: Pacote) -> bool:
        """
        Examina a inovação do pacote. Pacotes inovadores entram na matriz na ordem de
        classe e o vetor de postos é atualizado; os demais são descartados.
        Pacote de geração expirada: devolve False e incrementa `obsoletos`.
        """
        if not self.ativa(pacote.geracao):
            self.obsoletos += 1
            logger.debug("Pacote obsoleto da geração %d descartado.", pacote.geracao)
            return False
        classe = pacote.classe
        if not 1 <= classe <= self.espec.camadas:
            raise ErroDominio(f"Classe {classe} fora de 1..{self.espec.camadas}")
        vetor = pacote.coeficientes
        beta = self.espec.betas[classe - 1]
        if vetor.size != self.espec.beta_total or np.any(vetor[beta:].view(np.ndarray) != 0):
            raise ErroDominio(f"Cabeçalho incompatível com a classe {classe}")

        matriz = self._matriz(pacote.geracao)
        _, inovador = inserir_rref(matriz.bases[classe - 1], vetor)
        if not inovador:
            return False

        # Já contido num nível superior: troca por uma linha daquele nível.
        for nivel in range(classe + 1, self.espec.camadas + 1):
            _, fora = inserir_rref(matriz.bases[nivel - 1], vetor)
            if not fora:
                i = self._linha_participante(matriz, vetor, nivel)
                for lista in (matriz.classes, matriz.coeficientes, matriz.cargas):
                    del lista[i]
                break

        posicao = sum(1 for c in matriz.classes if c <= classe)
        matriz.classes.insert(posicao, classe)
        matriz.coeficientes.insert(posicao, vetor.copy())
        matriz.cargas.insert(posicao, pacote.carga.copy())
        self._reconstruir_bases(matriz, classe)
        return True

    def camadas_decodificaveis(self, geracao: int) -> int:
        return nivel_decodificavel(self.vetor_posto(geracao), self.espec.betas)

    def decodificar(self, geracao: int, camadas: int) -> galois.FieldArray:
        """Fontes das camadas 1..camadas (β_camadas linhas), por eliminação gaussiana."""
        if camadas == 0:
            return self.espec_corpo.zeros((0, 0))
        if not 0 < camadas <= self.espec.camadas:
            raise ErroDominio(f"Camadas {camadas} fora de 0..{self.espec.camadas}")
        postos = self.vetor_posto(geracao)
        beta = self.espec.betas[camadas - 1]
        if postos[camadas - 1] < beta:
            raise ErroPostoDeficiente(
                f"Geração {geracao}: posto {postos[camadas - 1]} < {beta} no nível {camadas}"
            )
        matriz = self._matriz(geracao)
        indices = [i for i, c in enumerate(matriz.classes) if c <= camadas]
        GF = self.espec_corpo.GF
        coeficientes = _empilhar(GF, [matriz.coeficientes[i][:beta] for i in indices])
        cargas = _empilhar(GF, [matriz.cargas[i] for i in indices])
        solucao = resolver_posto_completo(
            MatrizCorpo(self.espec_corpo, coeficientes), MatrizCorpo(self.espec_corpo, cargas)
        )
        return solucao.entradas


# --- Interface funcional ---


def receber_pacote(buffer: BufferDecodificacao, pacote: Pacote) -> tuple[BufferDecodificacao, bool]:
    return buffer, buffer.receber(pacote)


def camadas_decodificaveis(buffer: BufferDecodificacao, geracao: int) -> int:
    return buffer.camadas_decodificaveis(geracao)


def decodificar_geracao(buffer: BufferDecodificacao, geracao: int, camadas: int) -> galois.FieldArray:
    return buffer.decodificar(geracao, camadas)
