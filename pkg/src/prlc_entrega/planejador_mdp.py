"""
Processo de decisão de Markov do receptor no cenário de gerações rolantes: enumeração de
estados e ações, recompensa esperada, modelo de transição, iteração de valor e extração da
política, além da avaliação analítica de políticas.

No cenário rolante as decisões coincidem com os prazos e a disponibilidade nos servidores
é determinística; o estado reduz-se ao vetor de postos da geração mais urgente.
"""

import hashlib
import json
import math
from collections import defaultdict
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path

import numpy as np

from prlc_entrega import configuracoes
from prlc_entrega.codec_prlc import EspecGeracao
from prlc_entrega.erros import ErroDominio, ErroImpressaoDigital, ErroNumerico
from prlc_entrega.logger import configurar_logger_da_aplicacao
from prlc_entrega.probabilidades_subespaco import (
    ModoProbabilidade,
    VetorPosto,
    nivel_decodificavel,
    pmf_camadas_decodificaveis,
    pmf_transicao_posto,
    validar_vetor_posto,
)

logger = configurar_logger_da_aplicacao(__name__)

VetorRequisicao = tuple[tuple[int, ...], ...]
"""Por servidor, quantidade de pacotes pedidos de cada tipo (deslocamento de geração, classe)."""

_TOLERANCIA_INTEIRO = 1e-9


def _racional(valor: float) -> Fraction:
    return Fraction(str(valor))


# --- Modelo do cenário ---


@dataclass(frozen=True)
class EnlaceModelo:
    """Enlace servidor → receptor: taxa f (pacotes/slot), perda ε e atraso η (slots)."""

    taxa: float
    perda: float
    atraso: float = 0.0

    def __post_init__(self) -> None:
        if not self.taxa > 0:
            raise ErroDominio(f"Taxa do enlace deve ser positiva: {self.taxa}")
        if not 0 <= self.perda < 1:
            raise ErroDominio(f"Probabilidade de perda fora de [0, 1): {self.perda}")
        if self.atraso < 0:
            raise ErroDominio(f"Atraso negativo: {self.atraso}")

    def orcamento(self, periodo: int) -> int:
        """N = f·T, exigido inteiro."""
        bruto = self.taxa * periodo
        if abs(bruto - round(bruto)) > _TOLERANCIA_INTEIRO:
            raise ErroDominio(f"Orçamento f·T não inteiro: {self.taxa}·{periodo} = {bruto}")
        return int(round(bruto))

    def posicoes_no_prazo(self, periodo: int) -> int:
        """Quantas posições p = 1..N chegam até o fim do intervalo (p/f + η <= T)."""
        return sum(
            1
            for p in range(1, self.orcamento(periodo) + 1)
            if p / self.taxa + self.atraso <= periodo + _TOLERANCIA_INTEIRO
        )


@dataclass(frozen=True)
class ModeloCenario:
    """
    Parâmetros do MDP: enlaces, estrutura da geração, período de decisão T, desconto γ,
    ordem do corpo q, horizonte de gerações requisitáveis e modo de probabilidade.
    """

    enlaces: tuple[EnlaceModelo, ...]
    espec: EspecGeracao
    periodo_decisao: int
    desconto: float
    ordem_corpo: int = configuracoes.ORDEM_CORPO_PADRAO
    horizonte: int = configuracoes.HORIZONTE_PADRAO
    modo: ModoProbabilidade = ModoProbabilidade.EXATO

    def __post_init__(self) -> None:
        object.__setattr__(self, "enlaces", tuple(self.enlaces))
        object.__setattr__(self, "modo", ModoProbabilidade(self.modo))
        if not self.enlaces:
            raise ErroDominio("Cenário sem servidores")
        if not 0 <= self.desconto <= 1:
            raise ErroDominio(f"Desconto fora de [0, 1]: {self.desconto}")
        if self.horizonte != 2:
            raise ErroDominio(f"O modelo rolante usa horizonte 2, recebido {self.horizonte}")
        if self.periodo_decisao != self.espec.duracao_geracao:
            raise ErroDominio(
                f"Período de decisão T={self.periodo_decisao} difere de DG={self.espec.duracao_geracao}"
            )
        if self.espec.atraso_reproducao < 2 * self.espec.duracao_geracao:
            raise ErroDominio(
                f"D0={self.espec.atraso_reproducao} < 2·DG: a próxima geração não estaria disponível"
            )
        if self.ordem_corpo < 2:
            raise ErroDominio(f"Ordem do corpo inválida: {self.ordem_corpo}")
        for enlace in self.enlaces:
            enlace.orcamento(self.periodo_decisao)

    @property
    def orcamentos(self) -> tuple[int, ...]:
        return tuple(e.orcamento(self.periodo_decisao) for e in self.enlaces)

    @property
    def tipos(self) -> tuple[tuple[int, int], ...]:
        """Tipos de pacote (deslocamento, classe), urgente primeiro e classe crescente."""
        return tuple(
            (m, l) for m in range(self.horizonte) for l in range(1, self.espec.camadas + 1)
        )

    def instante_decisao(self, n: int) -> int:
        """t_n = D0 − DG + n·T."""
        return self.espec.atraso_reproducao - self.espec.duracao_geracao + n * self.periodo_decisao

    def impressao_digital(self) -> str:
        """SHA-256 dos parâmetros que fixam estados, ações, transições e recompensas (γ fica de fora)."""
        conteudo = {
            "alfas": list(self.espec.alfas),
            "deltas": [repr(d) for d in self.espec.deltas],
            "atraso_reproducao": self.espec.atraso_reproducao,
            "duracao_geracao": self.espec.duracao_geracao,
            "enlaces": [[repr(e.taxa), repr(e.perda), repr(e.atraso)] for e in self.enlaces],
            "periodo_decisao": self.periodo_decisao,
            "ordem_corpo": self.ordem_corpo,
            "horizonte": self.horizonte,
            "modo": str(self.modo),
        }
        texto = json.dumps(conteudo, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(texto.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EstadoGeral:
    """
    Estado completo de decisão: gerações nos buffers dos servidores, vetores de postos do
    receptor por geração ativa e tempo τ até o próximo prazo. Só a redução ao vetor de
    postos da geração urgente é resolvida.
    """

    buffers_servidores: tuple[frozenset[int], ...]
    postos_receptor: tuple[tuple[int, VetorPosto], ...]
    tempo_ate_prazo: int

    def reduzido(self) -> VetorPosto:
        if not self.postos_receptor:
            raise ErroDominio("Estado sem gerações ativas no receptor")
        return min(self.postos_receptor)[1]


# --- Estados ---


def postos_para_contagens(postos: Sequence[int]) -> tuple[int, ...]:
    """Vetor de postos cumulativos → linhas por classe (convenção das tabelas de estados)."""
    return tuple(r - anterior for r, anterior in zip(postos, (0, *postos[:-1])))


def contagens_para_postos(contagens: Sequence[int]) -> VetorPosto:
    total, postos = 0, []
    for u in contagens:
        total += u
        postos.append(total)
    return tuple(postos)


def enumerar_estados(espec: EspecGeracao) -> tuple[VetorPosto, ...]:
    """Todos os vetores de postos válidos, em ordem lexicográfica das contagens por classe."""
    betas = espec.betas
    estados: list[VetorPosto] = []

    def recursao(prefixo: tuple[int, ...], total: int) -> None:
        nivel = len(prefixo)
        if nivel == len(betas):
            estados.append(contagens_para_postos(prefixo))
            return
        for u in range(betas[nivel] - total + 1):
            recursao(prefixo + (u,), total + u)

    recursao((), 0)
    return tuple(estados)


def contagem_estados(espec: EspecGeracao) -> int:
    return len(enumerar_estados(espec))


# --- Ações ---


def composicoes(total: int, partes: int) -> Iterator[tuple[int, ...]]:
    """Composições fracas de `total` em `partes`, em ordem lexicográfica decrescente."""
    if partes == 1:
        yield (total,)
        return
    for primeiro in range(total, -1, -1):
        for resto in composicoes(total - primeiro, partes - 1):
            yield (primeiro, *resto)


def enumerar_acoes_globais(modelo: ModeloCenario) -> tuple[VetorRequisicao, ...]:
    """Produto cartesiano das composições por servidor (servidor 1 mais externo)."""
    tipos = len(modelo.tipos)
    por_servidor = [tuple(composicoes(n, tipos)) for n in modelo.orcamentos]
    return tuple(product(*por_servidor))


def acao_valida(estado: VetorPosto, acao: VetorRequisicao, modelo: ModeloCenario) -> bool:
    """Classes urgentes já decodificáveis não podem ser pedidas."""
    decodificadas = nivel_decodificavel(estado, modelo.espec.betas)
    return all(sum(v[:decodificadas]) == 0 for v in acao)


def enumerar_acoes(estado: Sequence[int], modelo: ModeloCenario) -> list[VetorRequisicao]:
    estado = validar_vetor_posto(estado, modelo.espec.betas)
    return [a for a in enumerar_acoes_globais(modelo) if acao_valida(estado, a, modelo)]


def sequencia_canonica(contagens: Sequence[int], modelo: ModeloCenario) -> list[tuple[int, int]]:
    """Pacotes de um servidor na ordem de envio: urgente primeiro, classe crescente."""
    sequencia: list[tuple[int, int]] = []
    for tipo, v in zip(modelo.tipos, contagens):
        sequencia.extend([tipo] * v)
    return sequencia


# --- Chegadas ---


@lru_cache(maxsize=None)
def _pmf_binomial(n: int, perda: Fraction) -> tuple[Fraction, ...]:
    sucesso = 1 - perda
    return tuple(Fraction(math.comb(n, k)) * sucesso**k * perda ** (n - k) for k in range(n + 1))


def _contagens_no_prazo(contagens: Sequence[int], enlace: EnlaceModelo, periodo: int) -> tuple[int, ...]:
    """Corta as posições que chegariam depois do fim do intervalo."""
    restante = enlace.posicoes_no_prazo(periodo)
    cortadas = []
    for v in contagens:
        cortadas.append(min(v, restante))
        restante -= cortadas[-1]
    return tuple(cortadas)


def pmf_chegadas(acao: VetorRequisicao, modelo: ModeloCenario) -> dict[VetorRequisicao, Fraction]:
    """Lei conjunta das contagens chegadas por servidor e tipo (binomiais independentes)."""
    leis_por_servidor = []
    for contagens, enlace in zip(acao, modelo.enlaces):
        efetivas = _contagens_no_prazo(contagens, enlace, modelo.periodo_decisao)
        perda = _racional(enlace.perda)
        lei: dict[tuple[int, ...], Fraction] = {(): Fraction(1)}
        for v_efetivo in efetivas:
            proxima: dict[tuple[int, ...], Fraction] = {}
            for prefixo, p in lei.items():
                for k, p_k in enumerate(_pmf_binomial(v_efetivo, perda)):
                    if p_k:
                        proxima[prefixo + (k,)] = p * p_k
            lei = proxima
        leis_por_servidor.append(lei)

    conjunta: dict[VetorRequisicao, Fraction] = {(): Fraction(1)}
    for lei in leis_por_servidor:
        conjunta = {
            prefixo + (chegadas,): p * p_c
            for prefixo, p in conjunta.items()
            for chegadas, p_c in lei.items()
        }
    return conjunta


@lru_cache(maxsize=None)
def _pmf_chegadas_por_classe(
    parte: tuple[tuple[int, ...], ...], perdas: tuple[Fraction, ...]
) -> dict[tuple[int, ...], Fraction]:
    # Soma sobre servidores das chegadas de cada classe de uma mesma geração.
    camadas = len(parte[0])
    lei: dict[tuple[int, ...], Fraction] = {(0,) * camadas: Fraction(1)}
    for contagens, perda in zip(parte, perdas):
        for l, v in enumerate(contagens):
            if v == 0:
                continue
            proxima: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
            for z, p in lei.items():
                for k, p_k in enumerate(_pmf_binomial(v, perda)):
                    if p_k:
                        novo = z[:l] + (z[l] + k,) + z[l + 1 :]
                        proxima[novo] += p * p_k
            lei = dict(proxima)
    return lei


def _parte_da_geracao(acao: VetorRequisicao, modelo: ModeloCenario, deslocamento: int) -> tuple[tuple[int, ...], ...]:
    """Contagens no prazo de cada servidor para os tipos de uma geração."""
    camadas = modelo.espec.camadas
    inicio = deslocamento * camadas
    return tuple(
        _contagens_no_prazo(v, enlace, modelo.periodo_decisao)[inicio : inicio + camadas]
        for v, enlace in zip(acao, modelo.enlaces)
    )


def _perdas(modelo: ModeloCenario) -> tuple[Fraction, ...]:
    return tuple(_racional(e.perda) for e in modelo.enlaces)


# --- Recompensa e transição ---


def recompensa_exata(estado: Sequence[int], acao: VetorRequisicao, modelo: ModeloCenario) -> Fraction:
    """J(s, a) = Σ_l P_l · Δ_l, em aritmética racional."""
    estado = validar_vetor_posto(estado, modelo.espec.betas)
    return _recompensa_cache(estado, _parte_da_geracao(acao, modelo, 0), modelo)


@lru_cache(maxsize=None)
def _recompensa_cache(
    estado: VetorPosto, parte_urgente: tuple[tuple[int, ...], ...], modelo: ModeloCenario
) -> Fraction:
    distorcoes = (Fraction(0), *(_racional(d) for d in modelo.espec.deltas))
    acumuladas = [sum(distorcoes[: l + 1]) for l in range(len(distorcoes))]
    total = Fraction(0)
    for z, p_z in _pmf_chegadas_por_classe(parte_urgente, _perdas(modelo)).items():
        massas = pmf_camadas_decodificaveis(estado, z, modelo.espec, modelo.ordem_corpo, modelo.modo)
        total += p_z * sum(m * delta for m, delta in zip(massas, acumuladas))
    return total


def recompensa_esperada(estado: Sequence[int], acao: VetorRequisicao, modelo: ModeloCenario) -> float:
    return float(recompensa_exata(estado, acao, modelo))


def pmf_transicao_exata(acao: VetorRequisicao, modelo: ModeloCenario) -> dict[VetorPosto, Fraction]:
    return dict(_transicao_cache(_parte_da_geracao(acao, modelo, 1), modelo))


@lru_cache(maxsize=None)
def _transicao_cache(
    parte_seguinte: tuple[tuple[int, ...], ...], modelo: ModeloCenario
) -> dict[VetorPosto, Fraction]:
    vazio = (0,) * modelo.espec.camadas
    lei: dict[VetorPosto, Fraction] = defaultdict(Fraction)
    for z, p_z in _pmf_chegadas_por_classe(parte_seguinte, _perdas(modelo)).items():
        for proximo, p in pmf_transicao_posto(vazio, z, modelo.espec, modelo.ordem_corpo, modelo.modo).items():
            lei[proximo] += p_z * p
    return dict(lei)


def pmf_transicao(
    estado: Sequence[int], acao: VetorRequisicao, modelo: ModeloCenario
) -> dict[VetorPosto, float]:
    """Lei do próximo estado; no cenário rolante depende só da parte da geração seguinte."""
    validar_vetor_posto(estado, modelo.espec.betas)
    return {s: float(p) for s, p in pmf_transicao_exata(acao, modelo).items()}


# --- Processo construído ---


@dataclass
class ProcessoDecisao:
    """
    MDP enumerado: estados, lista global de ações, máscara de validade (S×A),
    recompensas (S×A) e transições (A×S, independentes do estado).
    """

    modelo: ModeloCenario
    estados: tuple[VetorPosto, ...]
    acoes: tuple[VetorRequisicao, ...]
    mascara: np.ndarray
    recompensas: np.ndarray
    transicoes: np.ndarray
    indice_estado: dict[VetorPosto, int] = field(init=False)
    indice_acao: dict[VetorRequisicao, int] = field(init=False)

    def __post_init__(self) -> None:
        self.indice_estado = {s: i for i, s in enumerate(self.estados)}
        self.indice_acao = {a: i for i, a in enumerate(self.acoes)}

    @property
    def estado_vazio(self) -> int:
        return self.indice_estado[(0,) * self.modelo.espec.camadas]

    def estado(self, postos: Sequence[int]) -> int:
        chave = tuple(int(r) for r in postos)
        if chave not in self.indice_estado:
            raise ErroDominio(f"Estado desconhecido: {chave}")
        return self.indice_estado[chave]

    def acoes_validas(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.mascara[s])

    def recompensa_exata(self, s: int, a: int) -> Fraction:
        return recompensa_exata(self.estados[s], self.acoes[a], self.modelo)

    def chave_transicao(self, a: int) -> tuple[tuple[int, ...], ...]:
        """Sub-vetor da geração seguinte (no prazo) que determina a transição."""
        return _parte_da_geracao(self.acoes[a], self.modelo, 1)


def construir_processo(modelo: ModeloCenario) -> ProcessoDecisao:
    estados = enumerar_estados(modelo.espec)
    acoes = enumerar_acoes_globais(modelo)
    logger.info("Construindo MDP: estados=%d acoes=%d.", len(estados), len(acoes))

    mascara = np.array([[acao_valida(s, a, modelo) for a in acoes] for s in estados], dtype=bool)
    recompensas = np.full((len(estados), len(acoes)), -np.inf)
    for i, s in enumerate(estados):
        for j in np.flatnonzero(mascara[i]):
            recompensas[i, j] = recompensa_esperada(s, acoes[j], modelo)
    if not np.all(np.isfinite(recompensas[mascara])):
        raise ErroNumerico("Recompensa não finita no modelo")

    indice = {s: i for i, s in enumerate(estados)}
    transicoes = np.zeros((len(acoes), len(estados)))
    for j, a in enumerate(acoes):
        for proximo, p in pmf_transicao_exata(a, modelo).items():
            transicoes[j, indice[proximo]] = float(p)
    logger.debug("Recompensas e transições calculadas.")
    return ProcessoDecisao(modelo, estados, acoes, mascara, recompensas, transicoes)


# --- Política ---


@dataclass(frozen=True)
class Politica:
    """Ação escolhida e valor por estado, com a impressão digital do modelo de origem."""

    impressao_digital: str
    estados: tuple[VetorPosto, ...]
    acoes: tuple[VetorRequisicao, ...]
    valores: tuple[float, ...]
    iteracoes: int = 0
    diferencas: tuple[float, ...] = ()
    _indice: dict[VetorPosto, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not len(self.estados) == len(self.acoes) == len(self.valores):
            raise ErroDominio("Política com tamanhos inconsistentes")
        object.__setattr__(self, "_indice", {s: i for i, s in enumerate(self.estados)})

    def acao(self, estado: Sequence[int]) -> VetorRequisicao:
        chave = tuple(int(r) for r in estado)
        if chave not in self._indice:
            raise ErroDominio(f"Estado desconhecido pela política: {chave}")
        return self.acoes[self._indice[chave]]

    def para_dict(self) -> dict:
        return {
            "versao": 1,
            "impressao_digital": self.impressao_digital,
            "convencao_estado": "linhas_por_classe",
            "iteracoes": self.iteracoes,
            "entradas": [
                {
                    "estado": list(postos_para_contagens(s)),
                    "acao": [list(v) for v in a],
                    "valor": v,
                }
                for s, a, v in zip(self.estados, self.acoes, self.valores)
            ],
        }

    @classmethod
    def de_dict(cls, dados: dict) -> "Politica":
        entradas = dados["entradas"]
        return cls(
            impressao_digital=dados["impressao_digital"],
            estados=tuple(contagens_para_postos(e["estado"]) for e in entradas),
            acoes=tuple(tuple(tuple(v) for v in e["acao"]) for e in entradas),
            valores=tuple(float(e["valor"]) for e in entradas),
            iteracoes=int(dados.get("iteracoes", 0)),
        )


def consultar_politica(politica: Politica, estado: Sequence[int]) -> VetorRequisicao:
    return politica.acao(estado)


def politica_de_indices(
    processo: ProcessoDecisao,
    escolhas: np.ndarray,
    valores: np.ndarray,
    iteracoes: int = 0,
    diferencas: Sequence[float] = (),
) -> Politica:
    """Monta a política a partir de um índice de ação por estado."""
    for s, a in enumerate(escolhas):
        if not processo.mascara[s, a]:
            raise ErroDominio(f"Ação {processo.acoes[a]} inválida no estado {processo.estados[s]}")
    return Politica(
        impressao_digital=processo.modelo.impressao_digital(),
        estados=processo.estados,
        acoes=tuple(processo.acoes[int(a)] for a in escolhas),
        valores=tuple(float(v) for v in valores),
        iteracoes=iteracoes,
        diferencas=tuple(diferencas),
    )


def exportar_politica(politica: Politica, caminho: Path) -> Path:
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    caminho.write_text(json.dumps(politica.para_dict(), indent=2), encoding="utf-8")
    logger.info("Política salva em: %s", caminho)
    return caminho


def importar_politica(caminho: Path, modelo: ModeloCenario | None = None) -> Politica:
    """Lê uma política; se `modelo` for dado, a impressão digital precisa coincidir."""
    dados = json.loads(Path(caminho).read_text(encoding="utf-8"))
    politica = Politica.de_dict(dados)
    if modelo is not None and politica.impressao_digital != modelo.impressao_digital():
        raise ErroImpressaoDigital(
            "politica.impressao_digital",
            f"política de {caminho} foi gerada para outro cenário",
        )
    return politica


# --- Iteração de valor ---


def valores_q(processo: ProcessoDecisao, valores: np.ndarray, desconto: float) -> np.ndarray:
    """Q = R + γ·(P·V), com −∞ nas ações inválidas."""
    continuacao = processo.transicoes @ valores
    q = processo.recompensas + desconto * continuacao[np.newaxis, :]
    q[~processo.mascara] = -np.inf
    return q


def iteracao_de_valor(
    processo: ProcessoDecisao,
    limiar: float = configuracoes.LIMIAR_ITERACAO_VALOR,
    max_iteracoes: int = configuracoes.MAX_ITERACOES_VALOR,
) -> Politica:
    """
    Itera o operador de Bellman até a norma do supremo entre valores sucessivos ficar abaixo
    do limiar e extrai a política gulosa (empate: menor índice de ação).
    """
    if not limiar > 0:
        raise ErroDominio(f"Limiar deve ser positivo: {limiar}")
    if not np.all(np.isfinite(processo.recompensas[processo.mascara])):
        raise ErroNumerico("Recompensa não finita no modelo")
    desconto = processo.modelo.desconto
    valores = np.zeros(len(processo.estados))
    diferencas: list[float] = []

    for iteracao in range(1, max_iteracoes + 1):
        novos = valores_q(processo, valores, desconto).max(axis=1)
        diferenca = float(np.max(np.abs(novos - valores)))
        diferencas.append(diferenca)
        valores = novos
        if diferenca < limiar:
            break
    else:
        raise ErroNumerico(
            f"Iteração de valor não convergiu em {max_iteracoes} iterações (diferença {diferencas[-1]:.3e})"
        )

    escolhas = np.argmax(valores_q(processo, valores, desconto), axis=1)
    logger.info("Iteração de valor convergiu em %d iterações (γ=%s).", iteracao, desconto)
    return politica_de_indices(processo, escolhas, valores, iteracao, diferencas)


def planejar(modelo: ModeloCenario, limiar: float = configuracoes.LIMIAR_ITERACAO_VALOR) -> Politica:
    return iteracao_de_valor(construir_processo(modelo), limiar)


# --- Avaliação analítica ---


def matriz_deterministica(processo: ProcessoDecisao, politica: Politica) -> np.ndarray:
    """Política como matriz S×A de probabilidades de escolha."""
    escolha = np.zeros(processo.mascara.shape)
    for s, estado in enumerate(processo.estados):
        acao = politica.acao(estado)
        if acao not in processo.indice_acao:
            raise ErroDominio(f"Ação {acao} não pertence ao modelo")
        escolha[s, processo.indice_acao[acao]] = 1.0
    return escolha


def matriz_uniforme(processo: ProcessoDecisao) -> np.ndarray:
    """Escolha uniforme entre as ações válidas de cada estado."""
    mascara = processo.mascara.astype(float)
    return mascara / mascara.sum(axis=1, keepdims=True)


def desempenho_esperado(processo: ProcessoDecisao, escolha: np.ndarray, geracoes: int) -> np.ndarray:
    """
    Δ esperado de cada uma das `geracoes` primeiras gerações partindo do buffer vazio,
    por propagação exata da distribuição de estados.
    """
    if geracoes < 1:
        raise ErroDominio(f"Número de gerações deve ser positivo: {geracoes}")
    recompensas = np.where(processo.mascara, processo.recompensas, 0.0)
    recompensa_estado = np.sum(escolha * recompensas, axis=1)
    transicao_estado = escolha @ processo.transicoes
    distribuicao = np.zeros(len(processo.estados))
    distribuicao[processo.estado_vazio] = 1.0
    por_geracao = np.empty(geracoes)
    for n in range(geracoes):
        por_geracao[n] = distribuicao @ recompensa_estado
        distribuicao = distribuicao @ transicao_estado
    return por_geracao


def desempenho_estacionario(processo: ProcessoDecisao, escolha: np.ndarray) -> float:
    """Δ médio sob a distribuição estacionária da cadeia induzida pela política."""
    recompensas = np.where(processo.mascara, processo.recompensas, 0.0)
    recompensa_estado = np.sum(escolha * recompensas, axis=1)
    transicao_estado = escolha @ processo.transicoes
    n = len(processo.estados)
    sistema = np.vstack([transicao_estado.T - np.eye(n), np.ones((1, n))])
    lado_direito = np.zeros(n + 1)
    lado_direito[-1] = 1.0
    estacionaria, *_ = np.linalg.lstsq(sistema, lado_direito, rcond=None)
    return float(estacionaria @ recompensa_estado)
