"""
Simulador em tempo discreto da entrega dirigida pelo receptor: sorteio de perdas por
enlace, execução da política a cada período de decisão, prazos de decodificação,
políticas de referência e métricas agregadas sobre várias execuções.
"""

import multiprocessing
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from prlc_entrega import configuracoes
from prlc_entrega.codec_prlc import (
    BufferDecodificacao,
    codificar_pacote,
    gerar_fontes,
    sobrecarga_cabecalho,
)
from prlc_entrega.corpo_finito import EspecCorpo
from prlc_entrega.erros import ErroAutoverificacao, ErroDominio
from prlc_entrega.logger import configurar_logger_da_aplicacao
from prlc_entrega.planejador_mdp import (
    ModeloCenario,
    Politica,
    ProcessoDecisao,
    VetorRequisicao,
    acao_valida,
    enumerar_acoes,
    sequencia_canonica,
)
from prlc_entrega.probabilidades_subespaco import (
    ModoProbabilidade,
    VetorPosto,
    nivel_decodificavel,
    pmf_camadas_decodificaveis,
    pmf_transicao_posto,
)

logger = configurar_logger_da_aplicacao(__name__)

MOTORES = ("codec", "modelo")


# --- Servidores ---


@dataclass(frozen=True)
class MensagemServidor:
    """Mensagem de um servidor ao receptor: mapa de buffer e parâmetros do enlace."""

    servidor: int
    mapa_buffer: frozenset[int]
    taxa: float
    perda: float
    atraso: float


@dataclass(frozen=True)
class EstadoServidor:
    """Disponibilidade determinística: a geração n chega ao servidor em t = DG·n."""

    indice: int
    modelo: ModeloCenario

    def disponivel(self, geracao: int, instante: float) -> bool:
        return geracao >= 0 and self.modelo.espec.duracao_geracao * geracao <= instante

    def mapa_buffer(self, instante: float, geracao_minima: int = 0) -> frozenset[int]:
        ultima = int(instante // self.modelo.espec.duracao_geracao)
        return frozenset(range(max(0, geracao_minima), ultima + 1))

    def mensagem(self, instante: float, geracao_minima: int = 0) -> MensagemServidor:
        enlace = self.modelo.enlaces[self.indice]
        return MensagemServidor(
            self.indice, self.mapa_buffer(instante, geracao_minima), enlace.taxa, enlace.perda, enlace.atraso
        )

    def conferir_pedido(self, geracoes: set[int], instante: float) -> None:
        for geracao in geracoes:
            if not self.disponivel(geracao, instante):
                raise ErroDominio(
                    f"Servidor {self.indice} não tem a geração {geracao} em t={instante}"
                )


# --- Chegadas ---


def sortear_mascaras(modelo: ModeloCenario, rngs_enlaces: list[np.random.Generator]) -> list[np.ndarray]:
    """Por servidor, máscara de N_k posições: True quando o pacote daquela posição chega."""
    return [
        rng.random(n) >= enlace.perda
        for rng, n, enlace in zip(rngs_enlaces, modelo.orcamentos, modelo.enlaces)
    ]


def aplicar_mascaras(
    acao: VetorRequisicao, mascaras: list[np.ndarray], modelo: ModeloCenario
) -> tuple[VetorRequisicao, int]:
    """
    Aplica a máscara de cada servidor à sequência canônica da ação. Devolve as contagens
    chegadas por tipo e quantos pacotes chegariam depois do fim do intervalo.
    """
    tipos = {tipo: i for i, tipo in enumerate(modelo.tipos)}
    chegadas, atrasados = [], 0
    for contagens, mascara, enlace in zip(acao, mascaras, modelo.enlaces):
        no_prazo = enlace.posicoes_no_prazo(modelo.periodo_decisao)
        recebidos = [0] * len(modelo.tipos)
        for posicao, tipo in enumerate(sequencia_canonica(contagens, modelo)):
            if not mascara[posicao]:
                continue
            if posicao >= no_prazo:
                atrasados += 1
                continue
            recebidos[tipos[tipo]] += 1
        chegadas.append(tuple(recebidos))
    return tuple(chegadas), atrasados


def amostrar_chegadas(
    acao: VetorRequisicao, modelo: ModeloCenario, rng: np.random.Generator
) -> VetorRequisicao:
    """Cada pacote pedido se perde independentemente com a probabilidade do seu enlace."""
    rngs = [rng] * len(modelo.enlaces)
    chegadas, _ = aplicar_mascaras(acao, sortear_mascaras(modelo, rngs), modelo)
    return chegadas


def _por_classe(chegadas: VetorRequisicao, modelo: ModeloCenario, deslocamento: int) -> tuple[int, ...]:
    camadas = modelo.espec.camadas
    inicio = deslocamento * camadas
    return tuple(sum(c[inicio + l] for c in chegadas) for l in range(camadas))


def _sortear_da_pmf(pmf: dict, u: float):
    # Ordem determinística das chaves para números aleatórios comuns.
    chaves = sorted(pmf)
    acumulado = np.cumsum([float(pmf[k]) for k in chaves])
    indice = int(np.searchsorted(acumulado, u * acumulado[-1], side="right"))
    return chaves[min(indice, len(chaves) - 1)]


# --- Ambiente de treino ---


@dataclass(frozen=True)
class Ruido:
    mascaras: list[np.ndarray]
    u_transicao: float
    u_recompensa: float


class AmbienteTreinamento:
    """
    Ambiente do cenário rolante para os agentes: a máscara de perdas e os uniformes são
    sorteados por episódio; a transição é determinística dado o ruído.
    """

    def __init__(self, processo: ProcessoDecisao, recompensa_realizada: bool = False) -> None:
        self.processo = processo
        self.modelo = processo.modelo
        self.recompensa_realizada = recompensa_realizada
        self._distorcoes = self.modelo.espec.distorcoes_cumulativas
        self._vazio = (0,) * self.modelo.espec.camadas

    def sortear_ruido(self, rng: np.random.Generator) -> Ruido:
        mascaras = sortear_mascaras(self.modelo, [rng] * len(self.modelo.enlaces))
        return Ruido(mascaras, float(rng.random()), float(rng.random()))

    def transitar(self, s: int, a: int, ruido: Ruido) -> tuple[int, float]:
        modelo = self.modelo
        chegadas, _ = aplicar_mascaras(self.processo.acoes[a], ruido.mascaras, modelo)
        z_seguinte = _por_classe(chegadas, modelo, 1)
        lei = pmf_transicao_posto(self._vazio, z_seguinte, modelo.espec, modelo.ordem_corpo, modelo.modo)
        s_proximo = self.processo.indice_estado[_sortear_da_pmf(lei, ruido.u_transicao)]
        if not self.recompensa_realizada:
            return s_proximo, float(self.processo.recompensas[s, a])
        z_urgente = _por_classe(chegadas, modelo, 0)
        massas = pmf_camadas_decodificaveis(
            self.processo.estados[s], z_urgente, modelo.espec, modelo.ordem_corpo, modelo.modo
        )
        camadas = _sortear_da_pmf(dict(enumerate(massas)), ruido.u_recompensa)
        return s_proximo, self._distorcoes[camadas]


def ambiente_treinamento(processo: ProcessoDecisao, recompensa_realizada: bool = False) -> AmbienteTreinamento:
    return AmbienteTreinamento(processo, recompensa_realizada)


# --- Políticas ---


FontePolitica = Politica | Callable[[VetorPosto, np.random.Generator], VetorRequisicao]


@dataclass
class RandSched:
    """Referência: escolhe uniformemente entre as ações válidas do estado."""

    modelo: ModeloCenario
    _cache: dict[VetorPosto, list[VetorRequisicao]] = field(default_factory=dict, repr=False)

    def __call__(self, estado: VetorPosto, rng: np.random.Generator) -> VetorRequisicao:
        if estado not in self._cache:
            self._cache[estado] = enumerar_acoes(estado, self.modelo)
        acoes = self._cache[estado]
        return acoes[int(rng.integers(len(acoes)))]


def politica_randsched(estado: VetorPosto, modelo: ModeloCenario, rng: np.random.Generator) -> VetorRequisicao:
    return RandSched(modelo)(tuple(estado), rng)


def _escolher(fonte: FontePolitica, estado: VetorPosto, rng: np.random.Generator) -> VetorRequisicao:
    if isinstance(fonte, Politica):
        return fonte.acao(estado)
    return fonte(estado, rng)


# --- Episódio ---


@dataclass(frozen=True)
class RegistroDecisao:
    geracao: int
    instante: int
    estado: VetorPosto
    acao: VetorRequisicao
    chegadas: VetorRequisicao


@dataclass
class TracoEpisodio:
    """Resultado por geração (camadas decodificadas e Δ) e registro das decisões."""

    camadas: list[int] = field(default_factory=list)
    distorcoes: list[float] = field(default_factory=list)
    decisoes: list[RegistroDecisao] = field(default_factory=list)
    pacotes_enviados: int = 0
    pacotes_recebidos: int = 0
    atrasados: int = 0
    obsoletos: int = 0
    bytes_cabecalho: int = 0

    @property
    def media(self) -> float:
        return float(np.mean(self.distorcoes)) if self.distorcoes else 0.0

    @property
    def flutuacao(self) -> float:
        """Desvio-padrão do Δ por geração."""
        return float(np.std(self.distorcoes)) if self.distorcoes else 0.0

    @property
    def geracoes_sem_base(self) -> int:
        return sum(1 for l in self.camadas if l == 0)


@dataclass
class _Geradores:
    enlaces: list[np.random.Generator]
    codificacao: np.random.Generator
    politica: np.random.Generator
    modelo: np.random.Generator

    @classmethod
    def de_semente(cls, semente: np.random.SeedSequence, servidores: int) -> "_Geradores":
        filhos = semente.spawn(servidores + 3)
        return cls(
            enlaces=[np.random.default_rng(s) for s in filhos[:servidores]],
            codificacao=np.random.default_rng(filhos[servidores]),
            politica=np.random.default_rng(filhos[servidores + 1]),
            modelo=np.random.default_rng(filhos[servidores + 2]),
        )


def _validar_acao(acao: VetorRequisicao, estado: VetorPosto, modelo: ModeloCenario) -> None:
    if len(acao) != len(modelo.enlaces) or any(
        len(v) != len(modelo.tipos) or sum(v) != n for v, n in zip(acao, modelo.orcamentos)
    ):
        raise ErroDominio(f"Ação {acao} incompatível com os orçamentos {modelo.orcamentos}")
    if not acao_valida(estado, acao, modelo):
        raise ErroDominio(f"Ação {acao} pede classes já decodificáveis no estado {estado}")


def executar_episodio(
    fonte: FontePolitica,
    modelo: ModeloCenario,
    geracoes: int,
    semente: int | np.random.SeedSequence,
    motor: str = "codec",
    tamanho_carga: int = configuracoes.TAMANHO_CARGA_PADRAO,
    autoverificacao: bool = False,
    despejo: BinaryIO | None = None,
) -> TracoEpisodio:
    """
    Executa `geracoes` períodos de decisão. Em t_n o receptor observa o vetor de postos da
    geração n, pede pacotes das gerações n e n+1, e no prazo D_n registra as camadas
    decodificáveis da geração n, que então expira.

    motor="codec" passa cada pacote pela codificação real em GF(q); motor="modelo" sorteia
    os vetores de postos das leis exatas (aceita o modo q-infinito).
    """
    if motor not in MOTORES:
        raise ErroDominio(f"Motor desconhecido: {motor}")
    if geracoes < 1:
        raise ErroDominio(f"Número de gerações deve ser positivo: {geracoes}")
    if motor == "codec" and modelo.modo is ModoProbabilidade.Q_INFINITO:
        raise ErroDominio("O motor codec exige corpo finito; use motor='modelo' no modo q-infinito")
    sequencia = semente if isinstance(semente, np.random.SeedSequence) else np.random.SeedSequence(semente)
    geradores = _Geradores.de_semente(sequencia, len(modelo.enlaces))
    espec = modelo.espec
    servidores = [EstadoServidor(k, modelo) for k in range(len(modelo.enlaces))]
    distorcoes = espec.distorcoes_cumulativas
    traco = TracoEpisodio()

    if motor == "codec":
        espec_corpo = EspecCorpo(modelo.ordem_corpo)
        buffer = BufferDecodificacao(espec, espec_corpo)
        fontes: dict = {}
        cabecalho = sobrecarga_cabecalho(espec, espec_corpo)
    postos: dict[int, VetorPosto] = {}
    vazio = (0,) * espec.camadas

    def postos_de(geracao: int) -> VetorPosto:
        if motor == "codec":
            return buffer.vetor_posto(geracao)
        return postos.get(geracao, vazio)

    for n in range(geracoes):
        instante = modelo.instante_decisao(n)
        estado = postos_de(n)
        acao = _escolher(fonte, estado, geradores.politica)
        _validar_acao(acao, estado, modelo)
        pedidas = {n + m for v in acao for m, _ in sequencia_canonica(v, modelo)}
        for servidor in servidores:
            servidor.conferir_pedido(pedidas, instante)

        mascaras = sortear_mascaras(modelo, geradores.enlaces)
        chegadas, atrasados = aplicar_mascaras(acao, mascaras, modelo)
        traco.pacotes_enviados += sum(modelo.orcamentos)
        traco.atrasados += atrasados
        traco.decisoes.append(RegistroDecisao(n, instante, estado, acao, chegadas))

        if motor == "codec":
            chegados = []
            for k, (v, mascara) in enumerate(zip(acao, mascaras)):
                enlace = modelo.enlaces[k]
                no_prazo = enlace.posicoes_no_prazo(modelo.periodo_decisao)
                for posicao, (m, classe) in enumerate(sequencia_canonica(v, modelo)):
                    if mascara[posicao]:
                        chegada = (posicao + 1) / enlace.taxa + enlace.atraso
                        chegados.append((chegada, k, posicao >= no_prazo, n + m, classe))
            tardios = []
            for _, _, tardio, geracao, classe in sorted(chegados, key=lambda c: (c[0], c[1])):
                if geracao not in fontes:
                    fontes[geracao] = gerar_fontes(espec, espec_corpo, geradores.codificacao, tamanho_carga)
                pacote = codificar_pacote(fontes[geracao], geracao, classe, espec, geradores.codificacao)
                traco.bytes_cabecalho += cabecalho
                if tardio:
                    # chegam depois do prazo: só os urgentes ainda alcançam o receptor, já obsoletos
                    if geracao == n:
                        tardios.append(pacote)
                    continue
                traco.pacotes_recebidos += 1
                buffer.receber(pacote)
                if despejo is not None:
                    despejo.write(pacote.para_bytes())
        else:
            traco.pacotes_recebidos += sum(map(sum, chegadas))
            for m in range(modelo.horizonte):
                z = _por_classe(chegadas, modelo, m)
                if any(z):
                    lei = pmf_transicao_posto(postos_de(n + m), z, espec, modelo.ordem_corpo, modelo.modo)
                    postos[n + m] = _sortear_da_pmf(lei, float(geradores.modelo.random()))

        # prazo D_n
        camadas = nivel_decodificavel(postos_de(n), espec.betas)
        traco.camadas.append(camadas)
        traco.distorcoes.append(distorcoes[camadas])
        if motor == "codec":
            if autoverificacao and camadas:
                recuperadas = buffer.decodificar(n, camadas)
                originais = fontes[n][: espec.betas[camadas - 1]]
                if not np.array_equal(recuperadas.view(np.ndarray), originais.view(np.ndarray)):
                    raise ErroAutoverificacao(f"Geração {n}: fontes recuperadas diferem das originais")
            buffer.expirar_ate(n + 1)
            for pacote in tardios:
                buffer.receber(pacote)
            fontes.pop(n, None)
        else:
            postos.pop(n, None)

    if motor == "codec":
        traco.obsoletos = buffer.obsoletos
    logger.debug("Episódio concluído: Δ médio %.4f em %d gerações.", traco.media, geracoes)
    return traco


# --- Experimento ---


@dataclass(frozen=True)
class ConfigExperimento:
    execucoes: int = configuracoes.EXECUCOES_PADRAO
    geracoes: int = configuracoes.GERACOES_PADRAO
    semente: int = configuracoes.SEMENTE_PADRAO
    motor: str = "codec"
    tamanho_carga: int = configuracoes.TAMANHO_CARGA_PADRAO
    processos: int = 1
    autoverificacao: bool = False

    def __post_init__(self) -> None:
        if self.execucoes < 1:
            raise ErroDominio(f"Número de execuções deve ser positivo: {self.execucoes}")
        if self.geracoes < 1:
            raise ErroDominio(f"Número de gerações deve ser positivo: {self.geracoes}")
        if self.motor not in MOTORES:
            raise ErroDominio(f"Motor desconhecido: {self.motor}")
        if self.processos < 1:
            raise ErroDominio(f"Número de processos deve ser positivo: {self.processos}")


@dataclass
class ResumoExperimento:
    """Médias por geração e escalares agregados sobre as execuções."""

    media_por_geracao: np.ndarray
    erro_padrao_por_geracao: np.ndarray
    media: float
    erro_padrao: float
    flutuacao: float
    geracoes_sem_base: float
    atrasados: int
    obsoletos: int
    bytes_cabecalho: int
    medias_execucoes: np.ndarray


def _erro_padrao(valores: np.ndarray, eixo: int = 0) -> np.ndarray:
    n = valores.shape[eixo]
    if n < 2:
        return np.zeros_like(np.take(valores, 0, axis=eixo), dtype=float)
    return np.std(valores, axis=eixo, ddof=1) / np.sqrt(n)


def _executar_execucao(argumentos: tuple) -> TracoEpisodio:
    fonte, modelo, config, semente = argumentos
    return executar_episodio(
        fonte,
        modelo,
        config.geracoes,
        semente,
        motor=config.motor,
        tamanho_carga=config.tamanho_carga,
        autoverificacao=config.autoverificacao,
    )


def resumir_tracos(tracos: list[TracoEpisodio]) -> ResumoExperimento:
    matriz = np.array([t.distorcoes for t in tracos], dtype=float)
    medias = matriz.mean(axis=1)
    return ResumoExperimento(
        media_por_geracao=matriz.mean(axis=0),
        erro_padrao_por_geracao=np.asarray(_erro_padrao(matriz)),
        media=float(medias.mean()),
        erro_padrao=float(_erro_padrao(medias)),
        flutuacao=float(np.mean([t.flutuacao for t in tracos])),
        geracoes_sem_base=float(np.mean([t.geracoes_sem_base for t in tracos])),
        atrasados=sum(t.atrasados for t in tracos),
        obsoletos=sum(t.obsoletos for t in tracos),
        bytes_cabecalho=sum(t.bytes_cabecalho for t in tracos),
        medias_execucoes=medias,
    )


def executar_experimento(fonte: FontePolitica, modelo: ModeloCenario, config: ConfigExperimento) -> ResumoExperimento:
    """
    Repete o episódio `execucoes` vezes com subfluxos derivados da semente mestra; o mesmo
    índice de execução reproduz as mesmas perdas em todos os esquemas comparados.
    """
    sementes = np.random.SeedSequence(config.semente).spawn(config.execucoes)
    argumentos = [(fonte, modelo, config, s) for s in sementes]
    logger.info(
        "Executando %d execuções de %d gerações (motor %s).", config.execucoes, config.geracoes, config.motor
    )
    if config.processos > 1:
        # spawn: processos filhos não herdam os threads do OpenMP do processo pai
        contexto = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=config.processos, mp_context=contexto) as executor:
            tracos = list(executor.map(_executar_execucao, argumentos))
    else:
        tracos = [_executar_execucao(a) for a in argumentos]
    resumo = resumir_tracos(tracos)
    logger.info("Δ médio %.4f dB (erro-padrão %.4f).", resumo.media, resumo.erro_padrao)
    return resumo

