"""
Aprendizado da política de requisições sem modelo: Q-learning com exploração de Boltzmann
e Q-learning com experiência virtual (VE), que a cada U episódios atualiza em lote todos
os pares estado-ação estatisticamente equivalentes ao par observado.
"""

import json
import math
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Protocol

import numpy as np

from prlc_entrega import configuracoes
from prlc_entrega.erros import ErroDominio, ErroImpressaoDigital
from prlc_entrega.logger import configurar_logger_da_aplicacao
from prlc_entrega.planejador_mdp import (
    Politica,
    ProcessoDecisao,
    pmf_transicao_exata,
    politica_de_indices,
)

logger = configurar_logger_da_aplicacao(__name__)


class Ambiente(Protocol):
    """Ambiente de treino: ruído sorteado por episódio e transição determinística dado o ruído."""

    processo: ProcessoDecisao

    def sortear_ruido(self, rng: np.random.Generator) -> Any: ...

    def transitar(self, s: int, a: int, ruido: Any) -> tuple[int, float]: ...


# --- Tabela Q e esquema de temperatura ---


@dataclass
class TabelaQ:
    """Valores Q (S×A) e contadores de visita; começa zerada."""

    valores: np.ndarray
    visitas: np.ndarray

    @classmethod
    def zerada(cls, estados: int, acoes: int) -> "TabelaQ":
        return cls(np.zeros((estados, acoes)), np.zeros((estados, acoes), dtype=np.int64))

    def taxa(self, s: int, a: int) -> float:
        """λ = 1/(1 + N_v)."""
        return 1.0 / (1.0 + self.visitas[s, a])

    def atualizar_lote(self, estados: np.ndarray, acoes: np.ndarray, alvo: float) -> None:
        """Incrementa as visitas e aplica a média com λ = 1/(1 + N_v) a vários pares."""
        if estados.size == 0:
            return
        self.visitas[estados, acoes] += 1
        taxas = 1.0 / (1.0 + self.visitas[estados, acoes])
        self.valores[estados, acoes] = (1.0 - taxas) * self.valores[estados, acoes] + taxas * alvo


@dataclass(frozen=True)
class EsquemaTemperatura:
    """Θ(n) = Θmin + φ·(Θ(n−1) − Θmin), Θ(0) = Θmax."""

    maxima: float = configuracoes.TEMPERATURA_MAXIMA
    minima: float = configuracoes.TEMPERATURA_MINIMA
    phi: float = 0.99996

    def __post_init__(self) -> None:
        if not 0 < self.minima <= self.maxima:
            raise ErroDominio(f"Temperaturas inválidas: max={self.maxima}, min={self.minima}")
        if not 0 < self.phi <= 1:
            raise ErroDominio(f"Decaimento φ fora de (0, 1]: {self.phi}")

    def proxima(self, temperatura: float) -> float:
        return self.minima + self.phi * (temperatura - self.minima)

    def temperatura(self, n: int) -> float:
        return self.minima + self.phi**n * (self.maxima - self.minima)


@dataclass(frozen=True)
class ConfigTreino:
    episodios: int
    periodo_atualizacao: int | None = None
    semente: int = configuracoes.SEMENTE_PADRAO
    recompensa_realizada: bool = False
    janela_curva: int = configuracoes.JANELA_CURVA_APRENDIZADO

    def __post_init__(self) -> None:
        if self.episodios < 1:
            raise ErroDominio(f"Número de episódios deve ser positivo: {self.episodios}")
        if self.periodo_atualizacao is not None and self.periodo_atualizacao < 1:
            raise ErroDominio(f"Período de atualização deve ser >= 1: {self.periodo_atualizacao}")
        if self.janela_curva < 1:
            raise ErroDominio(f"Janela da curva deve ser positiva: {self.janela_curva}")


def interpolar_phi(episodios: int, pontos: Mapping[int, float]) -> float:
    """
    φ para um número de episódios sem valor conhecido: 1 − φ segue uma lei de potência em
    N entre os pontos conhecidos (extrapolação pelo segmento mais próximo). Com um único
    ponto, (1 − φ)·N é mantido constante.
    """
    if episodios < 1:
        raise ErroDominio(f"Número de episódios deve ser positivo: {episodios}")
    if not pontos:
        raise ErroDominio("Nenhum par (episódios, φ) conhecido")
    if episodios in pontos:
        return float(pontos[episodios])
    conhecidos = sorted((int(n), float(p)) for n, p in pontos.items())
    if any(not 0 < p < 1 for _, p in conhecidos):
        raise ErroDominio("Valores de φ conhecidos devem estar em (0, 1)")
    if len(conhecidos) == 1:
        n0, p0 = conhecidos[0]
        return _phi_valido(1.0 - (1.0 - p0) * n0 / episodios, episodios)

    if episodios < conhecidos[0][0]:
        (n0, p0), (n1, p1) = conhecidos[0], conhecidos[1]
    elif episodios > conhecidos[-1][0]:
        (n0, p0), (n1, p1) = conhecidos[-2], conhecidos[-1]
    else:
        i = next(i for i, (n, _) in enumerate(conhecidos) if n > episodios)
        (n0, p0), (n1, p1) = conhecidos[i - 1], conhecidos[i]
    expoente = math.log((1 - p1) / (1 - p0)) / math.log(n1 / n0)
    return _phi_valido(1.0 - (1.0 - p0) * (episodios / n0) ** expoente, episodios)


def _phi_valido(phi: float, episodios: int) -> float:
    # extrapolar para poucos episódios pode levar 1 − φ acima de 1
    if not 0.0 < phi < 1.0:
        raise ErroDominio(
            f"φ extrapolado para {episodios} episódios fica fora de (0, 1): {phi:.6g}; "
            "informe φ explicitamente para esse número de episódios"
        )
    return phi


# --- Seleção e atualização ---


def selecionar_boltzmann(linha_q: np.ndarray, temperatura: float, rng: np.random.Generator) -> int:
    """Sorteia a com probabilidade exp(Q(s,a)/Θ) / Σ_b exp(Q(s,b)/Θ)."""
    if not temperatura > 0:
        raise ErroDominio(f"Temperatura deve ser positiva: {temperatura}")
    linha = np.asarray(linha_q, dtype=float)
    if linha.size == 0 or not np.all(np.isfinite(linha)):
        raise ErroDominio("Linha Q vazia ou com valores não finitos")
    pesos = np.exp((linha - linha.max()) / temperatura)
    acumulado = np.cumsum(pesos)
    indice = int(np.searchsorted(acumulado, rng.random() * acumulado[-1], side="right"))
    return min(indice, linha.size - 1)


def probabilidades_boltzmann(linha_q: np.ndarray, temperatura: float) -> np.ndarray:
    if not temperatura > 0:
        raise ErroDominio(f"Temperatura deve ser positiva: {temperatura}")
    linha = np.asarray(linha_q, dtype=float)
    pesos = np.exp((linha - linha.max()) / temperatura)
    return pesos / pesos.sum()


def atualizar_q(
    tabela: TabelaQ,
    s: int,
    a: int,
    recompensa: float,
    s_proximo: int,
    desconto: float,
    validas_proximo: np.ndarray | None = None,
) -> TabelaQ:
    """
    Q(s,a) ← (1−λ)·Q(s,a) + λ·(r + γ·max Q(s',·)), com N_v incrementado antes de
    calcular λ = 1/(1 + N_v).
    """
    linha = tabela.valores[s_proximo] if validas_proximo is None else tabela.valores[s_proximo, validas_proximo]
    alvo = recompensa + desconto * float(linha.max())
    tabela.visitas[s, a] += 1
    taxa = tabela.taxa(s, a)
    tabela.valores[s, a] = (1.0 - taxa) * tabela.valores[s, a] + taxa * alvo
    return tabela


def politica_gulosa(processo: ProcessoDecisao, tabela: TabelaQ) -> Politica:
    """argmax de Q entre as ações válidas de cada estado (empate: menor índice)."""
    q = np.where(processo.mascara, tabela.valores, -np.inf)
    escolhas = np.argmax(q, axis=1)
    return politica_de_indices(processo, escolhas, q.max(axis=1))


# --- Classes de equivalência ---


@dataclass
class ClassesEquivalencia:
    """
    Partição dos pares válidos (s, a) pela chave (sub-vetor da geração seguinte, J exato).
    Só depende do modelo.
    """

    classe_do_par: np.ndarray
    membros: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def equivalentes(self, s: int, a: int) -> tuple[np.ndarray, np.ndarray]:
        estados, acoes = self.membros[self.classe_do_par[s, a]]
        return estados, acoes

    def equivalentes_sem_observado(self, s: int, a: int) -> tuple[np.ndarray, np.ndarray]:
        estados, acoes = self.equivalentes(s, a)
        fora = ~((estados == s) & (acoes == a))
        return estados[fora], acoes[fora]


def calcular_classes_equivalencia(processo: ProcessoDecisao) -> ClassesEquivalencia:
    indices: dict[tuple, int] = {}
    pares: dict[int, list[tuple[int, int]]] = defaultdict(list)
    classe_do_par = np.full(processo.mascara.shape, -1, dtype=np.int64)
    chaves_transicao = [processo.chave_transicao(a) for a in range(len(processo.acoes))]
    for s in range(len(processo.estados)):
        for a in processo.acoes_validas(s):
            chave = (chaves_transicao[a], processo.recompensa_exata(s, int(a)))
            classe = indices.setdefault(chave, len(indices))
            classe_do_par[s, a] = classe
            pares[classe].append((s, int(a)))
    membros = [
        (np.array([p[0] for p in pares[c]], dtype=np.int64), np.array([p[1] for p in pares[c]], dtype=np.int64))
        for c in range(len(indices))
    ]
    logger.info("Classes de equivalência: %d classes para %d pares.", len(membros), int(processo.mascara.sum()))
    return ClassesEquivalencia(classe_do_par, membros)


def atualizar_equivalentes(
    tabela: TabelaQ,
    classes: ClassesEquivalencia,
    s: int,
    a: int,
    recompensa: float,
    s_proximo: int,
    desconto: float,
    validas_proximo: np.ndarray | None = None,
) -> int:
    """
    Atualiza os pares virtuais da classe de (s, a), exceto o próprio par, com o alvo
    r + γ·max Q(s',·) lido depois da atualização do par observado. Devolve quantos pares
    foram atualizados.
    """
    linha = tabela.valores[s_proximo] if validas_proximo is None else tabela.valores[s_proximo, validas_proximo]
    alvo = recompensa + desconto * float(linha.max())
    estados, acoes = classes.equivalentes_sem_observado(s, a)
    tabela.atualizar_lote(estados, acoes, alvo)
    return len(estados)


def pares_equivalentes(
    processo: ProcessoDecisao, s: int, a: int, classes: ClassesEquivalencia | None = None
) -> list[tuple[int, int]]:
    """Pares com a mesma lei de transição e a mesma recompensa esperada de (s, a)."""
    classes = classes or calcular_classes_equivalencia(processo)
    estados, acoes = classes.equivalentes(s, a)
    return [(int(x), int(y)) for x, y in zip(estados, acoes)]


def pares_equivalentes_varredura(processo: ProcessoDecisao, s: int, a: int) -> list[tuple[int, int]]:
    """Varredura ingênua de todos os pares, comparando transições e recompensas exatas."""
    referencia_transicao = pmf_transicao_exata(processo.acoes[a], processo.modelo)
    referencia_recompensa: Fraction = processo.recompensa_exata(s, a)
    encontrados = []
    for s_bar in range(len(processo.estados)):
        for a_bar in processo.acoes_validas(s_bar):
            a_bar = int(a_bar)
            if pmf_transicao_exata(processo.acoes[a_bar], processo.modelo) != referencia_transicao:
                continue
            # mesmo padrão de perdas só leva ao mesmo próximo estado com o mesmo sub-vetor
            if processo.chave_transicao(a_bar) != processo.chave_transicao(a):
                continue
            if processo.recompensa_exata(s_bar, a_bar) == referencia_recompensa:
                encontrados.append((s_bar, a_bar))
    return encontrados


# --- Treino ---


@dataclass
class ResultadoTreino:
    algoritmo: str
    tabela: TabelaQ
    politica: Politica
    episodios: int
    temperatura: float
    estado_atual: int
    gerador: dict
    curva: list[dict] = field(default_factory=list)


@dataclass(frozen=True)
class Retomada:
    """Ponto de retomada lido de um checkpoint."""

    algoritmo: str
    episodios: int
    temperatura: float
    estado_atual: int
    gerador: dict
    tabela: TabelaQ


def _treinar(
    ambiente: Ambiente,
    config: ConfigTreino,
    esquema: EsquemaTemperatura,
    classes: ClassesEquivalencia | None,
    algoritmo: str,
    retomada: Retomada | None,
) -> ResultadoTreino:
    processo = ambiente.processo
    desconto = processo.modelo.desconto
    validas = [processo.acoes_validas(s) for s in range(len(processo.estados))]
    rng = np.random.default_rng(config.semente)

    if retomada is not None:
        if retomada.algoritmo != algoritmo:
            raise ErroDominio(f"Checkpoint de {retomada.algoritmo} não retoma {algoritmo}")
        tabela = TabelaQ(retomada.tabela.valores.copy(), retomada.tabela.visitas.copy())
        rng.bit_generator.state = retomada.gerador
        inicio, temperatura, s = retomada.episodios, retomada.temperatura, retomada.estado_atual
    else:
        tabela = TabelaQ.zerada(*processo.mascara.shape)
        # Θ(0) = Θmax; cada episódio atualiza Θ antes de escolher a ação
        inicio, temperatura, s = 0, esquema.maxima, processo.estado_vazio

    periodo = config.periodo_atualizacao if classes is not None else None
    curva: list[dict] = []
    soma_janela = 0.0
    logger.info("Treinando %s: episódios %d..%d.", algoritmo, inicio + 1, config.episodios)

    for episodio in range(inicio + 1, config.episodios + 1):
        temperatura = esquema.proxima(temperatura)
        a = int(validas[s][selecionar_boltzmann(tabela.valores[s, validas[s]], temperatura, rng)])
        ruido = ambiente.sortear_ruido(rng)
        s_proximo, recompensa = ambiente.transitar(s, a, ruido)
        atualizar_q(tabela, s, a, recompensa, s_proximo, desconto, validas[s_proximo])

        if periodo is not None and episodio % periodo == 0:
            atualizar_equivalentes(tabela, classes, s, a, recompensa, s_proximo, desconto, validas[s_proximo])

        soma_janela += recompensa
        if episodio % config.janela_curva == 0:
            curva.append(
                {
                    "episodio": episodio,
                    "recompensa_media": soma_janela / config.janela_curva,
                    "temperatura": temperatura,
                }
            )
            soma_janela = 0.0
        if episodio % max(1, config.episodios // 10) == 0:
            logger.debug("Episódio %d, Θ=%.4f.", episodio, temperatura)

        s = s_proximo

    politica = politica_gulosa(processo, tabela)
    logger.info("Treino %s concluído (%d episódios).", algoritmo, config.episodios)
    return ResultadoTreino(
        algoritmo=algoritmo,
        tabela=tabela,
        politica=politica,
        episodios=config.episodios,
        temperatura=temperatura,
        estado_atual=s,
        gerador=rng.bit_generator.state,
        curva=curva,
    )


def treinar_q_learning(
    ambiente: Ambiente,
    config: ConfigTreino,
    esquema: EsquemaTemperatura,
    retomada: Retomada | None = None,
) -> ResultadoTreino:
    return _treinar(ambiente, config, esquema, None, "qlearn", retomada)


def treinar_q_learning_ve(
    ambiente: Ambiente,
    config: ConfigTreino,
    esquema: EsquemaTemperatura,
    classes: ClassesEquivalencia | None = None,
    retomada: Retomada | None = None,
) -> ResultadoTreino:
    """Q-learning com atualização virtual em lote a cada `periodo_atualizacao` episódios."""
    classes = classes or calcular_classes_equivalencia(ambiente.processo)
    return _treinar(ambiente, config, esquema, classes, "qlearn-ve", retomada)


# --- Checkpoint ---


def salvar_checkpoint(resultado: ResultadoTreino, caminho: Path) -> Path:
    """JSON com impressão digital, episódios, temperatura, gerador, visitas e valores."""
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    dados = {
        "versao": 1,
        "algoritmo": resultado.algoritmo,
        "impressao_digital": resultado.politica.impressao_digital,
        "episodios": resultado.episodios,
        "temperatura": resultado.temperatura,
        "estado_atual": resultado.estado_atual,
        "gerador": resultado.gerador,
        "visitas": resultado.tabela.visitas.tolist(),
        "valores": resultado.tabela.valores.tolist(),
    }
    caminho.write_text(json.dumps(dados), encoding="utf-8")
    logger.info("Checkpoint salvo em: %s", caminho)
    return caminho


def carregar_checkpoint(caminho: Path, processo: ProcessoDecisao) -> Retomada:
    dados = json.loads(Path(caminho).read_text(encoding="utf-8"))
    if dados.get("impressao_digital") != processo.modelo.impressao_digital():
        raise ErroImpressaoDigital("checkpoint.impressao_digital", f"{caminho} foi gerado para outro cenário")
    tabela = TabelaQ(
        np.array(dados["valores"], dtype=float),
        np.array(dados["visitas"], dtype=np.int64),
    )
    if tabela.valores.shape != processo.mascara.shape:
        raise ErroImpressaoDigital("checkpoint.valores", "dimensões incompatíveis com o modelo")
    return Retomada(
        algoritmo=dados["algoritmo"],
        episodios=int(dados["episodios"]),
        temperatura=float(dados["temperatura"]),
        estado_atual=int(dados["estado_atual"]),
        gerador=dados["gerador"],
        tabela=tabela,
    )
