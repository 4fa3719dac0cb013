"""
Leitura e validação dos arquivos de cenário (TOML, `versao_esquema = 1`).
Chaves desconhecidas são rejeitadas e todo erro nomeia o caminho do campo.
"""

import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from prlc_entrega import configuracoes
from prlc_entrega.codec_prlc import EspecGeracao
from prlc_entrega.corpo_finito import EspecCorpo
from prlc_entrega.erros import ErroDominio, ErroValidacaoConfiguracao
from prlc_entrega.logger import configurar_logger_da_aplicacao
from prlc_entrega.planejador_mdp import EnlaceModelo, ModeloCenario
from prlc_entrega.probabilidades_subespaco import ModoProbabilidade

logger = configurar_logger_da_aplicacao(__name__)

VERSAO_ESQUEMA = 1

_CHAVES = {
    "": {"versao_esquema", "nome", "descricao", "geracao", "enlaces", "modelo", "treino", "simulacao", "saida"},
    "geracao": {"alfa", "delta", "atraso_reproducao", "duracao_geracao"},
    "enlaces": {"taxa", "perda", "atraso"},
    "modelo": {"desconto", "ordem_corpo", "periodo_decisao", "horizonte", "modo_probabilidade", "limiar"},
    "treino": {"temperatura_maxima", "temperatura_minima", "periodo_atualizacao", "recompensa", "qlearn", "qlearn_ve"},
    "treino.algoritmo": {"episodios", "phi", "phi_por_episodios"},
    "simulacao": {"execucoes", "geracoes", "semente", "motor", "tamanho_carga"},
    "saida": {"pasta"},
}


@dataclass(frozen=True)
class ParametrosAlgoritmo:
    episodios: int
    phi: float | None = None
    phi_por_episodios: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ParametrosTreino:
    temperatura_maxima: float = configuracoes.TEMPERATURA_MAXIMA
    temperatura_minima: float = configuracoes.TEMPERATURA_MINIMA
    periodo_atualizacao: int | None = None
    recompensa: str = "esperada"
    qlearn: ParametrosAlgoritmo | None = None
    qlearn_ve: ParametrosAlgoritmo | None = None


@dataclass(frozen=True)
class ParametrosSimulacao:
    execucoes: int = configuracoes.EXECUCOES_PADRAO
    geracoes: int = configuracoes.GERACOES_PADRAO
    semente: int = configuracoes.SEMENTE_PADRAO
    motor: str = "codec"
    tamanho_carga: int = configuracoes.TAMANHO_CARGA_PADRAO


@dataclass(frozen=True)
class ConfiguracaoCenario:
    nome: str
    espec: EspecGeracao
    enlaces: tuple[EnlaceModelo, ...]
    desconto: float
    ordem_corpo: int
    periodo_decisao: int
    horizonte: int
    modo: ModoProbabilidade
    limiar: float
    treino: ParametrosTreino
    simulacao: ParametrosSimulacao
    pasta_saida: Path
    descricao: str = ""

    def modelo(self, desconto: float | None = None, modo: ModoProbabilidade | None = None) -> ModeloCenario:
        return ModeloCenario(
            enlaces=self.enlaces,
            espec=self.espec,
            periodo_decisao=self.periodo_decisao,
            desconto=self.desconto if desconto is None else desconto,
            ordem_corpo=self.ordem_corpo,
            horizonte=self.horizonte,
            modo=self.modo if modo is None else modo,
        )

    def parametros_algoritmo(self, algoritmo: str) -> ParametrosAlgoritmo:
        """Hiperparâmetros de `qlearn` ou `qlearn-ve`; ausência é erro de validação."""
        if algoritmo == "qlearn":
            if self.treino.qlearn is None:
                raise ErroValidacaoConfiguracao("treino.qlearn", "seção obrigatória para o treino qlearn")
            return self.treino.qlearn
        if algoritmo == "qlearn-ve":
            if self.treino.qlearn_ve is None:
                raise ErroValidacaoConfiguracao("treino.qlearn_ve", "seção obrigatória para o treino qlearn-ve")
            if self.treino.periodo_atualizacao is None:
                raise ErroValidacaoConfiguracao(
                    "treino.periodo_atualizacao", "obrigatório para o treino qlearn-ve"
                )
            return self.treino.qlearn_ve
        raise ErroValidacaoConfiguracao("algoritmo", f"desconhecido: {algoritmo}")


# --- Auxiliares de validação ---


def _rejeitar_desconhecidas(dados: dict[str, Any], secao: str, caminho: str) -> None:
    for chave in dados:
        if chave not in _CHAVES[secao]:
            raise ErroValidacaoConfiguracao(f"{caminho}.{chave}" if caminho else chave, "chave desconhecida")


def _secao(dados: dict[str, Any], chave: str, obrigatoria: bool = True) -> dict[str, Any]:
    if chave not in dados:
        if obrigatoria:
            raise ErroValidacaoConfiguracao(chave, "seção obrigatória ausente")
        return {}
    valor = dados[chave]
    if not isinstance(valor, dict):
        raise ErroValidacaoConfiguracao(chave, "deve ser uma tabela")
    return valor


def _inteiro(dados: dict[str, Any], chave: str, caminho: str, padrao: int | None = None, minimo: int | None = None) -> int:
    if chave not in dados:
        if padrao is None:
            raise ErroValidacaoConfiguracao(caminho, "campo obrigatório ausente")
        return padrao
    valor = dados[chave]
    if isinstance(valor, bool) or not isinstance(valor, int):
        raise ErroValidacaoConfiguracao(caminho, f"deve ser inteiro, recebido {valor!r}")
    if minimo is not None and valor < minimo:
        raise ErroValidacaoConfiguracao(caminho, f"deve ser >= {minimo}, recebido {valor}")
    return valor


def _real(dados: dict[str, Any], chave: str, caminho: str, padrao: float | None = None) -> float:
    if chave not in dados:
        if padrao is None:
            raise ErroValidacaoConfiguracao(caminho, "campo obrigatório ausente")
        return padrao
    valor = dados[chave]
    if isinstance(valor, bool) or not isinstance(valor, (int, float)):
        raise ErroValidacaoConfiguracao(caminho, f"deve ser numérico, recebido {valor!r}")
    return float(valor)


def _lista(dados: dict[str, Any], chave: str, caminho: str) -> list:
    if chave not in dados:
        raise ErroValidacaoConfiguracao(caminho, "campo obrigatório ausente")
    valor = dados[chave]
    if not isinstance(valor, list) or not valor:
        raise ErroValidacaoConfiguracao(caminho, "deve ser uma lista não vazia")
    return valor


def _opcao(dados: dict[str, Any], chave: str, caminho: str, opcoes: tuple[str, ...], padrao: str) -> str:
    valor = dados.get(chave, padrao)
    if valor not in opcoes:
        raise ErroValidacaoConfiguracao(caminho, f"deve ser um de {opcoes}, recebido {valor!r}")
    return valor


# --- Seções ---


def _validar_geracao(dados: dict[str, Any]) -> EspecGeracao:
    secao = _secao(dados, "geracao")
    _rejeitar_desconhecidas(secao, "geracao", "geracao")
    alfas = _lista(secao, "alfa", "geracao.alfa")
    deltas = _lista(secao, "delta", "geracao.delta")
    for i, a in enumerate(alfas):
        if isinstance(a, bool) or not isinstance(a, int) or a < 1:
            raise ErroValidacaoConfiguracao(f"geracao.alfa[{i}]", f"deve ser inteiro >= 1, recebido {a!r}")
    for i, d in enumerate(deltas):
        if isinstance(d, bool) or not isinstance(d, (int, float)) or d < 0:
            raise ErroValidacaoConfiguracao(f"geracao.delta[{i}]", f"deve ser número >= 0, recebido {d!r}")
    if len(alfas) != len(deltas):
        raise ErroValidacaoConfiguracao("geracao.delta", f"{len(deltas)} valores para {len(alfas)} camadas")
    duracao = _inteiro(secao, "duracao_geracao", "geracao.duracao_geracao", minimo=1)
    atraso = _inteiro(secao, "atraso_reproducao", "geracao.atraso_reproducao", minimo=0)
    try:
        return EspecGeracao(tuple(alfas), tuple(float(d) for d in deltas), atraso, duracao)
    except ErroDominio as e:
        raise ErroValidacaoConfiguracao("geracao", str(e)) from e


def _validar_enlaces(dados: dict[str, Any], periodo: int) -> tuple[EnlaceModelo, ...]:
    if "enlaces" not in dados:
        raise ErroValidacaoConfiguracao("enlaces", "ao menos um enlace é obrigatório")
    brutos = dados["enlaces"]
    if not isinstance(brutos, list) or not brutos:
        raise ErroValidacaoConfiguracao("enlaces", "deve ser uma lista não vazia de tabelas")
    enlaces = []
    for i, bruto in enumerate(brutos):
        caminho = f"enlaces[{i}]"
        if not isinstance(bruto, dict):
            raise ErroValidacaoConfiguracao(caminho, "deve ser uma tabela")
        _rejeitar_desconhecidas(bruto, "enlaces", caminho)
        taxa = _real(bruto, "taxa", f"{caminho}.taxa")
        perda = _real(bruto, "perda", f"{caminho}.perda")
        atraso = _real(bruto, "atraso", f"{caminho}.atraso", padrao=0.0)
        if not taxa > 0:
            raise ErroValidacaoConfiguracao(f"{caminho}.taxa", f"deve ser positiva, recebido {taxa}")
        if not 0 <= perda < 1:
            raise ErroValidacaoConfiguracao(f"{caminho}.perda", f"deve estar em [0, 1), recebido {perda}")
        if atraso < 0:
            raise ErroValidacaoConfiguracao(f"{caminho}.atraso", f"deve ser >= 0, recebido {atraso}")
        enlace = EnlaceModelo(taxa, perda, atraso)
        try:
            enlace.orcamento(periodo)
        except ErroDominio as e:
            raise ErroValidacaoConfiguracao(f"{caminho}.taxa", str(e)) from e
        enlaces.append(enlace)
    return tuple(enlaces)


def _validar_algoritmo(secao: dict[str, Any], chave: str) -> ParametrosAlgoritmo | None:
    if chave not in secao:
        return None
    caminho = f"treino.{chave}"
    dados = secao[chave]
    if not isinstance(dados, dict):
        raise ErroValidacaoConfiguracao(caminho, "deve ser uma tabela")
    _rejeitar_desconhecidas(dados, "treino.algoritmo", caminho)
    episodios = _inteiro(dados, "episodios", f"{caminho}.episodios", minimo=1)
    phi = _real(dados, "phi", f"{caminho}.phi", padrao=-1.0)
    tabela: dict[int, float] = {}
    for chave_n, valor in dados.get("phi_por_episodios", {}).items():
        caminho_item = f"{caminho}.phi_por_episodios.{chave_n}"
        if not str(chave_n).isdigit() or int(chave_n) < 1:
            raise ErroValidacaoConfiguracao(caminho_item, "chave deve ser um número de episódios")
        if isinstance(valor, bool) or not isinstance(valor, (int, float)) or not 0 < valor < 1:
            raise ErroValidacaoConfiguracao(caminho_item, f"φ deve estar em (0, 1), recebido {valor!r}")
        tabela[int(chave_n)] = float(valor)
    if phi != -1.0 and not 0 < phi <= 1:
        raise ErroValidacaoConfiguracao(f"{caminho}.phi", f"deve estar em (0, 1], recebido {phi}")
    if phi == -1.0 and not tabela:
        raise ErroValidacaoConfiguracao(f"{caminho}.phi", "informe phi ou phi_por_episodios")
    return ParametrosAlgoritmo(episodios, None if phi == -1.0 else phi, tabela)


def _validar_treino(dados: dict[str, Any]) -> ParametrosTreino:
    secao = _secao(dados, "treino", obrigatoria=False)
    _rejeitar_desconhecidas(secao, "treino", "treino")
    maxima = _real(secao, "temperatura_maxima", "treino.temperatura_maxima", configuracoes.TEMPERATURA_MAXIMA)
    minima = _real(secao, "temperatura_minima", "treino.temperatura_minima", configuracoes.TEMPERATURA_MINIMA)
    if not 0 < minima <= maxima:
        raise ErroValidacaoConfiguracao("treino.temperatura_minima", "exige 0 < mínima <= máxima")
    periodo = None
    if "periodo_atualizacao" in secao:
        periodo = _inteiro(secao, "periodo_atualizacao", "treino.periodo_atualizacao", minimo=1)
    return ParametrosTreino(
        temperatura_maxima=maxima,
        temperatura_minima=minima,
        periodo_atualizacao=periodo,
        recompensa=_opcao(secao, "recompensa", "treino.recompensa", ("esperada", "realizada"), "esperada"),
        qlearn=_validar_algoritmo(secao, "qlearn"),
        qlearn_ve=_validar_algoritmo(secao, "qlearn_ve"),
    )


def _validar_simulacao(dados: dict[str, Any]) -> ParametrosSimulacao:
    secao = _secao(dados, "simulacao", obrigatoria=False)
    _rejeitar_desconhecidas(secao, "simulacao", "simulacao")
    return ParametrosSimulacao(
        execucoes=_inteiro(secao, "execucoes", "simulacao.execucoes", configuracoes.EXECUCOES_PADRAO, 1),
        geracoes=_inteiro(secao, "geracoes", "simulacao.geracoes", configuracoes.GERACOES_PADRAO, 1),
        semente=_inteiro(secao, "semente", "simulacao.semente", configuracoes.SEMENTE_PADRAO, 0),
        motor=_opcao(secao, "motor", "simulacao.motor", ("codec", "modelo"), "codec"),
        tamanho_carga=_inteiro(
            secao, "tamanho_carga", "simulacao.tamanho_carga", configuracoes.TAMANHO_CARGA_PADRAO, 1
        ),
    )


def validar_cenario(dados: dict[str, Any], nome_padrao: str = "cenario") -> ConfiguracaoCenario:
    """Valida o dicionário lido do TOML e devolve a configuração imutável."""
    _rejeitar_desconhecidas(dados, "", "")
    versao = _inteiro(dados, "versao_esquema", "versao_esquema")
    if versao != VERSAO_ESQUEMA:
        raise ErroValidacaoConfiguracao("versao_esquema", f"versão {versao} não suportada (esperado {VERSAO_ESQUEMA})")

    espec = _validar_geracao(dados)
    modelo = _secao(dados, "modelo")
    _rejeitar_desconhecidas(modelo, "modelo", "modelo")
    periodo = _inteiro(modelo, "periodo_decisao", "modelo.periodo_decisao", minimo=1)
    enlaces = _validar_enlaces(dados, periodo)
    desconto = _real(modelo, "desconto", "modelo.desconto")
    if not 0 <= desconto <= 1:
        raise ErroValidacaoConfiguracao("modelo.desconto", f"deve estar em [0, 1], recebido {desconto}")
    limiar = _real(modelo, "limiar", "modelo.limiar", configuracoes.LIMIAR_ITERACAO_VALOR)
    if not limiar > 0:
        raise ErroValidacaoConfiguracao("modelo.limiar", f"deve ser positivo, recebido {limiar}")
    modo = ModoProbabilidade(
        _opcao(modelo, "modo_probabilidade", "modelo.modo_probabilidade", ("exato", "q-infinito"), "exato")
    )
    ordem = _inteiro(modelo, "ordem_corpo", "modelo.ordem_corpo", configuracoes.ORDEM_CORPO_PADRAO, 2)
    horizonte = _inteiro(modelo, "horizonte", "modelo.horizonte", configuracoes.HORIZONTE_PADRAO, 1)

    saida = _secao(dados, "saida", obrigatoria=False)
    _rejeitar_desconhecidas(saida, "saida", "saida")
    nome = str(dados.get("nome", nome_padrao))
    pasta = Path(saida.get("pasta", configuracoes.PASTA_SAIDA_RESULTADOS_ABSOLUTA / nome))
    if not pasta.is_absolute():
        pasta = configuracoes.PASTA_SAIDA_RESULTADOS_ABSOLUTA.parent / pasta

    configuracao = ConfiguracaoCenario(
        nome=nome,
        espec=espec,
        enlaces=enlaces,
        desconto=desconto,
        ordem_corpo=ordem,
        periodo_decisao=periodo,
        horizonte=horizonte,
        modo=modo,
        limiar=limiar,
        treino=_validar_treino(dados),
        simulacao=_validar_simulacao(dados),
        pasta_saida=pasta,
        descricao=str(dados.get("descricao", "")),
    )
    # Restrições que cruzam seções (T = DG, D0 >= 2·DG, horizonte 2, q potência de primo).
    try:
        configuracao.modelo()
        if modo is ModoProbabilidade.EXATO:
            EspecCorpo(ordem)
    except ErroDominio as e:
        raise ErroValidacaoConfiguracao("modelo", str(e)) from e
    return configuracao


def resolver_caminho_cenario(referencia: str | Path) -> Path:
    """Aceita um caminho de arquivo ou o nome de um cenário embutido."""
    caminho = Path(referencia)
    if caminho.exists():
        return caminho
    embutido = configuracoes.PASTA_CENARIOS_EMBUTIDOS / f"{referencia}.toml"
    if embutido.exists():
        return embutido
    raise ErroValidacaoConfiguracao("cenario", f"arquivo ou cenário embutido não encontrado: {referencia}")


def listar_cenarios_embutidos() -> list[str]:
    return sorted(p.stem for p in configuracoes.PASTA_CENARIOS_EMBUTIDOS.glob("*.toml"))


def carregar_cenario(referencia: str | Path) -> ConfiguracaoCenario:
    caminho = resolver_caminho_cenario(referencia)
    try:
        with caminho.open("rb") as arquivo:
            dados = tomllib.load(arquivo)
    except tomllib.TOMLDecodeError as e:
        raise ErroValidacaoConfiguracao("cenario", f"TOML inválido em {caminho}: {e}") from e
    configuracao = validar_cenario(dados, nome_padrao=caminho.stem)
    logger.info("Cenário '%s' carregado de %s.", configuracao.nome, caminho)
    return configuracao
