"""
Saídas dos comandos: CSV com cabeçalhos fixos (ESQUEMAS), planilha de resumo (.xlsx) e
gráfico SVG opcional das curvas por geração.
"""

import csv
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np
import openpyxl
from matplotlib.figure import Figure

from prlc_entrega.erros import ErroValidacaoConfiguracao
from prlc_entrega.logger import configurar_logger_da_aplicacao
from prlc_entrega.simulacao import ResumoExperimento

logger = configurar_logger_da_aplicacao(__name__)

# Cabeçalhos documentados de cada CSV (a ordem das colunas faz parte do formato)
ESQUEMAS: dict[str, tuple[str, ...]] = {
    "curva_aprendizado": ("episodio", "recompensa_media", "temperatura"),
    "por_geracao": ("esquema", "geracao", "distorcao_media", "erro_padrao"),
    "resumo": (
        "esquema",
        "cenario",
        "motor",
        "execucoes",
        "geracoes",
        "semente",
        "distorcao_media",
        "erro_padrao",
        "flutuacao",
        "geracoes_sem_base",
        "atrasados",
        "obsoletos",
        "bytes_cabecalho",
    ),
    "varredura": ("eixo", "valor", "esquema", "semente", "distorcao_media", "erro_padrao"),
}

_CAMPOS_INTEIROS = {"episodio", "geracao", "execucoes", "geracoes", "semente", "atrasados", "obsoletos", "bytes_cabecalho"}
_CAMPOS_TEXTO = {"esquema", "cenario", "motor", "eixo"}


def _formatar(valor: object) -> object:
    if isinstance(valor, (float, np.floating)):
        return repr(float(valor))
    if isinstance(valor, np.integer):
        return int(valor)
    return valor


def escrever_csv(caminho: Path, esquema: str, linhas: Iterable[Mapping[str, object]]) -> Path:
    """Escreve `linhas` com o cabeçalho de ESQUEMAS[esquema]; chaves extras são erro."""
    cabecalho = ESQUEMAS[esquema]
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    total = 0
    with caminho.open("w", newline="", encoding="utf-8") as arquivo:
        escritor = csv.DictWriter(arquivo, fieldnames=cabecalho, extrasaction="raise", lineterminator="\n")
        escritor.writeheader()
        for linha in linhas:
            escritor.writerow({k: _formatar(v) for k, v in linha.items()})
            total += 1
    logger.info("CSV '%s' salvo em: %s (%d linhas)", esquema, caminho, total)
    return caminho


def validar_csv(caminho: Path, esquema: str) -> list[dict[str, object]]:
    """Relê um CSV, confere cabeçalho e tipos e devolve as linhas convertidas."""
    if esquema not in ESQUEMAS:
        raise ErroValidacaoConfiguracao("esquema", f"desconhecido: {esquema}")
    cabecalho = ESQUEMAS[esquema]
    linhas: list[dict[str, object]] = []
    with Path(caminho).open(newline="", encoding="utf-8") as arquivo:
        leitor = csv.DictReader(arquivo)
        if tuple(leitor.fieldnames or ()) != cabecalho:
            raise ErroValidacaoConfiguracao(f"{caminho}", f"cabeçalho {leitor.fieldnames} difere de {list(cabecalho)}")
        for numero, bruta in enumerate(leitor, start=2):
            linha: dict[str, object] = {}
            for campo in cabecalho:
                texto = bruta[campo]
                if texto is None or texto == "":
                    raise ErroValidacaoConfiguracao(f"{caminho}:{numero}.{campo}", "valor ausente")
                try:
                    if campo in _CAMPOS_TEXTO:
                        linha[campo] = texto
                    elif campo in _CAMPOS_INTEIROS:
                        linha[campo] = int(texto)
                    else:
                        linha[campo] = float(texto)
                except ValueError as e:
                    raise ErroValidacaoConfiguracao(f"{caminho}:{numero}.{campo}", f"valor inválido {texto!r}") from e
            linhas.append(linha)
    return linhas


# --- Linhas a partir dos resultados ---


def linhas_resumo(
    esquema: str,
    cenario: str,
    motor: str,
    semente: int,
    resumo: ResumoExperimento,
) -> dict[str, object]:
    return {
        "esquema": esquema,
        "cenario": cenario,
        "motor": motor,
        "execucoes": len(resumo.medias_execucoes),
        "geracoes": len(resumo.media_por_geracao),
        "semente": semente,
        "distorcao_media": resumo.media,
        "erro_padrao": resumo.erro_padrao,
        "flutuacao": resumo.flutuacao,
        "geracoes_sem_base": resumo.geracoes_sem_base,
        "atrasados": resumo.atrasados,
        "obsoletos": resumo.obsoletos,
        "bytes_cabecalho": resumo.bytes_cabecalho,
    }


def linhas_por_geracao(esquema: str, resumo: ResumoExperimento) -> list[dict[str, object]]:
    return [
        {"esquema": esquema, "geracao": n, "distorcao_media": media, "erro_padrao": erro}
        for n, (media, erro) in enumerate(zip(resumo.media_por_geracao, resumo.erro_padrao_por_geracao))
    ]


# --- Planilha e gráfico ---


def escrever_planilha(
    caminho: Path,
    resumos: Mapping[str, dict[str, object]],
    por_geracao: Mapping[str, list[dict[str, object]]],
) -> Path:
    """Planilha com as abas `resumo` (uma linha por esquema) e `por_geracao`."""
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    wb = openpyxl.Workbook()
    try:
        ws = wb.active
        ws.title = "resumo"
        ws.append(list(ESQUEMAS["resumo"]))
        for linha in resumos.values():
            ws.append([_formatar_celula(linha[c]) for c in ESQUEMAS["resumo"]])

        ws_geracao = wb.create_sheet("por_geracao")
        ws_geracao.append(list(ESQUEMAS["por_geracao"]))
        for linhas in por_geracao.values():
            for linha in linhas:
                ws_geracao.append([_formatar_celula(linha[c]) for c in ESQUEMAS["por_geracao"]])
        wb.save(caminho)
    finally:
        wb.close()
    logger.info("Planilha de resumo salva em: %s", caminho)
    return caminho


def _formatar_celula(valor: object) -> object:
    if isinstance(valor, np.floating):
        return float(valor)
    if isinstance(valor, np.integer):
        return int(valor)
    return valor


def desenhar_curvas(caminho: Path, por_geracao: Mapping[str, ResumoExperimento], titulo: str = "") -> Path:
    """SVG do Δ médio por geração de cada esquema, com faixa de ±1 erro-padrão."""
    caminho = Path(caminho)
    caminho.parent.mkdir(parents=True, exist_ok=True)
    figura = Figure(figsize=(7.5, 4.5))
    eixo = figura.add_subplot()
    for esquema, resumo in por_geracao.items():
        geracoes = np.arange(len(resumo.media_por_geracao))
        eixo.plot(geracoes, resumo.media_por_geracao, label=f"{esquema} ({resumo.media:.2f} dB)")
        eixo.fill_between(
            geracoes,
            resumo.media_por_geracao - resumo.erro_padrao_por_geracao,
            resumo.media_por_geracao + resumo.erro_padrao_por_geracao,
            alpha=0.2,
        )
    eixo.set_xlabel("Geração")
    eixo.set_ylabel("Redução de distorção Δ (dB)")
    if titulo:
        eixo.set_title(titulo)
    eixo.legend()
    figura.tight_layout()
    figura.savefig(caminho, format="svg")
    logger.info("Gráfico salvo em: %s", caminho)
    return caminho
