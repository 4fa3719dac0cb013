"""
Ponto de entrada da linha de comando.
Verbos: plan, train, simulate, sweep e validate-config. Códigos de saída: 0 sucesso,
2 erro de validação, 3 falha de autoverificação.
"""

import argparse
import multiprocessing
import sys
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from prlc_entrega import relatorios
from prlc_entrega.agentes_rl import (
    ConfigTreino,
    EsquemaTemperatura,
    ResultadoTreino,
    Retomada,
    carregar_checkpoint,
    interpolar_phi,
    salvar_checkpoint,
    treinar_q_learning,
    treinar_q_learning_ve,
)
from prlc_entrega.cenario import (
    ConfiguracaoCenario,
    ParametrosAlgoritmo,
    carregar_cenario,
    listar_cenarios_embutidos,
)
from prlc_entrega.erros import ErroAutoverificacao, ErroDominio, ErroValidacaoConfiguracao
from prlc_entrega.logger import configurar_logger_da_aplicacao, definir_nivel_terminal
from prlc_entrega.planejador_mdp import (
    ModeloCenario,
    ProcessoDecisao,
    construir_processo,
    desempenho_esperado,
    exportar_politica,
    importar_politica,
    iteracao_de_valor,
    matriz_deterministica,
    matriz_uniforme,
)
from prlc_entrega.probabilidades_subespaco import ModoProbabilidade
from prlc_entrega.simulacao import (
    MOTORES,
    ConfigExperimento,
    FontePolitica,
    RandSched,
    ResumoExperimento,
    ambiente_treinamento,
    executar_episodio,
    executar_experimento,
)

logger = configurar_logger_da_aplicacao(__name__)

CODIGO_SUCESSO = 0
CODIGO_ERRO_VALIDACAO = 2
CODIGO_FALHA_AUTOVERIFICACAO = 3

ALGORITMOS = ("qlearn", "qlearn-ve")
ESQUEMAS = ("mdp", "mdp-miope", "qlearn", "qlearn-ve", "randsched")
EIXOS_VARREDURA = ("episodes", "update-period", "loss")
_ESQUEMAS_POR_EIXO = {
    "episodes": ("qlearn", "qlearn-ve"),
    "update-period": ("qlearn-ve",),
    "loss": ("mdp", "randsched"),
}


# --- Auxiliares ---


def _modelo(configuracao: ConfiguracaoCenario, modo: str | None, desconto: float | None = None) -> ModeloCenario:
    try:
        return configuracao.modelo(desconto=desconto, modo=ModoProbabilidade(modo) if modo else None)
    except ErroDominio as e:
        raise ErroValidacaoConfiguracao("modelo", str(e)) from e


def _pasta_saida(configuracao: ConfiguracaoCenario, args: argparse.Namespace) -> Path:
    return Path(args.saida) if args.saida else configuracao.pasta_saida


def _semente(configuracao: ConfiguracaoCenario, args: argparse.Namespace) -> int:
    return configuracao.simulacao.semente if args.semente is None else args.semente


def _motor(configuracao: ConfiguracaoCenario, motor: str | None, modelo: ModeloCenario) -> str:
    motor = motor or configuracao.simulacao.motor
    if motor == "codec" and modelo.modo is ModoProbabilidade.Q_INFINITO:
        raise ErroValidacaoConfiguracao("simulacao.motor", "o motor codec exige modo_probabilidade exato")
    return motor


def phi_para_episodios(parametros: ParametrosAlgoritmo, episodios: int) -> float:
    """φ do cenário para `episodios`, interpolado quando não houver valor conhecido."""
    pontos = dict(parametros.phi_por_episodios)
    if parametros.phi is not None:
        pontos.setdefault(parametros.episodios, parametros.phi)
    try:
        return interpolar_phi(episodios, pontos)
    except ErroDominio as e:
        raise ErroValidacaoConfiguracao("treino.phi_por_episodios", str(e)) from e


def treinar(
    configuracao: ConfiguracaoCenario,
    processo: ProcessoDecisao,
    algoritmo: str,
    semente: int,
    episodios: int | None = None,
    periodo_atualizacao: int | None = None,
    retomada: Retomada | None = None,
) -> ResultadoTreino:
    parametros = configuracao.parametros_algoritmo(algoritmo)
    treino = configuracao.treino
    episodios = episodios or parametros.episodios
    esquema = EsquemaTemperatura(
        treino.temperatura_maxima, treino.temperatura_minima, phi_para_episodios(parametros, episodios)
    )
    config = ConfigTreino(
        episodios=episodios,
        periodo_atualizacao=(periodo_atualizacao or treino.periodo_atualizacao) if algoritmo == "qlearn-ve" else None,
        semente=semente,
        recompensa_realizada=treino.recompensa == "realizada",
    )
    ambiente = ambiente_treinamento(processo, config.recompensa_realizada)
    if algoritmo == "qlearn":
        return treinar_q_learning(ambiente, config, esquema, retomada)
    return treinar_q_learning_ve(ambiente, config, esquema, retomada=retomada)


def fonte_do_esquema(
    esquema: str,
    configuracao: ConfiguracaoCenario,
    processo: ProcessoDecisao,
    semente: int,
    episodios: int | None = None,
    periodo_atualizacao: int | None = None,
) -> FontePolitica:
    """Política de um esquema de comparação: planejada, aprendida ou de referência."""
    if esquema == "randsched":
        return RandSched(processo.modelo)
    if esquema == "mdp":
        return iteracao_de_valor(processo, configuracao.limiar)
    if esquema == "mdp-miope":
        miope = construir_processo(replace(processo.modelo, desconto=0.0))
        return iteracao_de_valor(miope, configuracao.limiar)
    return treinar(configuracao, processo, esquema, semente, episodios, periodo_atualizacao).politica


def _avaliar_analitico(fonte: FontePolitica, processo: ProcessoDecisao, geracoes: int) -> float:
    escolha = matriz_uniforme(processo) if isinstance(fonte, RandSched) else matriz_deterministica(processo, fonte)
    return float(desempenho_esperado(processo, escolha, geracoes).mean())


# --- Comandos ---


def cmd_plan(args: argparse.Namespace) -> int:
    configuracao = carregar_cenario(args.cenario)
    modelo = _modelo(configuracao, args.modo, args.desconto)
    processo = construir_processo(modelo)
    politica = iteracao_de_valor(processo, configuracao.limiar)
    caminho = exportar_politica(politica, _pasta_saida(configuracao, args) / f"politica_mdp_gamma{modelo.desconto:g}.json")
    print(f"states={len(processo.estados)} actions={len(processo.acoes)}")
    print(f"iterations={politica.iteracoes}")
    print(f"policy={caminho}")
    return CODIGO_SUCESSO


def cmd_train(args: argparse.Namespace) -> int:
    configuracao = carregar_cenario(args.cenario)
    configuracao.parametros_algoritmo(args.algoritmo)
    modelo = _modelo(configuracao, args.modo)
    processo = construir_processo(modelo)
    retomada = carregar_checkpoint(Path(args.retomar), processo) if args.retomar else None
    resultado = treinar(
        configuracao,
        processo,
        args.algoritmo,
        _semente(configuracao, args),
        args.episodios,
        args.periodo_atualizacao,
        retomada,
    )
    pasta = _pasta_saida(configuracao, args)
    sufixo = args.algoritmo.replace("-", "_")
    caminho = exportar_politica(resultado.politica, pasta / f"politica_{sufixo}.json")
    salvar_checkpoint(resultado, pasta / f"checkpoint_{sufixo}.json")
    relatorios.escrever_csv(pasta / f"curva_{sufixo}.csv", "curva_aprendizado", resultado.curva)
    print(f"episodes={resultado.episodios} temperature={resultado.temperatura:.6g}")
    print(f"policy={caminho}")
    return CODIGO_SUCESSO


def cmd_simulate(args: argparse.Namespace) -> int:
    configuracao = carregar_cenario(args.cenario)
    modelo = _modelo(configuracao, args.modo)
    motor = _motor(configuracao, args.motor, modelo)
    if args.despejo and motor != "codec":
        raise ErroValidacaoConfiguracao("despejo", "o despejo de pacotes exige o motor codec")

    # Todas as políticas são conferidas antes de qualquer execução.
    fontes: dict[str, FontePolitica] = {}
    for arquivo in args.politica:
        caminho = Path(arquivo)
        if not caminho.exists():
            raise ErroValidacaoConfiguracao("politica", f"arquivo não encontrado: {caminho}")
        fontes[caminho.stem] = importar_politica(caminho, modelo)
    if args.randsched:
        fontes["randsched"] = RandSched(modelo)
    if not fontes:
        raise ErroValidacaoConfiguracao("politica", "informe --politica ARQUIVO e/ou --randsched")

    simulacao = configuracao.simulacao
    semente = _semente(configuracao, args)
    config = ConfigExperimento(
        execucoes=args.execucoes or simulacao.execucoes,
        geracoes=args.geracoes or simulacao.geracoes,
        semente=semente,
        motor=motor,
        tamanho_carga=simulacao.tamanho_carga,
        processos=args.processos,
        autoverificacao=args.autoverificacao,
    )
    resultados: dict[str, ResumoExperimento] = {}
    for esquema, fonte in fontes.items():
        logger.info("Simulando esquema '%s'.", esquema)
        resultados[esquema] = executar_experimento(fonte, modelo, config)

    pasta = _pasta_saida(configuracao, args)
    sufixo = _sufixo_simulacao(fontes, semente)
    resumos = {e: relatorios.linhas_resumo(e, configuracao.nome, motor, semente, r) for e, r in resultados.items()}
    por_geracao = {e: relatorios.linhas_por_geracao(e, r) for e, r in resultados.items()}
    relatorios.escrever_csv(pasta / f"resumo_{sufixo}.csv", "resumo", resumos.values())
    relatorios.escrever_csv(
        pasta / f"por_geracao_{sufixo}.csv", "por_geracao", [linha for linhas in por_geracao.values() for linha in linhas]
    )
    relatorios.escrever_planilha(pasta / f"resumo_{sufixo}.xlsx", resumos, por_geracao)
    if args.grafico:
        relatorios.desenhar_curvas(pasta / f"por_geracao_{sufixo}.svg", resultados, titulo=configuracao.nome)
    if args.despejo:
        # Reproduz a primeira execução do primeiro esquema gravando os pacotes.
        primeira = np.random.SeedSequence(semente).spawn(config.execucoes)[0]
        with Path(args.despejo).open("wb") as arquivo:
            executar_episodio(
                next(iter(fontes.values())),
                modelo,
                config.geracoes,
                primeira,
                motor=motor,
                tamanho_carga=config.tamanho_carga,
                despejo=arquivo,
            )
        logger.info("Pacotes da primeira execução gravados em: %s", args.despejo)

    for esquema, resumo in resultados.items():
        print(f"{esquema}: mean_delta={resumo.media:.4f} stderr={resumo.erro_padrao:.4f}")
    return CODIGO_SUCESSO


def _sufixo_simulacao(fontes: dict[str, FontePolitica], semente: int) -> str:
    """`<esquemas>_<semente>`: execuções com outros esquemas ou sementes não se sobrescrevem."""
    esquemas = "-".join(nome.replace("_", "-") for nome in fontes)
    return f"{esquemas}_{semente}"


def _celula_varredura(argumentos: tuple) -> dict[str, object]:
    configuracao, modo, eixo, valor, esquema, semente, execucoes, motor, avaliacao = argumentos
    modelo = configuracao.modelo(modo=modo)
    episodios = periodo = None
    if eixo == "episodes":
        episodios = int(valor)
    elif eixo == "update-period":
        periodo = int(valor)
    else:
        modelo = replace(modelo, enlaces=tuple(replace(e, perda=float(valor)) for e in modelo.enlaces))
    processo = construir_processo(modelo)
    fonte = fonte_do_esquema(esquema, configuracao, processo, semente, episodios, periodo)
    geracoes = configuracao.simulacao.geracoes
    if avaliacao == "analitica":
        media, erro = _avaliar_analitico(fonte, processo, geracoes), 0.0
    else:
        config = ConfigExperimento(
            execucoes=execucoes,
            geracoes=geracoes,
            semente=semente,
            motor=motor,
            tamanho_carga=configuracao.simulacao.tamanho_carga,
        )
        resumo = executar_experimento(fonte, modelo, config)
        media, erro = resumo.media, resumo.erro_padrao
    return {
        "eixo": eixo,
        "valor": valor,
        "esquema": esquema,
        "semente": semente,
        "distorcao_media": media,
        "erro_padrao": erro,
    }


def validar_valores_varredura(eixo: str, valores: Sequence[float]) -> list[float]:
    if not valores:
        raise ErroValidacaoConfiguracao("valores", "a lista de valores da varredura está vazia")
    for i, valor in enumerate(valores):
        if eixo == "loss":
            if not 0 <= valor < 1:
                raise ErroValidacaoConfiguracao(f"valores[{i}]", f"perda fora de [0, 1): {valor}")
        elif valor < 1 or valor != int(valor):
            raise ErroValidacaoConfiguracao(f"valores[{i}]", f"deve ser inteiro >= 1: {valor}")
    return [float(v) for v in valores]


def cmd_sweep(args: argparse.Namespace) -> int:
    configuracao = carregar_cenario(args.cenario)
    valores = validar_valores_varredura(args.eixo, args.valores)
    modelo = _modelo(configuracao, args.modo)
    motor = _motor(configuracao, args.motor, modelo)
    esquemas = args.esquemas or _ESQUEMAS_POR_EIXO[args.eixo]
    for esquema in esquemas:
        if esquema in ALGORITMOS:
            configuracao.parametros_algoritmo(esquema)
    sementes = args.sementes or [_semente(configuracao, args)]
    execucoes = args.execucoes or configuracao.simulacao.execucoes

    celulas = [
        (configuracao, modelo.modo, args.eixo, valor, esquema, semente, execucoes, motor, args.avaliacao)
        for valor in valores
        for esquema in esquemas
        for semente in sementes
    ]
    logger.info("Varredura '%s': %d células (%d processos).", args.eixo, len(celulas), args.processos)
    if args.processos > 1:
        contexto = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=args.processos, mp_context=contexto) as executor:
            linhas = list(executor.map(_celula_varredura, celulas))
    else:
        linhas = [_celula_varredura(c) for c in celulas]

    eixo_arquivo = args.eixo.replace("-", "_")
    caminho = relatorios.escrever_csv(
        _pasta_saida(configuracao, args) / f"varredura_{eixo_arquivo}.csv", "varredura", linhas
    )
    print(f"rows={len(linhas)} csv={caminho}")
    return CODIGO_SUCESSO


def cmd_validate_config(args: argparse.Namespace) -> int:
    referencias = args.cenarios or listar_cenarios_embutidos()
    for referencia in referencias:
        configuracao = carregar_cenario(referencia)
        configuracao.modelo()
        print(f"{configuracao.nome}: ok")
    return CODIGO_SUCESSO


# --- Argumentos ---


def _opcoes_comuns() -> argparse.ArgumentParser:
    comum = argparse.ArgumentParser(add_help=False)
    comum.add_argument("--semente", type=int, default=None, help="semente mestra (padrão: a do cenário)")
    comum.add_argument("--execucoes", type=int, default=None, help="simulações por esquema")
    comum.add_argument("--saida", default=None, help="pasta de saída (padrão: [saida] do cenário)")
    comum.add_argument("--modo", choices=[m.value for m in ModoProbabilidade], default=None)
    comum.add_argument("--autoverificacao", action="store_true", help="confere a decodificação de cada geração")
    comum.add_argument("--grafico", action="store_true", help="gera também o SVG das curvas por geração")
    comum.add_argument("--processos", type=int, default=1, help="processos paralelos")
    comum.add_argument("--verbose", action="store_true", help="log DEBUG também no terminal")
    return comum


def criar_parser() -> argparse.ArgumentParser:
    comum = _opcoes_comuns()
    parser = argparse.ArgumentParser(prog="prlc-entrega", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="comando", required=True)

    plan = sub.add_parser("plan", parents=[comum], help="iteração de valor no modelo do cenário")
    plan.add_argument("cenario")
    plan.add_argument("--desconto", type=float, default=None, help="sobrepõe γ do cenário")
    plan.set_defaults(funcao=cmd_plan)

    train = sub.add_parser("train", parents=[comum], help="treino por Q-learning")
    train.add_argument("cenario")
    train.add_argument("algoritmo", choices=ALGORITMOS)
    train.add_argument("--episodios", type=int, default=None)
    train.add_argument("--periodo-atualizacao", type=int, default=None)
    train.add_argument("--retomar", default=None, help="checkpoint de onde continuar")
    train.set_defaults(funcao=cmd_train)

    simulate = sub.add_parser("simulate", parents=[comum], help="simulação de políticas")
    simulate.add_argument("cenario")
    simulate.add_argument("--politica", action="append", default=[], help="arquivo de política (repetível)")
    simulate.add_argument("--randsched", action="store_true", help="inclui a referência de escolha uniforme")
    simulate.add_argument("--geracoes", type=int, default=None)
    simulate.add_argument("--motor", choices=MOTORES, default=None)
    simulate.add_argument("--despejo", default=None, help="grava os pacotes da primeira execução")
    simulate.set_defaults(funcao=cmd_simulate)

    sweep = sub.add_parser("sweep", parents=[comum], help="varredura de um parâmetro")
    sweep.add_argument("cenario")
    sweep.add_argument("eixo", choices=EIXOS_VARREDURA)
    sweep.add_argument("valores", nargs="*", type=float)
    sweep.add_argument("--esquemas", nargs="+", choices=ESQUEMAS, default=None)
    sweep.add_argument("--sementes", nargs="+", type=int, default=None)
    sweep.add_argument("--motor", choices=MOTORES, default=None)
    sweep.add_argument("--avaliacao", choices=("simulacao", "analitica"), default="simulacao")
    sweep.set_defaults(funcao=cmd_sweep)

    validate = sub.add_parser("validate-config", help="valida arquivos de cenário")
    validate.add_argument("cenarios", nargs="*", help="arquivos ou nomes embutidos (padrão: todos os embutidos)")
    validate.set_defaults(funcao=cmd_validate_config)
    return parser


def executar(argv: Sequence[str] | None = None) -> int:
    """Executa um comando e devolve o código de saída."""
    args = criar_parser().parse_args(argv)
    if getattr(args, "verbose", False):
        definir_nivel_terminal("DEBUG")
    try:
        return args.funcao(args)
    except ErroValidacaoConfiguracao as e:
        logger.error("Configuração inválida em %s: %s", e.caminho, e.mensagem)
        return CODIGO_ERRO_VALIDACAO
    except ErroDominio as e:
        logger.error("Parâmetro inválido: %s", e)
        return CODIGO_ERRO_VALIDACAO
    except ErroAutoverificacao:
        logger.critical("Falha de autoverificação.", exc_info=True)
        return CODIGO_FALHA_AUTOVERIFICACAO
    except Exception:
        logger.critical("Falha crítica na execução do comando.", exc_info=True)
        raise


def main() -> None:
    """Entrada principal do script de console."""
    try:
        codigo = executar()
    except KeyboardInterrupt:
        logger.warning("Execução interrompida pelo usuário.")
        sys.exit(130)
    except Exception:
        sys.exit(1)
    sys.exit(codigo)


if __name__ == "__main__":
    main()
