import math

import numpy as np
import pytest

from prlc_entrega.agentes_rl import (
    ConfigTreino,
    EsquemaTemperatura,
    TabelaQ,
    atualizar_equivalentes,
    atualizar_q,
    calcular_classes_equivalencia,
    carregar_checkpoint,
    interpolar_phi,
    pares_equivalentes,
    pares_equivalentes_varredura,
    probabilidades_boltzmann,
    salvar_checkpoint,
    selecionar_boltzmann,
    treinar_q_learning,
    treinar_q_learning_ve,
)
from prlc_entrega.erros import ErroDominio, ErroImpressaoDigital
from prlc_entrega.planejador_mdp import (
    construir_processo,
    desempenho_esperado,
    iteracao_de_valor,
    matriz_deterministica,
)
from prlc_entrega.simulacao import ambiente_treinamento


SORTEIOS = 100_000


def _contagens(linha, temperatura, semente=5):
    rng = np.random.default_rng(semente)
    linha = np.asarray(linha, dtype=float)
    escolhas = [selecionar_boltzmann(linha, temperatura, rng) for _ in range(SORTEIOS)]
    return np.bincount(escolhas, minlength=len(linha))


# --- Boltzmann ---


def test_probabilidade_de_boltzmann_fechada():
    p = probabilidades_boltzmann(np.array([20.0, 0.0]), 10.0)
    assert p[0] == pytest.approx(math.exp(2) / (math.exp(2) + 1))
    assert p[0] == pytest.approx(0.880797, abs=1e-6)


def test_frequencias_de_boltzmann_seguem_as_probabilidades(aderencia_qui_quadrado):
    linha = [20.0, 0.0]
    assert aderencia_qui_quadrado(_contagens(linha, 10.0), probabilidades_boltzmann(np.array(linha), 10.0))


def test_linha_nula_escolhe_uniformemente(aderencia_qui_quadrado):
    assert aderencia_qui_quadrado(_contagens([0.0] * 5, 1.0), np.full(5, 0.2))


def test_frequencias_distinguem_temperaturas(aderencia_qui_quadrado):
    # a mesma amostra rejeita a lei de outra temperatura
    linha = np.array([20.0, 11.0, 0.0])
    contagens = _contagens(linha, 10.0, semente=8)
    assert aderencia_qui_quadrado(contagens, probabilidades_boltzmann(linha, 10.0))
    assert not aderencia_qui_quadrado(contagens, probabilidades_boltzmann(linha, 12.0))


def test_temperatura_alta_quase_uniforme():
    p = probabilidades_boltzmann(np.array([20.0, 11.0, 0.0, 5.0]), 1e6)
    assert np.max(np.abs(p - 0.25)) < 0.01 * 0.25


def test_linha_aleatoria_com_temperatura_moderada(aderencia_qui_quadrado):
    linha = np.random.default_rng(3).uniform(0, 20, size=6)
    assert aderencia_qui_quadrado(_contagens(linha, 5.0, semente=9), probabilidades_boltzmann(linha, 5.0))


@pytest.mark.parametrize("temperatura", [0.0, -1.0])
def test_temperatura_nao_positiva_e_erro(temperatura, rng):
    with pytest.raises(ErroDominio):
        selecionar_boltzmann(np.zeros(3), temperatura, rng)


# --- Atualização ---


def test_primeira_atualizacao_usa_taxa_meio():
    tabela = TabelaQ.zerada(2, 2)
    atualizar_q(tabela, 0, 1, recompensa=20.0, s_proximo=1, desconto=0.9)
    assert tabela.valores[0, 1] == pytest.approx(10.0)
    assert tabela.visitas[0, 1] == 1
    assert tabela.taxa(0, 1) == pytest.approx(0.5)


def test_recompensa_nula_mantem_zero():
    tabela = TabelaQ.zerada(2, 2)
    atualizar_q(tabela, 1, 0, recompensa=0.0, s_proximo=0, desconto=0.9)
    assert tabela.valores[1, 0] == 0.0


def test_media_com_recompensa_constante():
    tabela = TabelaQ.zerada(1, 1)
    visitas = 10_000
    for _ in range(visitas):
        atualizar_q(tabela, 0, 0, recompensa=20.0, s_proximo=0, desconto=0.0)
    # λ = 1/(1 + N) partindo de zero: Q = N/(N + 1)·r
    assert tabela.valores[0, 0] == pytest.approx(20.0 * visitas / (visitas + 1), abs=1e-9)
    assert tabela.taxa(0, 0) == pytest.approx(1 / (1 + visitas))


def test_atualizacao_considera_so_acoes_validas_do_proximo_estado():
    tabela = TabelaQ.zerada(2, 3)
    tabela.valores[1] = [50.0, 1.0, 2.0]
    atualizar_q(tabela, 0, 0, recompensa=0.0, s_proximo=1, desconto=1.0, validas_proximo=np.array([1, 2]))
    assert tabela.valores[0, 0] == pytest.approx(1.0)


def test_atualizacao_em_lote():
    tabela = TabelaQ.zerada(3, 3)
    tabela.visitas[2, 1] = 1
    tabela.atualizar_lote(np.array([0, 2]), np.array([0, 1]), alvo=12.0)
    assert tabela.valores[0, 0] == pytest.approx(6.0)
    assert tabela.valores[2, 1] == pytest.approx(4.0)
    assert tabela.visitas[0, 0] == 1 and tabela.visitas[2, 1] == 2


# --- Temperatura e φ ---


def test_sequencia_de_temperaturas():
    esquema = EsquemaTemperatura(75.0, 0.5, 0.99)
    temperatura = esquema.maxima
    for n in range(1, 200):
        temperatura = esquema.proxima(temperatura)
        assert temperatura - esquema.minima == pytest.approx(0.99**n * (75.0 - 0.5))
        assert esquema.temperatura(n) == pytest.approx(temperatura)


@pytest.mark.parametrize(("maxima", "minima", "phi"), [(1.0, 2.0, 0.9), (1.0, 0.0, 0.9), (75.0, 0.5, 1.5)])
def test_esquema_invalido(maxima, minima, phi):
    with pytest.raises(ErroDominio):
        EsquemaTemperatura(maxima, minima, phi)


def test_interpolacao_de_phi():
    pontos = {50_000: 0.99986, 250_000: 0.99996}
    assert interpolar_phi(50_000, pontos) == 0.99986
    meio = interpolar_phi(100_000, pontos)
    assert 0.99986 < meio < 0.99996
    assert interpolar_phi(500_000, pontos) > 0.99996
    # um único ponto: (1 − φ)·N constante
    assert 1 - interpolar_phi(100_000, {50_000: 0.99986}) == pytest.approx((1 - 0.99986) / 2)
    with pytest.raises(ErroDominio):
        interpolar_phi(10, {})


@pytest.mark.parametrize(
    ("episodios", "pontos"),
    [
        (7, {50_000: 0.99986}),
        (100, {1_000: 0.9, 2_000: 0.99}),
        (1_000, {1_000_000: 0.9995, 2_000_000: 0.9999}),
    ],
)
def test_phi_extrapolado_fora_de_zero_um_e_rejeitado(episodios, pontos):
    with pytest.raises(ErroDominio, match=r"fora de \(0, 1\)"):
        interpolar_phi(episodios, pontos)


def test_phi_de_um_ponto_no_limite():
    # (1 − φ0)·n0 = 7: N = 7 daria φ = 0
    with pytest.raises(ErroDominio):
        interpolar_phi(7, {50_000: 0.99986})
    assert 0 < interpolar_phi(8, {50_000: 0.99986}) < 1


def test_config_treino_invalida():
    with pytest.raises(ErroDominio):
        ConfigTreino(episodios=0)
    with pytest.raises(ErroDominio):
        ConfigTreino(episodios=10, periodo_atualizacao=0)


# --- Classes de equivalência ---


def test_classes_formam_particao_reflexiva(processo_duas_camadas):
    classes = calcular_classes_equivalencia(processo_duas_camadas)
    mascara = processo_duas_camadas.mascara
    assert sum(len(estados) for estados, _ in classes.membros) == int(mascara.sum())
    assert np.all(classes.classe_do_par[mascara] >= 0)
    assert np.all(classes.classe_do_par[~mascara] == -1)
    for s, a in [(0, 0), (5, 17), (17, 55)]:
        if mascara[s, a]:
            assert (s, a) in pares_equivalentes(processo_duas_camadas, s, a, classes)
            estados, acoes = classes.equivalentes_sem_observado(s, a)
            assert not np.any((estados == s) & (acoes == a))


def test_estados_com_a_primeira_camada_decodificada_sao_equivalentes(processo_duas_camadas):
    processo = processo_duas_camadas
    classes = calcular_classes_equivalencia(processo)
    a = processo.indice_acao[((0, 0, 3, 2),)]
    s1, s2 = processo.estado((3, 3)), processo.estado((3, 4))
    assert classes.classe_do_par[s1, a] == classes.classe_do_par[s2, a]


@pytest.mark.parametrize(("s", "a"), [(0, 0), (0, 30), (7, 12), (17, 50)])
def test_classes_coincidem_com_a_varredura_ingenua(processo_duas_camadas, s, a):
    if not processo_duas_camadas.mascara[s, a]:
        pytest.skip("par inválido")
    classes = calcular_classes_equivalencia(processo_duas_camadas)
    assert sorted(pares_equivalentes(processo_duas_camadas, s, a, classes)) == sorted(
        pares_equivalentes_varredura(processo_duas_camadas, s, a)
    )


# --- Treino ---


def _treinar(processo, algoritmo, episodios=2_000, semente=1, periodo=None, retomada=None):
    ambiente = ambiente_treinamento(processo)
    config = ConfigTreino(episodios=episodios, periodo_atualizacao=periodo, semente=semente, janela_curva=100)
    esquema = EsquemaTemperatura(75.0, 0.5, 0.998)
    if algoritmo == "qlearn":
        return treinar_q_learning(ambiente, config, esquema, retomada)
    return treinar_q_learning_ve(ambiente, config, esquema, retomada=retomada)


def test_treino_e_deterministico(processo_duas_camadas):
    a = _treinar(processo_duas_camadas, "qlearn")
    b = _treinar(processo_duas_camadas, "qlearn")
    assert np.array_equal(a.tabela.valores, b.tabela.valores)
    assert a.politica.acoes == b.politica.acoes
    assert len(a.curva) == 20
    assert set(a.curva[0]) == {"episodio", "recompensa_media", "temperatura"}


def test_ve_sem_periodo_repete_o_q_learning(processo_duas_camadas):
    simples = _treinar(processo_duas_camadas, "qlearn")
    ve = _treinar(processo_duas_camadas, "qlearn-ve", periodo=None)
    assert np.array_equal(simples.tabela.valores, ve.tabela.valores)
    assert np.array_equal(simples.tabela.visitas, ve.tabela.visitas)


def test_ve_atualiza_pares_virtuais(processo_duas_camadas):
    ve = _treinar(processo_duas_camadas, "qlearn-ve", episodios=500, periodo=1)
    assert ve.tabela.visitas.sum() > 500
    assert np.all(ve.tabela.visitas[~processo_duas_camadas.mascara] == 0)


def test_primeiro_episodio_ja_usa_a_temperatura_decaida(processo_duas_camadas):
    ambiente = ambiente_treinamento(processo_duas_camadas)
    esquema = EsquemaTemperatura(75.0, 0.5, 0.99)
    resultado = treinar_q_learning(ambiente, ConfigTreino(episodios=30, semente=2, janela_curva=1), esquema)
    temperaturas = [ponto["temperatura"] for ponto in resultado.curva]
    assert temperaturas[0] == pytest.approx(esquema.temperatura(1))
    assert temperaturas[0] < esquema.maxima
    assert temperaturas == pytest.approx([esquema.temperatura(n) for n in range(1, 31)])
    assert resultado.temperatura == pytest.approx(esquema.temperatura(30))


def test_pares_virtuais_usam_o_valor_ja_atualizado_do_par_observado(processo_q_infinito):
    processo = processo_q_infinito
    classes = calcular_classes_equivalencia(processo)
    tabela = TabelaQ.zerada(*processo.mascara.shape)
    s = processo.estado_vazio
    a = processo.indice_acao[((3, 2, 0, 0),)]
    # sem perdas e sem pacotes da geração seguinte: volta ao buffer vazio com J = 20
    atualizar_q(tabela, s, a, 20.0, s, 0.9, processo.acoes_validas(s))
    assert tabela.valores[s, a] == pytest.approx(10.0)
    atualizados = atualizar_equivalentes(tabela, classes, s, a, 20.0, s, 0.9, processo.acoes_validas(s))
    assert atualizados > 0
    estados, acoes = classes.equivalentes_sem_observado(s, a)
    # alvo 20 + 0,9·10 com λ = 1/2
    assert tabela.valores[estados, acoes] == pytest.approx(np.full(atualizados, 14.5))
    assert np.all(tabela.visitas[estados, acoes] == 1)
    assert tabela.valores[s, a] == pytest.approx(10.0) and tabela.visitas[s, a] == 1


def test_valores_q_limitados(processo_duas_camadas):
    ve = _treinar(processo_duas_camadas, "qlearn-ve", periodo=10)
    assert ve.tabela.valores.max() <= 20.0 / (1 - 0.9) + 1e-9
    assert ve.tabela.valores.min() >= 0.0


def test_checkpoint_retoma_o_mesmo_treino(processo_duas_camadas, tmp_path):
    direto = _treinar(processo_duas_camadas, "qlearn", episodios=600)
    parcial = _treinar(processo_duas_camadas, "qlearn", episodios=300)
    caminho = salvar_checkpoint(parcial, tmp_path / "checkpoint.json")
    retomada = carregar_checkpoint(caminho, processo_duas_camadas)
    assert retomada.episodios == 300
    continuado = _treinar(processo_duas_camadas, "qlearn", episodios=600, retomada=retomada)
    assert np.array_equal(direto.tabela.valores, continuado.tabela.valores)
    assert continuado.temperatura == pytest.approx(direto.temperatura)


def test_checkpoint_de_outro_cenario(processo_duas_camadas, processo_q_infinito, tmp_path):
    caminho = salvar_checkpoint(_treinar(processo_duas_camadas, "qlearn", episodios=10), tmp_path / "c.json")
    with pytest.raises(ErroImpressaoDigital):
        carregar_checkpoint(caminho, processo_q_infinito)


def test_checkpoint_de_outro_algoritmo(processo_duas_camadas, tmp_path):
    caminho = salvar_checkpoint(_treinar(processo_duas_camadas, "qlearn", episodios=10), tmp_path / "c.json")
    retomada = carregar_checkpoint(caminho, processo_duas_camadas)
    with pytest.raises(ErroDominio):
        _treinar(processo_duas_camadas, "qlearn-ve", episodios=20, periodo=10, retomada=retomada)


@pytest.mark.aceitacao
def test_ve_se_aproxima_do_mdp(modelo_duas_camadas):
    processo = construir_processo(modelo_duas_camadas)
    mdp = desempenho_esperado(processo, matriz_deterministica(processo, iteracao_de_valor(processo)), 100).mean()
    ambiente = ambiente_treinamento(processo)
    esquema = EsquemaTemperatura(75.0, 0.5, 0.99986)
    medias_ve, medias_simples = [], []
    for semente in range(20):
        ve = treinar_q_learning_ve(ambiente, ConfigTreino(50_000, 10, semente), esquema)
        simples = treinar_q_learning(ambiente, ConfigTreino(50_000, None, semente), esquema)
        medias_ve.append(desempenho_esperado(processo, matriz_deterministica(processo, ve.politica), 100).mean())
        medias_simples.append(
            desempenho_esperado(processo, matriz_deterministica(processo, simples.politica), 100).mean()
        )
    assert mdp - np.mean(medias_ve) < 0.15
    assert np.mean(medias_ve) > np.mean(medias_simples)


def _media_da_politica(processo, politica) -> float:
    return float(desempenho_esperado(processo, matriz_deterministica(processo, politica), 100).mean())


@pytest.mark.aceitacao
def test_q_learning_longo_se_aproxima_do_mdp(processo_duas_camadas):
    processo = processo_duas_camadas
    mdp = _media_da_politica(processo, iteracao_de_valor(processo))
    ambiente = ambiente_treinamento(processo)
    esquema = EsquemaTemperatura(75.0, 0.5, 0.99996)
    medias = [
        _media_da_politica(processo, treinar_q_learning(ambiente, ConfigTreino(250_000, None, semente), esquema).politica)
        for semente in range(5)
    ]
    assert mdp - np.mean(medias) < 0.5


@pytest.mark.aceitacao
def test_periodo_de_atualizacao_menor_aprende_mais(processo_duas_camadas):
    processo = processo_duas_camadas
    ambiente = ambiente_treinamento(processo)
    esquema = EsquemaTemperatura(75.0, 0.5, 0.99986)
    medias: dict[int | None, float] = {}
    for periodo in (1, 100, None):
        valores = []
        for semente in range(10):
            config = ConfigTreino(50_000, periodo, semente)
            if periodo is None:
                resultado = treinar_q_learning(ambiente, config, esquema)
            else:
                resultado = treinar_q_learning_ve(ambiente, config, esquema)
            valores.append(_media_da_politica(processo, resultado.politica))
        medias[periodo] = float(np.mean(valores))
    assert medias[1] >= medias[100] - 0.1
    assert medias[100] > medias[None]
