import copy

import pytest

from prlc_entrega.cenario import carregar_cenario, listar_cenarios_embutidos, resolver_caminho_cenario, validar_cenario
from prlc_entrega.erros import ErroValidacaoConfiguracao
from prlc_entrega.planejador_mdp import contagem_estados
from prlc_entrega.probabilidades_subespaco import ModoProbabilidade

BASE = {
    "versao_esquema": 1,
    "nome": "teste",
    "geracao": {"alfa": [3, 2], "delta": [11.0, 9.0], "atraso_reproducao": 10, "duracao_geracao": 5},
    "enlaces": [{"taxa": 1.0, "perda": 0.05}],
    "modelo": {"desconto": 0.9, "periodo_decisao": 5},
    "treino": {
        "periodo_atualizacao": 10,
        "qlearn": {"episodios": 1000, "phi": 0.999},
        "qlearn_ve": {"episodios": 500, "phi_por_episodios": {"500": 0.99}},
    },
}


def _cenario(**alteracoes):
    dados = copy.deepcopy(BASE)
    for caminho, valor in alteracoes.items():
        *secoes, chave = caminho.split("__")
        alvo = dados
        for secao in secoes:
            alvo = alvo[int(secao)] if secao.isdigit() else alvo[secao]
        if valor is None:
            alvo.pop(chave, None)
        else:
            alvo[chave] = valor
    return dados


def _caminho_do_erro(dados) -> str:
    with pytest.raises(ErroValidacaoConfiguracao) as erro:
        validar_cenario(dados)
    return erro.value.caminho


# --- Cenários embutidos ---


def test_todos_os_cenarios_embutidos_carregam():
    nomes = listar_cenarios_embutidos()
    assert len(nomes) == 6
    for nome in nomes:
        configuracao = carregar_cenario(nome)
        assert configuracao.nome == nome
        assert configuracao.modelo().impressao_digital()


def test_cenario_de_tres_camadas(tmp_path):
    configuracao = carregar_cenario("tres_camadas_dg5")
    assert configuracao.espec.betas == (3, 5, 7)
    assert contagem_estados(configuracao.espec) == 88
    assert configuracao.parametros_algoritmo("qlearn-ve").episodios == 200_000


def test_cenario_de_dois_servidores():
    configuracao = carregar_cenario("dois_servidores_assimetrico")
    assert configuracao.modelo().orcamentos == (3, 2)
    assert [e.perda for e in configuracao.enlaces] == [0.15, 0.05]


def test_cenario_inexistente():
    with pytest.raises(ErroValidacaoConfiguracao):
        resolver_caminho_cenario("nao_existe")


def test_arquivo_toml(tmp_path):
    arquivo = tmp_path / "meu.toml"
    arquivo.write_text(
        'versao_esquema = 1\n'
        '[geracao]\nalfa = [3, 2]\ndelta = [11.0, 9.0]\natraso_reproducao = 10\nduracao_geracao = 5\n'
        '[[enlaces]]\ntaxa = 1.0\nperda = 0.1\n'
        '[modelo]\ndesconto = 0.5\nperiodo_decisao = 5\nmodo_probabilidade = "q-infinito"\n'
        '[saida]\npasta = "saidas/meu"\n',
        encoding="utf-8",
    )
    configuracao = carregar_cenario(arquivo)
    assert configuracao.nome == "meu"
    assert configuracao.modo is ModoProbabilidade.Q_INFINITO
    assert configuracao.pasta_saida.is_absolute()
    assert configuracao.pasta_saida.parts[-2:] == ("saidas", "meu")
    assert configuracao.simulacao.semente == 2014


def test_toml_invalido(tmp_path):
    arquivo = tmp_path / "quebrado.toml"
    arquivo.write_text("versao_esquema = \n", encoding="utf-8")
    with pytest.raises(ErroValidacaoConfiguracao) as erro:
        carregar_cenario(arquivo)
    assert erro.value.caminho == "cenario"


# --- Validação ---


def test_cenario_base_valido():
    configuracao = validar_cenario(copy.deepcopy(BASE))
    assert configuracao.modelo().orcamentos == (5,)
    assert configuracao.treino.qlearn_ve.phi is None
    assert configuracao.treino.qlearn_ve.phi_por_episodios == {500: 0.99}


@pytest.mark.parametrize(
    ("alteracoes", "caminho"),
    [
        ({"versao_esquema": 2}, "versao_esquema"),
        ({"extra": 1}, "extra"),
        ({"modelo__gama": 0.9}, "modelo.gama"),
        ({"enlaces__0__banda": 3}, "enlaces[0].banda"),
        ({"enlaces__0__taxa": 0.7}, "enlaces[0].taxa"),
        ({"enlaces__0__perda": 1.0}, "enlaces[0].perda"),
        ({"geracao__alfa": [3, 0]}, "geracao.alfa[1]"),
        ({"geracao__delta": [11.0]}, "geracao.delta"),
        ({"geracao__delta": [11.0, -9.0]}, "geracao.delta[1]"),
        ({"modelo__desconto": 1.5}, "modelo.desconto"),
        ({"modelo__periodo_decisao": 4}, "modelo"),
        ({"geracao__atraso_reproducao": 7}, "modelo"),
        ({"modelo__ordem_corpo": 6}, "modelo"),
        ({"modelo__modo_probabilidade": "aproximado"}, "modelo.modo_probabilidade"),
        ({"treino__qlearn__phi": 1.5}, "treino.qlearn.phi"),
        ({"treino__qlearn__phi": None}, "treino.qlearn.phi"),
        ({"treino__qlearn_ve__phi_por_episodios": {"500": 1.0}}, "treino.qlearn_ve.phi_por_episodios.500"),
        ({"treino__qlearn__episodios": 0}, "treino.qlearn.episodios"),
        ({"treino__temperatura_minima": 100.0}, "treino.temperatura_minima"),
        ({"simulacao": {"motor": "outro"}}, "simulacao.motor"),
    ],
)
def test_erros_nomeiam_o_campo(alteracoes, caminho):
    assert _caminho_do_erro(_cenario(**alteracoes)) == caminho


def test_enlaces_obrigatorios():
    assert _caminho_do_erro(_cenario(enlaces=None)) == "enlaces"


def test_qlearn_ve_sem_periodo_de_atualizacao():
    configuracao = validar_cenario(_cenario(treino__periodo_atualizacao=None))
    assert configuracao.parametros_algoritmo("qlearn").episodios == 1000
    with pytest.raises(ErroValidacaoConfiguracao) as erro:
        configuracao.parametros_algoritmo("qlearn-ve")
    assert erro.value.caminho == "treino.periodo_atualizacao"


def test_algoritmo_sem_secao():
    configuracao = validar_cenario(_cenario(treino={}))
    with pytest.raises(ErroValidacaoConfiguracao) as erro:
        configuracao.parametros_algoritmo("qlearn")
    assert erro.value.caminho == "treino.qlearn"


def test_modelo_com_outro_desconto():
    configuracao = validar_cenario(copy.deepcopy(BASE))
    modelo = configuracao.modelo(desconto=0.0)
    assert modelo.desconto == 0.0
    assert modelo.impressao_digital() == configuracao.modelo().impressao_digital()
