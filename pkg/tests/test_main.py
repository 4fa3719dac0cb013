import pytest

from prlc_entrega.cenario import ParametrosAlgoritmo
from prlc_entrega.erros import ErroValidacaoConfiguracao
from prlc_entrega.main import (
    CODIGO_ERRO_VALIDACAO,
    CODIGO_SUCESSO,
    executar,
    phi_para_episodios,
    validar_valores_varredura,
)
from prlc_entrega.relatorios import validar_csv

CENARIO = "duas_camadas_perda5"


def _planejar(pasta, cenario=CENARIO):
    assert executar(["plan", cenario, "--saida", str(pasta)]) == CODIGO_SUCESSO
    return pasta / "politica_mdp_gamma0.9.json"


def test_plan_imprime_dimensoes(tmp_path, capsys):
    politica = _planejar(tmp_path)
    saida = capsys.readouterr().out
    assert "states=18 actions=56" in saida
    assert f"policy={politica}" in saida
    assert politica.exists()


def test_plan_miope(tmp_path):
    assert executar(["plan", CENARIO, "--desconto", "0", "--saida", str(tmp_path)]) == CODIGO_SUCESSO
    assert (tmp_path / "politica_mdp_gamma0.json").exists()


def test_validate_config_dos_embutidos(capsys):
    assert executar(["validate-config"]) == CODIGO_SUCESSO
    linhas = [l for l in capsys.readouterr().out.splitlines() if l.endswith(": ok")]
    assert len(linhas) == 6


def test_validate_config_invalido(tmp_path):
    arquivo = tmp_path / "ruim.toml"
    arquivo.write_text("versao_esquema = 1\ngama = 0.9\n", encoding="utf-8")
    assert executar(["validate-config", str(arquivo)]) == CODIGO_ERRO_VALIDACAO


def test_simulate_com_politica_e_randsched(tmp_path, capsys):
    politica = _planejar(tmp_path / "plano")
    codigo = executar(
        [
            "simulate", CENARIO,
            "--politica", str(politica),
            "--randsched",
            "--execucoes", "2",
            "--geracoes", "5",
            "--motor", "modelo",
            "--semente", "7",
            "--saida", str(tmp_path / "sim"),
        ]
    )
    assert codigo == CODIGO_SUCESSO
    saida = capsys.readouterr().out
    assert "politica_mdp_gamma0.9: mean_delta=" in saida
    assert "randsched: mean_delta=" in saida
    resumo = validar_csv(tmp_path / "sim" / "resumo_politica-mdp-gamma0.9-randsched_7.csv", "resumo")
    assert [l["esquema"] for l in resumo] == ["politica_mdp_gamma0.9", "randsched"]
    assert all(l["execucoes"] == 2 and l["geracoes"] == 5 for l in resumo)
    assert len(validar_csv(tmp_path / "sim" / "por_geracao_politica-mdp-gamma0.9-randsched_7.csv", "por_geracao")) == 10
    assert (tmp_path / "sim" / "resumo_politica-mdp-gamma0.9-randsched_7.xlsx").exists()


def test_simulate_com_despejo_e_autoverificacao(tmp_path):
    despejo = tmp_path / "pacotes.bin"
    codigo = executar(
        [
            "simulate", CENARIO, "--randsched",
            "--execucoes", "1", "--geracoes", "3",
            "--autoverificacao", "--despejo", str(despejo),
            "--saida", str(tmp_path),
        ]
    )
    assert codigo == CODIGO_SUCESSO
    # pacotes de 6 bytes de cabeçalho + (β_L + carga) símbolos de um byte
    assert despejo.stat().st_size % (6 + 5 + 16) == 0
    assert despejo.stat().st_size > 0


def test_simulate_compara_otima_e_miope(tmp_path, capsys):
    _planejar(tmp_path)
    assert executar(["plan", CENARIO, "--desconto", "0", "--saida", str(tmp_path)]) == CODIGO_SUCESSO
    argumentos = ["simulate", CENARIO, "--execucoes", "3", "--geracoes", "20", "--motor", "modelo", "--semente", "1"]
    for nome in ("politica_mdp_gamma0.9.json", "politica_mdp_gamma0.json"):
        argumentos += ["--politica", str(tmp_path / nome)]
    assert executar([*argumentos, "--saida", str(tmp_path / "sim")]) == CODIGO_SUCESSO
    resumo = tmp_path / "sim" / "resumo_politica-mdp-gamma0.9-politica-mdp-gamma0_1.csv"
    assert len(validar_csv(resumo, "resumo")) == 2


def test_politica_de_outro_cenario_nao_gera_saida(tmp_path):
    politica = _planejar(tmp_path / "plano", "duas_camadas_perda10")
    saida = tmp_path / "sim"
    codigo = executar(["simulate", CENARIO, "--politica", str(politica), "--randsched", "--saida", str(saida)])
    assert codigo == CODIGO_ERRO_VALIDACAO
    assert not saida.exists() or not any(saida.iterdir())


def test_simulate_sem_politicas(tmp_path):
    assert executar(["simulate", CENARIO, "--saida", str(tmp_path)]) == CODIGO_ERRO_VALIDACAO


def test_motor_codec_em_q_infinito(tmp_path):
    argumentos = ["simulate", CENARIO, "--randsched", "--modo", "q-infinito", "--motor", "codec"]
    assert executar([*argumentos, "--saida", str(tmp_path)]) == CODIGO_ERRO_VALIDACAO


def test_train_curto(tmp_path, capsys):
    codigo = executar(
        ["train", CENARIO, "qlearn-ve", "--episodios", "300", "--semente", "4", "--saida", str(tmp_path)]
    )
    assert codigo == CODIGO_SUCESSO
    assert "episodes=300" in capsys.readouterr().out
    for nome in ("politica_qlearn_ve.json", "checkpoint_qlearn_ve.json", "curva_qlearn_ve.csv"):
        assert (tmp_path / nome).exists()

    codigo = executar(
        [
            "train", CENARIO, "qlearn-ve", "--episodios", "400", "--semente", "4",
            "--retomar", str(tmp_path / "checkpoint_qlearn_ve.json"), "--saida", str(tmp_path),
        ]
    )
    assert codigo == CODIGO_SUCESSO


def test_sweep_sem_valores():
    assert executar(["sweep", CENARIO, "loss"]) == CODIGO_ERRO_VALIDACAO


def test_sweep_analitico_de_perdas(tmp_path, capsys):
    codigo = executar(
        ["sweep", CENARIO, "loss", "0.05", "0.2", "--avaliacao", "analitica", "--saida", str(tmp_path)]
    )
    assert codigo == CODIGO_SUCESSO
    assert "rows=4" in capsys.readouterr().out
    linhas = validar_csv(tmp_path / "varredura_loss.csv", "varredura")
    medias = {(l["valor"], l["esquema"]): l["distorcao_media"] for l in linhas}
    assert medias[(0.05, "mdp")] > medias[(0.2, "mdp")]
    assert medias[(0.05, "mdp")] > medias[(0.05, "randsched")]


@pytest.mark.parametrize(
    ("eixo", "valores"),
    [("loss", [1.0]), ("loss", [-0.1]), ("episodes", [0]), ("update-period", [2.5])],
)
def test_valores_de_varredura_invalidos(eixo, valores):
    with pytest.raises(ErroValidacaoConfiguracao) as erro:
        validar_valores_varredura(eixo, valores)
    assert erro.value.caminho == "valores[0]"


def test_phi_do_cenario():
    parametros = ParametrosAlgoritmo(episodios=50_000, phi=0.99986)
    assert phi_para_episodios(parametros, 50_000) == 0.99986
    assert phi_para_episodios(parametros, 100_000) == pytest.approx(1 - 0.00007)


def test_simulate_com_sementes_diferentes_preserva_as_saidas(tmp_path, capsys):
    pasta = tmp_path / "sim"
    base = ["simulate", CENARIO, "--randsched", "--execucoes", "2", "--geracoes", "5", "--motor", "modelo"]
    for semente in ("3", "4"):
        assert executar([*base, "--semente", semente, "--saida", str(pasta)]) == CODIGO_SUCESSO
    medias = {}
    for semente in (3, 4):
        (linha,) = validar_csv(pasta / f"resumo_randsched_{semente}.csv", "resumo")
        assert linha["semente"] == semente
        medias[semente] = linha["distorcao_media"]
        assert (pasta / f"por_geracao_randsched_{semente}.csv").exists()
        assert (pasta / f"resumo_randsched_{semente}.xlsx").exists()
    saida = capsys.readouterr().out
    assert saida.count("randsched: mean_delta=") == 2
    assert f"{medias[3]:.4f}" in saida and f"{medias[4]:.4f}" in saida


def test_phi_extrapolado_fora_do_intervalo_e_erro_de_configuracao():
    parametros = ParametrosAlgoritmo(episodios=50_000, phi=0.99986)
    with pytest.raises(ErroValidacaoConfiguracao) as erro:
        phi_para_episodios(parametros, 5)
    assert erro.value.caminho == "treino.phi_por_episodios"
