import numpy as np
import pytest

from prlc_entrega.codec_prlc import EspecGeracao
from prlc_entrega.corpo_finito import EspecCorpo
from prlc_entrega.planejador_mdp import EnlaceModelo, ModeloCenario, construir_processo
from prlc_entrega.probabilidades_subespaco import ModoProbabilidade


@pytest.fixture(scope="session")
def espec_duas_camadas() -> EspecGeracao:
    return EspecGeracao(alfas=(3, 2), deltas=(11.0, 9.0), atraso_reproducao=10, duracao_geracao=5)


@pytest.fixture(scope="session")
def espec_tres_camadas() -> EspecGeracao:
    return EspecGeracao(alfas=(3, 2, 2), deltas=(11.0, 9.0, 12.0), atraso_reproducao=10, duracao_geracao=5)


@pytest.fixture(scope="session")
def modelo_duas_camadas(espec_duas_camadas) -> ModeloCenario:
    return ModeloCenario(
        enlaces=(EnlaceModelo(taxa=1.0, perda=0.05),),
        espec=espec_duas_camadas,
        periodo_decisao=5,
        desconto=0.9,
    )


@pytest.fixture(scope="session")
def modelo_dois_servidores(espec_duas_camadas) -> ModeloCenario:
    return ModeloCenario(
        enlaces=(EnlaceModelo(taxa=0.6, perda=0.15), EnlaceModelo(taxa=0.4, perda=0.05)),
        espec=espec_duas_camadas,
        periodo_decisao=5,
        desconto=0.9,
    )


@pytest.fixture(scope="session")
def modelo_q_infinito(espec_duas_camadas) -> ModeloCenario:
    return ModeloCenario(
        enlaces=(EnlaceModelo(taxa=1.0, perda=0.0),),
        espec=espec_duas_camadas,
        periodo_decisao=5,
        desconto=0.9,
        modo=ModoProbabilidade.Q_INFINITO,
    )


@pytest.fixture(scope="session")
def processo_duas_camadas(modelo_duas_camadas):
    return construir_processo(modelo_duas_camadas)


@pytest.fixture(scope="session")
def processo_q_infinito(modelo_q_infinito):
    return construir_processo(modelo_q_infinito)


@pytest.fixture
def gf2() -> EspecCorpo:
    return EspecCorpo(2)


@pytest.fixture
def gf256() -> EspecCorpo:
    return EspecCorpo(256)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2014)


def _critico_qui_quadrado(graus: int, z: float = 3.0902) -> float:
    # Wilson–Hilferty para o quantil 0,999; superestima levemente com poucos graus
    termo = 2.0 / (9.0 * graus)
    return graus * (1.0 - termo + z * np.sqrt(termo)) ** 3


@pytest.fixture
def aderencia_qui_quadrado():
    """Teste de aderência de Pearson a 0,1%: True quando as contagens são compatíveis com `probabilidades`."""

    def aderente(contagens, probabilidades) -> bool:
        contagens = np.asarray(contagens, dtype=float)
        esperadas = contagens.sum() * np.asarray(probabilidades, dtype=float)
        # categorias com contagem esperada abaixo de 5 viram uma só
        raras = esperadas < 5
        if raras.any():
            sobra_contagem, sobra_esperada = contagens[raras].sum(), esperadas[raras].sum()
            contagens, esperadas = contagens[~raras], esperadas[~raras]
            if sobra_esperada >= 5:
                contagens = np.append(contagens, sobra_contagem)
                esperadas = np.append(esperadas, sobra_esperada)
            else:
                menor = int(np.argmin(esperadas))
                contagens[menor] += sobra_contagem
                esperadas[menor] += sobra_esperada
        estatistica = float(((contagens - esperadas) ** 2 / esperadas).sum())
        return estatistica <= _critico_qui_quadrado(len(esperadas) - 1)

    return aderente
