from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prlc_entrega.corpo_finito import (
    EspecCorpo,
    MatrizCorpo,
    dividir,
    inserir_rref,
    inverter,
    multiplicar,
    posto_matriz,
    resolver_posto_completo,
    somar,
    subtrair,
)
from prlc_entrega.erros import ErroDominio, ErroPostoDeficiente

CONFIG_PROPRIEDADES = dict(max_examples=60, deadline=None)


def _matriz_posto_completo(espec: EspecCorpo, n: int, rng: np.random.Generator) -> MatrizCorpo:
    while True:
        m = MatrizCorpo(espec, espec.aleatorio((n, n), rng))
        if posto_matriz(m) == n:
            return m


# --- Corpo ---


@pytest.mark.parametrize("q", [6, 1, 0, 12, 2**17])
def test_ordem_invalida_e_rejeitada(q):
    with pytest.raises(ErroDominio):
        EspecCorpo(q)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 16, 256, 2**16])
def test_ordens_validas(q):
    assert EspecCorpo(q).GF.order == q


def test_identidade_multiplicativa_em_gf256(gf256):
    for a in range(256):
        assert multiplicar(a, 1, gf256) == a


def test_caracteristica_dois(gf2):
    assert somar(1, 1, gf2) == 0


def test_inverso_em_gf5():
    gf5 = EspecCorpo(5)
    assert inverter(3, gf5) == 2
    assert multiplicar(3, 2, gf5) == 1
    assert dividir(1, 3, gf5) == 2
    assert subtrair(1, 3, gf5) == 3


def test_inverter_zero_e_erro(gf256):
    with pytest.raises(ErroDominio):
        inverter(0, gf256)


def test_operando_fora_do_corpo_e_erro(gf2):
    with pytest.raises(ErroDominio):
        somar(2, 1, gf2)
    with pytest.raises(ErroDominio):
        gf2.vetor([0, 1, 3])


@given(a=st.integers(1, 255), b=st.integers(1, 255))
@settings(**CONFIG_PROPRIEDADES)
def test_divisao_desfaz_multiplicacao(a, b):
    gf = EspecCorpo(256)
    assert dividir(multiplicar(a, b, gf), b, gf) == a


# --- Posto ---


@pytest.mark.parametrize("q", [2, 4, 256])
@pytest.mark.parametrize("n", [1, 3, 7])
def test_posto_da_identidade(q, n):
    assert posto_matriz(MatrizCorpo.identidade(n, EspecCorpo(q))) == n


def test_posto_com_linha_dependente(gf2):
    m = MatrizCorpo.de_lista([[1, 0, 1], [0, 1, 1], [1, 1, 0]], gf2)
    assert posto_matriz(m) == 2


def test_posto_de_matriz_nula_e_vazia(gf256):
    assert posto_matriz(MatrizCorpo.de_lista(np.zeros((3, 4), dtype=int), gf256)) == 0
    assert posto_matriz(MatrizCorpo.vazia(5, gf256)) == 0


@given(linhas=st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4), min_size=1, max_size=5))
@settings(**CONFIG_PROPRIEDADES)
def test_posto_em_gf2_coincide_com_tamanho_do_span(linhas):
    gf2 = EspecCorpo(2)
    vetores = np.array(linhas)
    span = {tuple(np.array(c) @ vetores % 2) for c in product((0, 1), repeat=len(linhas))}
    assert 2 ** posto_matriz(MatrizCorpo.de_lista(linhas, gf2)) == len(span)


# --- Inserção em forma escalonada ---


def test_inserir_vetor_nulo_nao_e_inovador(gf256):
    base = MatrizCorpo.de_lista([[1, 2, 3]], gf256)
    nova, inovador = inserir_rref(base, [0, 0, 0])
    assert not inovador
    assert nova is base


def test_inserir_em_matriz_vazia(gf256):
    nova, inovador = inserir_rref(MatrizCorpo.vazia(3, gf256), [0, 5, 7])
    assert inovador
    assert posto_matriz(nova) == 1
    assert nova.pivos() == [1]


def test_inserir_com_dimensao_errada_e_erro(gf256):
    with pytest.raises(ErroDominio):
        inserir_rref(MatrizCorpo.vazia(3, gf256), [1, 2])


@given(linhas=st.lists(st.lists(st.integers(0, 3), min_size=4, max_size=4), min_size=1, max_size=6))
@settings(**CONFIG_PROPRIEDADES)
def test_inserir_rref_acompanha_o_posto(linhas):
    gf4 = EspecCorpo(4)
    base = MatrizCorpo.vazia(4, gf4)
    for i, linha in enumerate(linhas):
        posto_antes = posto_matriz(base)
        base, inovador = inserir_rref(base, linha)
        esperado = posto_matriz(MatrizCorpo.de_lista(linhas[: i + 1], gf4))
        assert posto_matriz(base) == esperado
        assert inovador == (esperado == posto_antes + 1)
    assert base.forma_escalonada().como_lista() == MatrizCorpo.de_lista(linhas, gf4).forma_escalonada().como_lista()


# --- Resolução ---


def test_resolver_com_identidade_devolve_lado_direito(gf256):
    direita = [[1, 2], [3, 4], [5, 6]]
    solucao = resolver_posto_completo(MatrizCorpo.identidade(3, gf256), direita)
    assert solucao.como_lista() == direita


def test_resolver_sistema_singular_e_erro(gf2):
    with pytest.raises(ErroPostoDeficiente):
        resolver_posto_completo(MatrizCorpo.de_lista([[1, 1], [1, 1]], gf2), [[1], [0]])


@pytest.mark.parametrize("q", [2, 4, 256])
@pytest.mark.parametrize("n", [1, 3, 10])
def test_codificar_e_resolver_recupera_as_fontes(q, n, rng):
    espec = EspecCorpo(q)
    coeficientes = _matriz_posto_completo(espec, n, rng)
    fontes = espec.aleatorio((n, 8), rng)
    codificados = MatrizCorpo(espec, coeficientes.entradas @ fontes)
    recuperadas = resolver_posto_completo(coeficientes, codificados)
    assert np.array_equal(recuperadas.entradas.view(np.ndarray), fontes.view(np.ndarray))
