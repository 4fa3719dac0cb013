"""
Constantes, padrões numéricos e pastas do projeto.
Carrega variáveis de ambiente do .env; nenhum outro módulo deve usar load_dotenv ou os.environ.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# --- Corpo finito e codificação ---
ORDEM_CORPO_PADRAO = 256
ORDEM_CORPO_MAXIMA = 2**16
TAMANHO_CARGA_PADRAO = 16  # símbolos por pacote

# --- Planejamento (iteração de valor) ---
LIMIAR_ITERACAO_VALOR = 1e-9
MAX_ITERACOES_VALOR = 200_000
HORIZONTE_PADRAO = 2  # gerações requisitáveis por decisão (urgente + próxima)

# --- Q-learning ---
TEMPERATURA_MAXIMA = 75.0
TEMPERATURA_MINIMA = 0.5
JANELA_CURVA_APRENDIZADO = 1_000  # episódios por ponto da curva de aprendizado

# ========== CONFIGURAÇÕES DE EXPERIMENTO (altere aqui) ==========
SEMENTE_PADRAO = 2014
EXECUCOES_PADRAO = 100     # simulações por esquema
GERACOES_PADRAO = 100      # gerações por simulação
# ================================================================

# --- Pastas (a partir de variáveis de ambiente) ---
PASTA_SAIDA_RESULTADOS = os.getenv("PASTA_SAIDA_RESULTADOS", "resultados")
PASTA_LOGS = os.getenv("PASTA_LOGS", "logs")
NIVEL_LOG_TERMINAL = os.getenv("NIVEL_LOG_TERMINAL", "INFO").strip().upper() or "INFO"

# Caminhos absolutos a partir da raiz do projeto
_raiz_projeto = Path(__file__).resolve().parent.parent.parent
PASTA_SAIDA_RESULTADOS_ABSOLUTA = _raiz_projeto / PASTA_SAIDA_RESULTADOS
PASTA_LOGS_ABSOLUTA = _raiz_projeto / PASTA_LOGS

# Cenários empacotados com o projeto (um e dois servidores)
PASTA_CENARIOS_EMBUTIDOS = Path(__file__).resolve().parent / "cenarios"
