import os

from dotenv import load_dotenv

load_dotenv()

# ВНИМАНИЕ: ни одна переменная не обязательна, сценарий задаёт численные параметры явно
LOG_LEVEL = os.getenv("VSTATES_LOG_LEVEL", "INFO")
DEFAULT_N = int(os.getenv("VSTATES_DEFAULT_N", "128"))
DEFAULT_TOL = float(os.getenv("VSTATES_DEFAULT_TOL", "1e-9"))
MAX_ITER = int(os.getenv("VSTATES_MAX_ITER", "40"))
OUTPUT_DIR = os.getenv("VSTATES_OUTPUT_DIR", "out")
