import os
from dotenv import load_dotenv

load_dotenv()

# General
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
RANDOM_SEED = int(os.getenv("RANDOM_SEED", "20240101"))

# Size guards for exhaustive constructions
QUOTIENT_CAP = int(os.getenv("QUOTIENT_CAP", "5"))
TREEDEPTH_CAP = int(os.getenv("TREEDEPTH_CAP", "10"))
COVER_SEARCH_CAP = int(os.getenv("COVER_SEARCH_CAP", "10"))
CARRIER_BOUND = int(os.getenv("CARRIER_BOUND", "1000000"))
EQUIV_SIZE_CAP = int(os.getenv("EQUIV_SIZE_CAP", "8"))

# Enumeration and verification
GRAPH_ENUM_CAP = int(os.getenv("GRAPH_ENUM_CAP", "7"))
STRUCTURE_ENUM_CAP = int(os.getenv("STRUCTURE_ENUM_CAP", "5"))
DEFAULT_WITNESS_CAP = int(os.getenv("DEFAULT_WITNESS_CAP", "5"))
SWEEP_WORKERS = int(os.getenv("SWEEP_WORKERS", "1"))

# Name of the binary symbol interpreted as equality in extended signatures
EQUALITY_SYMBOL = os.getenv("EQUALITY_SYMBOL", "I")
