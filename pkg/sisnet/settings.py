import os
from dotenv import load_dotenv

# Load environment variables from .env file (if present) before reading settings
load_dotenv()

OUTPUT_DIR = os.getenv("SISNET_OUTPUT_DIR", "runs")
LOG_DIR = os.getenv("SISNET_LOG_DIR", "logs")
LOG_LEVEL = os.getenv("SISNET_LOG_LEVEL", "INFO").upper()

# State-space caps: 2^n states for the chain, 2^n x 2^n (state, action) pairs for the MDP
CHAIN_NODE_CAP = int(os.getenv("SISNET_CHAIN_NODE_CAP", 14))
MDP_NODE_CAP = int(os.getenv("SISNET_MDP_NODE_CAP", 10))

DEFAULT_TRIALS = int(os.getenv("SISNET_TRIALS", 100_000))
DEFAULT_MAX_ITERS = int(os.getenv("SISNET_MAX_ITERS", 50))
WORKERS = int(os.getenv("SISNET_WORKERS", 1))

# Upper limit on trials per random block; the effective block also shrinks with n^2
TRIAL_BLOCK = int(os.getenv("SISNET_TRIAL_BLOCK", 20_000))

DEBUG_CHECKS = os.getenv("SISNET_DEBUG_CHECKS", "false").strip().lower() in ("1", "true", "yes")

# Floor for log / division arguments in the TransNN formulas
LOG_FLOOR = 1e-300
