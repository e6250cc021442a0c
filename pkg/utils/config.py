import os

# Paths
# Set BASE_DIR to the root of the project
BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
DATA_DIR = os.path.join(BASE_DIR, "data")  # Bundled resources and generated benchmarks
LOGS_DIR = os.path.join(BASE_DIR, "logs")  # Centralized logs folder

# Stop-word list shipped with the toolkit (versioned file, one word per line)
STOPWORDS_FILE = os.getenv("EVENT_QE_STOPWORDS", os.path.join(DATA_DIR, "stopwords_v1.txt"))

# Default output directory for command results
DEFAULT_OUTPUT_DIR = os.getenv("EVENT_QE_OUT", os.path.join(BASE_DIR, "out"))
DEFAULT_BENCHMARK_DIR = os.path.join(DATA_DIR, "benchmark")

# Application Constants
LOGGER_NAME = "event_qe"
LOG_LEVEL = os.getenv("EVENT_QE_LOG_LEVEL", "INFO")

# Corpus time range (inclusive)
YEAR_MIN = int(os.getenv("EVENT_QE_YEAR_MIN", 1981))
YEAR_MAX = int(os.getenv("EVENT_QE_YEAR_MAX", 2018))

# Event dataset filters
MIN_VIEWS = 5000.0
MIN_REFS = 15

# Event detection
MIN_SCORE = 0.003
MU = 0.5
MAX_EVENTS_PER_TERM = 10
MIN_SURFACE_OCCURRENCES = 2
FREQUENCY_CLASSIFY_THRESHOLD = 0.001

# Expansion
LAMBDA = 0.8
K_CANDIDATES = 20
ALPHA = 3.0
BETA = 1.0
GAMMA = 1.0
DELTA = 1.0
N_EXPANSION_TERMS = 100
TEMPREL_K = 5
TEMPREL_EPSILON = 0.01

# Projection
K_ANCHORS = 30
MIN_ANCHORS = 2
MAX_ITERATIONS = 500
GRADIENT_TOLERANCE = 1e-6

# Retrieval
INTERP_ALPHA = 0.6
DEPTH = 1000
EVAL_CUTOFF = 10

# Embedding text format precision when writing models
MODEL_PRECISION = int(os.getenv("EVENT_QE_MODEL_PRECISION", 6))

DEFAULT_SEED = 13

# Ensure required directories exist
os.makedirs(DATA_DIR, exist_ok=True)  # Ensure the data directory exists
os.makedirs(LOGS_DIR, exist_ok=True)  # Ensure the logs directory exists
