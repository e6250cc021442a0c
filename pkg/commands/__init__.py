from commands.benchmark import make_benchmark_command
from commands.evaluate import eval_command
from commands.project import project_command
from commands.query import classify_command, detect_command, expand_command, search_command

ALL_COMMANDS = (
    project_command,
    classify_command,
    detect_command,
    expand_command,
    search_command,
    eval_command,
    make_benchmark_command,
)
