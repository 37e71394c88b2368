from .handler import (
    TRAINING_FLAGS,
    CommandEvent,
    CommandHandler,
    add_common_flags,
    add_training_flags,
    command_handler,
    command_handlers,
    config_overrides,
)
from .report import EPOCH_COLUMNS, ReportWriter, read_report, write_labels
from . import assign, evaluate, sweep, train  # isort: skip
from .sweep import GRID_KEYS, parse_grid, recommend
from .train import load_dataset, run_training
