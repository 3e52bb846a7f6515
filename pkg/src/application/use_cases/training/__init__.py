from src.application.use_cases.training.finetune import FinetuneCommand, FinetuneUseCase
from src.application.use_cases.training.train_network import (
    TrainNetworkCommand,
    TrainNetworkUseCase,
)

__all__ = [
    "FinetuneCommand",
    "FinetuneUseCase",
    "TrainNetworkCommand",
    "TrainNetworkUseCase",
]
