from .app import cli, main
from . import data, decode, ops, train
