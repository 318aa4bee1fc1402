"""CLI 명령 모음"""

from app.cli.commands import benchmark, estimate, frozen, select, stream, trajectory

COMMANDS = (estimate, select, benchmark, frozen, trajectory, stream)

__all__ = ["COMMANDS"]
