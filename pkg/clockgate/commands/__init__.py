from clockgate.commands import budget, design, simulate, sweep

COMMANDS = {
    "design": design,
    "simulate": simulate,
    "budget": budget,
    "sweep": sweep,
}


def register_all(subparsers) -> None:
    for command in COMMANDS.values():
        command.register(subparsers)
