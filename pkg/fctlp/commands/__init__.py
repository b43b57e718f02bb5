from fctlp.commands import bench, compare, run, selftest

# Subcommand modules; each exposes register(subparsers) and handle(args) -> exit code
COMMANDS = (run, bench, compare, selftest)
