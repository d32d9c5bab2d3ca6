from macrobell.cli import run

run()
