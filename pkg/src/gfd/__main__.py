from gfd.cli import run

run()
