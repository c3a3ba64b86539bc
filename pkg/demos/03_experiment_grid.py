"""
A small slice of the experiment grid
====================================

The command-line runner sweeps protocols, node counts, speeds and seeds. The
same machinery is available from Python; here a reduced grid keeps the run
short. Epidemic flooding is included as the delivery upper bound.
"""

import io
import sys

from orion_dtn.experiment import parse_config, run_matrix, summarize, write_results_csv

matrix = parse_config(
    """
    protocols = orion, prophet, epidemic
    nodes = 30, 70
    speeds = 10
    seeds = 1..3
    duration = 300
    """
)
print(f"{len(matrix.cells())} scenarios\n")
rows = run_matrix(matrix)
print(summarize(rows))

buf = io.StringIO()
write_results_csv(rows, buf)
sys.stdout.write(buf.getvalue())
