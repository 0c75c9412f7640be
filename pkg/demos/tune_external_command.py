r"""
Tuning a program through the command protocol
---------------------------------------------
The system under tune is any command that reads a ``name=value`` settings
file and prints one number. Here a small Python script stands in for a
server whose throughput depends on a buffer size, a ratio and a mode.
"""
import sys
import tempfile
from pathlib import Path

from pairtune.driver import EXTERNAL, DriverSpec, SampleDatabase, load_db, save_db
from pairtune.space import ConfigSpace
from pairtune.tuner import TuningConfig, emit_report, sample_initial, tune

work = Path(tempfile.mkdtemp(prefix="pairtune-demo-"))
(work / "server.py").write_text("""
import math, sys
v = dict(line.split('=', 1) for line in open(sys.argv[1]).read().split())
mode = {'fast': 1.2, 'safe': 1.0, 'balanced': 1.1}[v['mode']]
print(mode * math.log(float(v['buffer_mb'])) * (1 - (float(v['ratio']) - 0.35) ** 2))
""")

space = ConfigSpace.from_dict({"params": [
    {"name": "buffer_mb", "kind": "integer", "min": 16, "max": 4096},
    {"name": "ratio", "kind": "continuous", "min": 0.0, "max": 1.0},
    {"name": "mode", "kind": "categorical", "levels": ["safe", "balanced", "fast"]},
]})
driver = DriverSpec(mode=EXTERNAL, command=[sys.executable, str(work / "server.py")],
                    units="kops/s")

#%%
# Measure a first batch and keep it in a sample database.
db_path = work / "samples.csv"
rows = sample_initial(space, driver, 12, seed=0)
save_db(SampleDatabase(space, units="kops/s", rows=rows), db_path)
print(f"{len(rows)} samples stored in {db_path.name}")

#%%
# Later, tune with a budget of 40 and reuse the stored samples; 8 more
# initial samples and 20 validation samples are measured.
stored = load_db(db_path, space).rows
result = tune(space, driver, TuningConfig(budget=40, seed=0), initial=stored)
print(f"{len(result.history)} evaluations, best {result.best.performance:.3f} kops/s at")
for name, value in zip(space.names, result.best.setting):
    print(f"  {name} = {value}")

#%%
# The report holds the history, the boxes that were searched and timings.
emit_report(result, space, work / "report.json")
print("report written to", work / "report.json")
