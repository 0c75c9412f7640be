import math
import sys

import numpy as np
import pytest

from pairtune.benchmarks import monotone
from pairtune.driver import (EXTERNAL, MINIMIZE, SYNTHETIC, DriverSpec, Sample, SampleDatabase,
                             evaluate, load_db, save_db, write_settings_file)
from pairtune.errors import (DataFormatError, EvaluationError, FingerprintError,
                             InvalidSettingError)
from pairtune.space import ConfigSpace, ParamSpec


def script(tmp_path, body, name="measure.py"):
    path = tmp_path / name
    path.write_text("import sys\n" + body)
    return [sys.executable, str(path)]


def external(cmd, **kw):
    return DriverSpec(mode=EXTERNAL, command=cmd, **kw)


class TestDriverSpec:
    @pytest.mark.parametrize("kw", [
        dict(mode="remote"), dict(mode=EXTERNAL), dict(benchmark="nope"),
        dict(benchmark="monotone", repetitions=0), dict(benchmark="monotone", timeout=0),
        dict(benchmark="monotone", aggregation="mode"), dict(benchmark="monotone", sense="up"),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            DriverSpec(**kw)


class TestSynthetic:
    def test_closed_form(self):
        space = ConfigSpace.unit(1)
        sample = evaluate(DriverSpec(benchmark="monotone"), space, [0.7])
        assert sample.performance == monotone(np.array([0.7]))

    def test_uses_normalized_coordinates(self):
        space = ConfigSpace((ParamSpec("x", "continuous", 10, 20),))
        sample = evaluate(DriverSpec(benchmark="monotone"), space, [17.0])
        assert sample.performance == monotone(np.array([0.7]))
        assert sample.normalized == (0.7,) or math.isclose(sample.normalized[0], 0.7)

    def test_minimize_negates_score_only(self):
        sample = evaluate(DriverSpec(benchmark="monotone", sense=MINIMIZE),
                          ConfigSpace.unit(2), [0.2, 0.4])
        assert sample.score == -sample.performance
        assert sample.performance > 0

    def test_deterministic(self):
        space = ConfigSpace.unit(4)
        for name in ("monotone", "plateau-cliff", "multimodal", "workload-shift"):
            a = evaluate(DriverSpec(benchmark=name), space, [0.1, 0.5, 0.9, 0.3])
            b = evaluate(DriverSpec(benchmark=name), space, [0.1, 0.5, 0.9, 0.3])
            assert a.performance == b.performance

    def test_invalid_setting(self, mixed_space):
        with pytest.raises(InvalidSettingError):
            evaluate(DriverSpec(benchmark="monotone"), mixed_space, [1, 0.5, "fast"])


class TestExternal:
    def test_protocol(self, tmp_path):
        cmd = script(tmp_path, "print('42.5')\n")
        sample = evaluate(external(cmd), ConfigSpace.unit(1), [0.3])
        assert sample.performance == 42.5

    def test_settings_file_contents(self, tmp_path, mixed_space):
        cmd = script(tmp_path, "text = open(sys.argv[1]).read()\n"
                     "kv = dict(line.split('=') for line in text.splitlines())\n"
                     "assert kv == {'buffer_mb': '256', 'ratio': '0.25', 'mode': 'safe'}, kv\n"
                     "print(len(text))\n")
        sample = evaluate(external(cmd), mixed_space, [256, 0.25, "safe"])
        assert sample.performance == len("buffer_mb=256\nratio=0.25\nmode=safe\n")

    def test_placeholder(self, tmp_path):
        cmd = script(tmp_path, "print(1.0 if sys.argv[1] == '--conf' else 0.0)\n")
        cmd += ["--conf", "{settings}"]
        # the path lands after --conf, not at the end
        cmd = cmd[:2] + ["--conf", "{settings}"]
        assert evaluate(external(cmd), ConfigSpace.unit(1), [0.1]).performance == 1.0

    def test_median_of_repetitions(self, tmp_path):
        counter = tmp_path / "count"
        counter.write_text("0")
        cmd = script(tmp_path, f"p = {str(counter)!r}\nk = int(open(p).read())\n"
                     "open(p, 'w').write(str(k + 1))\nprint([10, 12, 50][k])\n")
        sample = evaluate(external(cmd, repetitions=3), ConfigSpace.unit(1), [0.5])
        assert sample.performance == 12.0
        assert sample.spread == (10.0, 50.0)

    @pytest.mark.parametrize("body,fragment", [
        ("sys.exit(3)\n", "status 3"),
        ("print('fast')\n", "not a single number"),
        ("print('1 2')\n", "not a single number"),
        ("print('nan')\n", "non-finite"),
        ("import time\ntime.sleep(5)\n", "timed out"),
    ])
    def test_failures(self, tmp_path, body, fragment):
        cmd = script(tmp_path, body)
        with pytest.raises(EvaluationError) as info:
            evaluate(external(cmd, timeout=0.5), ConfigSpace.unit(1), [0.5])
        assert fragment in str(info.value)

    def test_failure_keeps_raw_output(self, tmp_path):
        cmd = script(tmp_path, "print('warming up')\nprint('oops')\n")
        with pytest.raises(EvaluationError) as info:
            evaluate(external(cmd), ConfigSpace.unit(1), [0.5])
        assert "warming up" in info.value.raw_output

    def test_missing_executable(self, tmp_path):
        with pytest.raises(EvaluationError):
            evaluate(external([str(tmp_path / "absent")]), ConfigSpace.unit(1), [0.5])

    def test_retries(self, tmp_path):
        counter = tmp_path / "count"
        counter.write_text("0")
        cmd = script(tmp_path, f"p = {str(counter)!r}\nk = int(open(p).read())\n"
                     "open(p, 'w').write(str(k + 1))\nsys.exit(1) if k < 2 else print(7)\n")
        with pytest.raises(EvaluationError):
            evaluate(external(cmd, retries=1), ConfigSpace.unit(1), [0.5])
        sample = evaluate(external(cmd, retries=1), ConfigSpace.unit(1), [0.5])
        assert sample.performance == 7.0

    def test_environment_passes_through(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PAIRTUNE_TEST_VALUE", "3.25")
        cmd = script(tmp_path, "import os\nprint(os.environ['PAIRTUNE_TEST_VALUE'])\n")
        assert evaluate(external(cmd), ConfigSpace.unit(1), [0.5]).performance == 3.25


class TestSample:
    def test_finite(self):
        with pytest.raises(ValueError):
            Sample((0.5,), (0.5,), math.inf, math.inf)


class TestDatabase:
    def rows(self, space):
        driver = DriverSpec(benchmark="monotone")
        return [evaluate(driver, space, s) for s in
                ([16, 0.0, "fast"], [1024, 1 / 3, "off"], [500, 0.1 + 0.2, "balanced"])]

    def test_round_trip(self, tmp_path, mixed_space):
        db = SampleDatabase(mixed_space, units="ops/s", rows=self.rows(mixed_space))
        path = tmp_path / "samples.csv"
        save_db(db, path)
        again = load_db(path, mixed_space)
        assert again.rows == db.rows
        assert (again.sense, again.units) == ("maximize", "ops/s")

    def test_header(self, tmp_path, mixed_space):
        path = tmp_path / "samples.csv"
        save_db(SampleDatabase(mixed_space), path)
        header = path.read_text().splitlines()[0]
        assert header == "buffer_mb,ratio,mode,performance,performance_min,performance_max"

    def test_empty_round_trip(self, tmp_path, mixed_space):
        path = tmp_path / "samples.csv"
        save_db(SampleDatabase(mixed_space), path)
        assert len(load_db(path, mixed_space)) == 0

    def test_minimize_round_trip(self, tmp_path):
        space = ConfigSpace.unit(2)
        rows = [evaluate(DriverSpec(benchmark="monotone", sense=MINIMIZE), space, [0.1, 0.2])]
        path = tmp_path / "db.csv"
        save_db(SampleDatabase(space, MINIMIZE, rows=rows), path)
        again = load_db(path, space)
        assert again.rows == rows and again.scores()[0] < 0

    def test_renamed_param(self, tmp_path, mixed_space):
        path = tmp_path / "samples.csv"
        save_db(SampleDatabase(mixed_space, rows=self.rows(mixed_space)), path)
        doc = mixed_space.to_dict()
        doc["params"][0]["name"] = "buffer_kb"
        with pytest.raises(FingerprintError):
            load_db(path, ConfigSpace.from_dict(doc))

    @pytest.mark.parametrize("mangle", [
        lambda t: t.replace("performance_max", "perf_max"),
        lambda t: t + "16,0.5\n",
        lambda t: t + "16,0.5,warp,1,1,1\n",
        lambda t: t + "16.5,0.5,fast,1,1,1\n",
        lambda t: t + "2000,0.5,fast,1,1,1\n",
        lambda t: t + "16,0.5,fast,inf,1,1\n",
    ])
    def test_malformed(self, tmp_path, mixed_space, mangle):
        path = tmp_path / "samples.csv"
        save_db(SampleDatabase(mixed_space, rows=self.rows(mixed_space)), path)
        path.write_text(mangle(path.read_text()))
        with pytest.raises(DataFormatError):
            load_db(path, mixed_space)

    def test_missing_sidecar(self, tmp_path, mixed_space):
        path = tmp_path / "samples.csv"
        path.write_text("buffer_mb,ratio,mode,performance,performance_min,performance_max\n")
        with pytest.raises(DataFormatError):
            load_db(path, mixed_space)

    def test_arrays(self, mixed_space):
        db = SampleDatabase(mixed_space, rows=self.rows(mixed_space))
        assert db.settings().shape == (3, 3)
        assert db.scores().tolist() == [r.score for r in db.rows]

    def test_settings_file(self, tmp_path, mixed_space):
        path = tmp_path / "s.conf"
        write_settings_file(mixed_space, [64, 0.5, "off"], path)
        assert path.read_text() == "buffer_mb=64\nratio=0.5\nmode=off\n"
