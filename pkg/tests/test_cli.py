import json

import numpy as np
import pytest

from ergodix.cli import main
from ergodix.operators import matrix_to_json
from ergodix.systems import cyclic_shift_matrix


def write_cfg(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


FOLNER_CFG = {
    "group": {"q": 1},
    "windows": {"shape": "box", "n_min": 1, "n_max": 20},
    "shifts": [[1]],
    "set": {"kind": "residue", "modulus": 3, "residues": [0]},
    "candidates": [[0], [1], [2]],
}

MIX_CFG = {
    "system": {"kind": "shift", "q": 1, "d": 2},
    "windows": {"shape": "box", "n_min": 1, "n_max": 15},
    "observables": {"a": {"kind": "pauli", "sites": [0], "label": "Z"},
                    "b": {"kind": "pauli", "sites": [0], "label": "Z"}},
    "hom": {"kind": "scalar", "m": 1},
    "statistics": ["weak-mixing", "square", "abelianness", "ergodic-average"],
}


class TestExitCodes:
    def test_unknown_top_level_key(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "c.json", {"system": {"kind": "shift", "q": 1, "d": 2},
                                             "mystery": 1})
        assert main(["split", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
        assert "unknown keys" in capsys.readouterr().err

    def test_unknown_nested_key(self, tmp_path):
        bad = dict(FOLNER_CFG)
        bad["windows"] = {"shape": "box", "n_min": 1, "n_max": 5, "hue": 3}
        cfg = write_cfg(tmp_path, "c.json", bad)
        assert main(["folner", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_missing_required_key(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"group": {"q": 1}})
        assert main(["folner", "--config", cfg, "--out", str(tmp_path / "o")]) == 2

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["split", "--config", str(path),
                     "--out", str(tmp_path / "o")]) == 2

    def test_invariants_need_seed(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"scale": 0.05})
        assert main(["invariants", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2

    def test_success_exit_zero(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", FOLNER_CFG)
        assert main(["folner", "--config", cfg, "--out", str(tmp_path / "o")]) == 0


class TestFolnerCommand:
    def test_outputs(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", FOLNER_CFG)
        out = tmp_path / "o"
        assert main(["folner", "--config", cfg, "--out", str(out)]) == 0
        csv_lines = (out / "folner.csv").read_text().strip().splitlines()
        assert csv_lines[0] == "n,window_size,tempelman_ratio,defect_1"
        for line in csv_lines[1:]:
            n_str, size, ratio, defect = line.split(",")
            n = int(n_str)
            assert int(size) == 2 * n + 1
            assert float(ratio) == (4 * n + 1) / (2 * n + 1)
            assert float(defect) == 2 / (2 * n + 1)
        rep = read_json(out / "folner.json")
        assert rep["schema"] == "ergodix/1"
        assert rep["witness"]["accepted"] is True
        assert rep["witness"]["best_ratio"] >= 1 / 3


class TestMixCommand:
    def test_exact_defect_column(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", MIX_CFG)
        out = tmp_path / "o"
        assert main(["mix", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "mix_weak_mixing.csv").read_text().strip().splitlines()[1:]
        for line in lines:
            n, size, value = line.split(",")
            assert float(value) == 1 / (2 * int(n) + 1)
        rep = read_json(out / "mix.json")
        assert rep["statistics"]["weak-mixing"]["verdict"] == \
            rep["statistics"]["square"]["verdict"]


class TestVdcCommand:
    def test_weyl_report(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "sequence": {"kind": "weyl-quadratic", "alpha": 0.41421356237309515,
                         "vector": [[1.0, 0.0]]},
            "windows": {"shape": "box", "n_min": 100, "n_max": 400, "stride": 100},
        })
        out = tmp_path / "o"
        assert main(["vdc", "--config", cfg, "--out", str(out)]) == 0
        rep = read_json(out / "vdc.json")
        assert rep["verdict"]["hypothesis_satisfied"] is True
        assert rep["gamma_window_index"] == 400
        assert rep["gamma_statistic"][-1][1] < 0.05


class TestHigherCommand:
    def test_matrix_homomorphism_on_plane(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "system": {"kind": "shift", "q": 2, "d": 2},
            "windows": {"shape": "box", "n_min": 1, "n_max": 4},
            "observables": [{"kind": "pauli", "sites": [[0, 0]], "label": "Z"}] * 3,
            "homs": [{"kind": "scalar", "m": 1},
                     {"kind": "matrix", "entries": [[1, 1], [0, 1]]}],
        })
        out = tmp_path / "o"
        assert main(["higher", "--config", cfg, "--out", str(out)]) == 0
        lines = (out / "higher.csv").read_text().strip().splitlines()[1:]
        # sign observables cancel on the collision line, so the defect is 0
        for line in lines:
            assert float(line.split(",")[2]) == 0.0

    def test_rank_mismatch_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "system": {"kind": "shift", "q": 2, "d": 2},
            "windows": {"shape": "box", "n_min": 1, "n_max": 2},
            "observables": [{"kind": "pauli", "sites": [[0, 0]], "label": "Z"}] * 2,
            "homs": [{"kind": "matrix", "entries": [[1]]}],
        })
        assert main(["higher", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


class TestSplitCommand:
    def test_clock_shift(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"system": {"kind": "clock-shift", "Q": 5}})
        out = tmp_path / "o"
        assert main(["split", "--config", cfg, "--out", str(out)]) == 0
        rep = read_json(out / "split.json")
        assert rep["dim_H1"] == 1
        assert rep["dim_H0"] == 25
        assert rep["factor_dim"] == 25
        assert rep["kind"] == "has-nontrivial-compact-factor"

    def test_not_ergodic(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"system": {"kind": "rotation", "p": 1, "Q": 4}})
        out = tmp_path / "o"
        assert main(["split", "--config", cfg, "--out", str(out)]) == 0
        rep = read_json(out / "split.json")
        assert rep["kind"] == "not-ergodic"
        assert rep["dim_H1"] == 4


class TestSzemerediCommand:
    def test_quasilocal(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {
            "system": {"kind": "shift", "q": 1, "d": 2},
            "observable": {"kind": "matrix", "sites": [0],
                           "entries": matrix_to_json(np.diag([1.0, 0.0]))},
            "exponents": [1, 2],
            "windows": {"shape": "box", "n_min": 1, "n_max": 20},
        })
        out = tmp_path / "o"
        assert main(["szemeredi", "--config", cfg, "--out", str(out)]) == 0
        rep = read_json(out / "szemeredi.json")
        assert rep["branch"] == "weakly-mixing"
        assert rep["target"] == pytest.approx(1 / 8)
        assert rep["szemeredi_tail_min"] > 0


class TestCompactCommand:
    def test_rotation_certificates(self, tmp_path):
        v = cyclic_shift_matrix(5)
        a_pos = 0.5 * (np.eye(5) + 0.5 * (v + v.conj().T))
        cfg = write_cfg(tmp_path, "c.json", {
            "system": {"kind": "rotation", "p": 1, "Q": 5},
            "observable": {"kind": "named", "name": "V"},
            "positive_observable": {"kind": "matrix",
                                    "entries": matrix_to_json(a_pos)},
            "epsilon": 0.1,
            "exponents": [1, 2],
            "scan": {"shape": "box", "n": 25},
            "windows": {"shape": "box", "n_min": 1, "n_max": 10},
            "candidates": [[0], [1], [2], [3], [4]],
        })
        out = tmp_path / "o"
        assert main(["compact", "--config", cfg, "--out", str(out)]) == 0
        rep = read_json(out / "compact.json")
        assert rep["separated"]["count"] == 5
        members = [g[0] for g in rep["return_set"]["members"]]
        assert members == list(range(-25, 26, 5))
        assert rep["return_set"]["chain_ok"] is True
        assert all(b["holds"] for b in rep["correlation_bounds"])
        assert rep["szemeredi"]["tail_min"] > 0
        assert "scan window" in rep["szemeredi"]["note"]


class TestInvariantsCommand:
    def test_passes_and_reports(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"seed": 11, "scale": 0.05})
        out = tmp_path / "o"
        assert main(["invariants", "--config", cfg, "--out", str(out)]) == 0
        rep = read_json(out / "invariants.json")
        assert rep["passed"] is True
        assert len(rep["results"]) >= 25

    def test_seed_flag_overrides(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", {"scale": 0.05})
        out = tmp_path / "o"
        assert main(["invariants", "--config", cfg, "--out", str(out),
                     "--seed", "3"]) == 0
        assert read_json(out / "invariants.json")["seed"] == 3


class TestDeterminism:
    @pytest.mark.parametrize("command,cfg", [
        ("folner", FOLNER_CFG),
        ("mix", MIX_CFG),
        ("vdc", {
            "sequence": {"kind": "weyl-quadratic", "alpha": 0.41421356237309515,
                         "vector": [[1.0, 0.0]]},
            "windows": {"shape": "box", "n_min": 50, "n_max": 200, "stride": 50},
        }),
        ("invariants", {"seed": 5, "scale": 0.05}),
    ])
    def test_threads_do_not_change_bytes(self, tmp_path, command, cfg):
        cfg_path = write_cfg(tmp_path, "c.json", cfg)
        outs = []
        for threads, tag in ((1, "a"), (8, "b")):
            out = tmp_path / tag
            assert main([command, "--config", cfg_path, "--out", str(out),
                         "--threads", str(threads)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert outs[0] == outs[1]

    def test_rerun_identical(self, tmp_path):
        cfg_path = write_cfg(tmp_path, "c.json", MIX_CFG)
        blobs = []
        for tag in ("x", "y"):
            out = tmp_path / tag
            assert main(["mix", "--config", cfg_path, "--out", str(out)]) == 0
            blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert blobs[0] == blobs[1]
