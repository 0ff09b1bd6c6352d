import pathlib
import runpy

import pytest

DEMOS = pathlib.Path(__file__).resolve().parent.parent / "demos"
QUICK = ["01_pose_geometry.py", "02_dissimilarities_and_gradients.py",
         "03_noise_models_and_intensities.py", "04_fisher_information.py",
         "05_bounds_and_constraints.py"]


@pytest.mark.parametrize("name", QUICK)
def test_demo_runs(name, capsys):
    runpy.run_path(str(DEMOS / name), run_name="__main__")
    assert capsys.readouterr().out
