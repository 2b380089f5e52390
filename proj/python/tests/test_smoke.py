import math

import pytest

import plheat


def test_orlicz_identity():
    for p in (1.5, 3.0):
        q = (0.3, -1.7)
        v = plheat.v_transform(q, p)
        s = plheat.s_flux(q, p, 0.0)
        assert math.isclose(v[0] ** 2 + v[1] ** 2, s[0] * q[0] + s[1] * q[1], rel_tol=1e-12)


def test_mesh_levels_refine():
    coarse = plheat.mesh_size("slit", 1)
    fine = plheat.mesh_size("slit", 2)
    assert fine["triangles"] == 4 * coarse["triangles"]
    assert math.isclose(fine["h_max"], coarse["h_max"] / 2)


def test_config_parsing():
    c = plheat.parse_config("experiment = known_solution\np = 3  # comment\nlevels = 1,2\nsteps = 4,8\n")
    assert c.experiment == "known_solution"
    assert c.p == 3.0
    assert c.levels == [1, 2]
    with pytest.raises(plheat.ConfigError):
        plheat.parse_config("experiment = slit\nbogus = 1\n")
    with pytest.raises(plheat.ConfigError):
        plheat.default_config("nope")


def test_small_study_round_trip(tmp_path):
    c = plheat.default_config("known_solution")
    c.levels = [1, 2, 3]
    c.steps = [4, 8, 16]
    c.output = tmp_path / "known.csv"
    reports = plheat.run_study(c)
    assert len(reports) == 3
    assert all(r.sq_l2_v > 0 for r in reports)
    text = (tmp_path / "known.csv").read_text()
    assert text.splitlines()[0] == plheat.CSV_HEADER
    assert plheat.to_csv(plheat.read_csv(text)) == text
    assert (tmp_path / "known.manifest").exists()
    slopes, ls = plheat.empirical_order(reports, "sqLinftyError+sqVerr1")
    assert len(slopes) == 2
    assert ls < 0
