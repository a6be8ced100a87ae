import json
import subprocess
import sys

import numpy as np
import pytest

from matchnet import (
    ModelParams,
    SocializationProfile,
    compare_to_closed_form,
    generate_population,
    monte_carlo,
    psi_homogeneous,
    realize_network,
    run_round,
    upsilon_homogeneous,
)
from matchnet.errors import ParameterError

BENCH = SocializationProfile.uniform(1.5)
HOM = ModelParams(a=.5, d=.015, c=.005, h=1.0)
HET = ModelParams(a=.5, d=.015, c=.003, h=.8, Y=2.0)


def _rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


# ------------------------------------------------------------- population

def test_population_composition():
    pop = generate_population(4, .5)
    assert pop.n_high == 2
    assert list(pop.types) == [1, 1, 0, 0]
    assert list(pop.initial_spouse) == [0, 1, 2, 3]


def test_population_all_high_and_share_rounding():
    assert generate_population(10, 1.0).n_high == 10
    assert generate_population(1000, .8).n_high == 800


def test_population_degenerate_composition_warns():
    with pytest.warns(UserWarning):
        generate_population(4, .01)
    with pytest.raises(ParameterError):
        generate_population(1, .5)


# ------------------------------------------------------------- one round

def test_round_no_divorce_no_network_marriages():
    pop = generate_population(2000, 1.0)
    params = ModelParams(a=.5, d=1e-12, c=.005, h=1.0)
    rng = _rng(1)
    graphs = realize_network(pop, BENCH, rng)
    out = run_round(pop, graphs, params, rng)
    assert out.divorces.sum() == 0
    assert out.psi_marriages.sum() == 0 and out.ups_marriages.sum() == 0
    assert out.direct_marriages.sum() == 0  # nobody single to marry
    assert out.needless_dates.sum() > 0     # dates exist, all needless


def test_round_no_meetings_no_channels():
    pop = generate_population(2000, 1.0)
    params = ModelParams(a=1e-12, d=.015, c=.005, h=1.0)
    rng = _rng(2)
    graphs = realize_network(pop, BENCH, rng)
    out = run_round(pop, graphs, params, rng)
    assert out.direct_meetings.sum() == 0
    assert out.psi_marriages.sum() == 0 and out.ups_marriages.sum() == 0
    assert out.needless_dates.sum() == 0


def test_round_channel_counts_sum_to_marriages_per_gender():
    pop = generate_population(5000, .8)
    rng = _rng(3)
    graphs = realize_network(pop, BENCH, rng)
    out = run_round(pop, graphs, HET, rng)
    per_gender = (out.direct_marriages.sum(axis=1)
                  + out.psi_marriages.sum(axis=(1, 2))
                  + out.ups_marriages.sum(axis=(1, 2)))
    assert per_gender[0] == per_gender[1] == out.total_marriages
    assert out.total_marriages > 0


def test_round_psi_cell_disjoint_from_meetings():
    pop = generate_population(3000, .8)
    rng = _rng(4)
    graphs = realize_network(pop, BENCH, rng)
    out = run_round(pop, graphs, HET, rng)
    # every conditioning count is bounded by its population cell
    assert (out.psi_cell + out.ups_cell <= out.divorces).all()


def test_round_needless_dates_near_expected():
    pop = generate_population(20000, 1.0)
    total = 0
    reps = 10
    for k in range(reps):
        rng = _rng(100 + k)
        graphs = realize_network(pop, BENCH, rng)
        out = run_round(pop, graphs, HOM, rng)
        total += int(out.needless_dates.sum())
    expected = .5 * .985 * 20000 * 2 * reps
    se = np.sqrt(.5 * .985 * (1 - .5 * .985) * 20000 * 2 * reps)
    assert abs(total - expected) < 3 * se + reps * 60  # pairing surplus slack


def test_psi_rule_never_delivers_low_dates_to_high():
    pop = generate_population(4000, .8)
    rng = _rng(5)
    graphs = realize_network(pop, BENCH, rng)
    out = run_round(pop, graphs, HET, rng, pass_rule="psi-consistent")
    assert out.psi_access[:, 1, 0].sum() == 0      # high receiving low dates
    assert out.ups_access[:, 0, 1].sum() == 0      # low dated -> high friend


def test_upsilon_rule_delivers_cross_dates():
    pop = generate_population(4000, .8)
    rng = _rng(6)
    graphs = realize_network(pop, BENCH, rng)
    out = run_round(pop, graphs, HET, rng, pass_rule="upsilon-consistent")
    assert out.psi_access[:, 1, 0].sum() > 0


def test_unknown_pass_rule_rejected():
    pop = generate_population(100, .8)
    rng = _rng(7)
    graphs = realize_network(pop, BENCH, rng)
    with pytest.raises(ParameterError):
        run_round(pop, graphs, HET, rng, pass_rule="both")


# ------------------------------------------------------------ monte carlo

def test_monte_carlo_deterministic_and_thread_independent():
    a = monte_carlo(1500, 8, HET, BENCH, seed=9, threads=1)
    b = monte_carlo(1500, 8, HET, BENCH, seed=9, threads=3)
    assert a.summary_json() == b.summary_json()
    assert a.replication_csv() == b.replication_csv()
    c = monte_carlo(1500, 8, HET, BENCH, seed=10, threads=1)
    assert a.summary_json() != c.summary_json()


def test_monte_carlo_homogeneous_channels_close():
    est = monte_carlo(8000, 40, HOM, BENCH, seed=11, threads=2)
    psi = est.channels["psi"]
    ups = est.channels["ups"]
    assert abs(psi.estimate - psi_homogeneous(1.5, .5, .015)) <= 3 * psi.se
    assert abs(ups.estimate - upsilon_homogeneous(1.5, .015)) <= 3 * ups.se


def test_monte_carlo_report_applicability_matrix():
    est = monte_carlo(4000, 20, HET, BENCH, seed=12)
    rep = compare_to_closed_form(est, HET, BENCH)
    by_name = {c.channel: c for c in rep.checks}
    assert by_name["ups_hl"].status == "not-applicable"
    assert by_name["ups_lh"].status == "not-applicable"
    assert by_name["psi_hl"].status == "pass"
    assert by_name["psi_ll"].target == pytest.approx(0.13706, abs=1e-4)
    est_u = monte_carlo(4000, 20, HET, BENCH, seed=12,
                        pass_rule="upsilon-consistent")
    rep_u = compare_to_closed_form(est_u, HET, BENCH)
    by_name = {c.channel: c for c in rep_u.checks}
    assert by_name["ups_hl"].status in ("pass", "fail")
    assert by_name["psi_ll"].status == "not-applicable"


def test_monte_carlo_empty_cells_absent():
    # without divorce conditioning cells stay empty
    params = ModelParams(a=.5, d=1e-9, c=.005, h=1.0)
    est = monte_carlo(200, 2, params, BENCH, seed=13)
    assert est.channels == {}
    rep = compare_to_closed_form(est, params, BENCH)
    assert all(c.status == "absent" for c in rep.checks)


def test_monte_carlo_replication_csv_shape():
    est = monte_carlo(800, 5, HET, BENCH, seed=14)
    lines = est.replication_csv().strip().split("\n")
    assert len(lines) == 6  # header + 5 reps
    header = lines[0].split(",")
    assert "conflicts" in header and "pairing_surplus" in header
    payload = json.loads(est.summary_json())
    assert payload["config"]["seed"] == 14
    assert "channels" in payload


def test_backend_fallback_is_bit_identical():
    est = monte_carlo(1200, 6, HET, BENCH, seed=15)
    code = (
        "import matchnet as mn\n"
        "est = mn.monte_carlo(1200, 6, mn.ModelParams(a=.5, d=.015, c=.003,"
        " h=.8, Y=2.0), mn.SocializationProfile.uniform(1.5), seed=15)\n"
        "import sys; sys.stdout.write(est.summary_json())\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env={"MATCHNET_BACKEND": "numpy",
                                         "PATH": "/usr/bin:/bin"})
    assert out.returncode == 0, out.stderr
    assert out.stdout == est.summary_json()
