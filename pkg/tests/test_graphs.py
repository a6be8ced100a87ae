import numpy as np

from matchnet.graphs import realize_gender_network


def test_empty_graph_at_zero_effort():
    rng = np.random.default_rng(1)
    g = realize_gender_network(rng, 100, 50, 0.0, 0.0)
    assert g.indices.size == 0
    assert g.edge_count == 0


def test_adjacency_is_symmetric_without_self_loops():
    rng = np.random.default_rng(2)
    g = realize_gender_network(rng, 500, 400, 2.0, 1.0)
    pairs = set()
    for i in range(500):
        for j in g.neighbors(i):
            assert j != i
            pairs.add((i, int(j)))
    assert all((j, i) in pairs for i, j in pairs)


def test_no_duplicate_neighbors():
    rng = np.random.default_rng(3)
    g = realize_gender_network(rng, 300, 150, 3.0, 3.0)
    for i in range(300):
        nb = g.neighbors(i)
        assert len(set(nb.tolist())) == nb.size


def test_mean_degree_matches_uniform_profile():
    # with effort s for everyone, pair probability is s/n and the mean
    # degree is (n-1)s/n ~ s
    rng = np.random.default_rng(4)
    n, s, reps = 10_000, 1.5, 8
    degs = []
    for _ in range(reps):
        g = realize_gender_network(rng, n, n, s, 0.0)
        degs.append(2 * g.edge_count / n)
    mean = np.mean(degs)
    se = s / np.sqrt(n * reps)  # Poisson-scale noise bound
    assert abs(mean - s * (n - 1) / n) < 4 * se


def test_block_rates_match_probabilities():
    rng = np.random.default_rng(5)
    n, n_high = 4000, 3200
    s_h, s_l = 2.0, 1.0
    y = n_high * s_h + (n - n_high) * s_l
    g = realize_gender_network(rng, n, n_high, s_h, s_l)
    hh = hl = ll = 0
    for i in range(n):
        for j in g.neighbors(i):
            if j < i:
                continue
            if i < n_high and j < n_high:
                hh += 1
            elif i >= n_high and j >= n_high:
                ll += 1
            else:
                hl += 1
    exp_hh = n_high * (n_high - 1) / 2 * s_h * s_h / y
    exp_hl = n_high * (n - n_high) * s_h * s_l / y
    exp_ll = (n - n_high) * (n - n_high - 1) / 2 * s_l * s_l / y
    for got, want in ((hh, exp_hh), (hl, exp_hl), (ll, exp_ll)):
        assert abs(got - want) < 4 * np.sqrt(want)


def test_clipped_pairs_counted():
    rng = np.random.default_rng(6)
    # aggregate 4*1 so pair probability 25/4 clips for every pair
    g = realize_gender_network(rng, 4, 4, 5.0, 1.0)
    assert g.clipped_pairs == 6
    assert g.edge_count == 6  # complete graph on 4 nodes


def test_determinism_given_seed():
    g1 = realize_gender_network(np.random.default_rng(7), 1000, 800, 2.0, 1.0)
    g2 = realize_gender_network(np.random.default_rng(7), 1000, 800, 2.0, 1.0)
    assert np.array_equal(g1.indptr, g2.indptr)
    assert np.array_equal(g1.indices, g2.indices)
