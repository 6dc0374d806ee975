import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from hardrods.combinatorics import RodGeometry, exact_nu, exact_rates, refl_avg
from hardrods.confignet import (
    Configuration,
    column_path_counts,
    empirical_stats,
    enumerate_network,
    h2_offdiag_ratio,
    is_valid,
    sample_basis_state,
    sample_microstate,
    write_columns,
    write_edge_list,
)
from hardrods.exceptions import DomainError, ResourceError

SMALL = [(L, lam) for lam in (1, 2, 3, 4) for L in range(lam + 1, 15)]


class TestConfiguration:
    def test_valid_and_invalid(self):
        g = RodGeometry(10, 1)
        c = Configuration(0b0000100001, g)
        assert c.rod_count == 2 and c.sites == [0, 5]
        assert str(c) == "1000010000"
        with pytest.raises(DomainError):
            Configuration(0b11, g)
        # sites 0 and 9 are neighbours on the ring
        with pytest.raises(DomainError):
            Configuration(1 | 1 << 9, g)
        with pytest.raises(DomainError):
            Configuration(1 << 10, g)

    def test_is_valid_matches_oracle(self, oracle):
        for L, lam in [(7, 1), (9, 2), (11, 4)]:
            for b in range(1 << L):
                assert is_valid(b, L, lam) == oracle.ok(b, L, lam)


class TestEnumeration:
    def test_two_sites(self):
        net = enumerate_network(RodGeometry(2, 1))
        assert net.n_states == 3
        assert sorted(str(c) for c in net) == ["00", "01", "10"]
        assert list(net.column_sizes) == [1, 2]

    def test_ten_sites(self):
        net = enumerate_network(RodGeometry(10, 1))
        assert net.n_states == 123
        assert list(net.column_sizes) == [1, 10, 35, 50, 25, 2]

    def test_thirty_sites(self):
        g = RodGeometry(30, 3)
        net = enumerate_network(g)
        assert net.n_states == 15812
        assert net.n_states == sum(exact_nu(g, n) for n in range(g.n_max + 1))

    @pytest.mark.parametrize("L, lam", SMALL)
    def test_against_brute_force(self, oracle, L, lam):
        net = enumerate_network(RodGeometry(L, lam))
        cols = oracle.columns(L, lam)
        assert [sorted(c.tolist()) for c in net.columns] == [sorted(c) for c in cols]

    @pytest.mark.parametrize("L, lam", SMALL)
    def test_graph_invariants(self, L, lam):
        g = RodGeometry(L, lam)
        net = enumerate_network(g)
        A = net.adjacency
        assert (A != A.T).nnz == 0
        assert A.diagonal().sum() == 0
        i, j = net.edges().T
        diff = net.states[i] ^ net.states[j]
        assert np.all(np.bitwise_count(diff) == 1)
        assert np.all(np.abs(net.rod_counts[i] - net.rod_counts[j]) == 1)
        # column-mean degree equals t_up + t_down exactly
        up, down = exact_rates(g)
        for n in range(g.n_max + 1):
            col = net.column_slice(n)
            assert Fraction(int(net.degrees[col].sum()), col.stop - col.start) == up[n] + down[n]

    def test_index_round_trip(self):
        net = enumerate_network(RodGeometry(12, 2))
        for sid in range(net.n_states):
            c = net.configuration(sid)
            assert net.state_id(c.bits) == sid
            n, pos = net.index(c)
            assert n == c.rod_count and net.columns[n][pos] == c.bits
        with pytest.raises(DomainError):
            net.state_id(0b11)

    def test_cap(self):
        with pytest.raises(ResourceError, match="123"):
            enumerate_network(RodGeometry(10, 1), cap=100)

    def test_cap_from_environment(self, monkeypatch):
        monkeypatch.setenv("HARDRODS_STATE_CAP", "50")
        with pytest.raises(ResourceError):
            enumerate_network(RodGeometry(10, 1))

    def test_too_long_for_bitmask(self):
        with pytest.raises(ResourceError):
            enumerate_network(RodGeometry(64, 32), cap=10**9)


class TestStatistics:
    def test_table_row(self):
        s = empirical_stats(enumerate_network(RodGeometry(12, 1)), 2)
        assert abs(s.mean_loop - 8.22) <= 0.005
        assert abs(s.mean_refl - 0.54) <= 0.005
        assert abs(s.mean_trans - 2.22) <= 0.005

    def test_loop_two_sites(self):
        assert empirical_stats(enumerate_network(RodGeometry(2, 1)), 1).mean_loop == 1

    @pytest.mark.parametrize("L, lam", [(10, 1), (12, 2), (13, 3)])
    def test_matches_walk_oracle(self, oracle, L, lam):
        net = enumerate_network(RodGeometry(L, lam))
        for n in range(net.geometry.n_max + 1):
            c = column_path_counts(net, n)
            assert (c.loop(), c.refl(), c.trans()) == oracle.path_stats(L, lam, n)

    def test_at_most_two_reflection_paths(self):
        for L, lam in [(12, 1), (16, 2), (18, 3)]:
            net = enumerate_network(RodGeometry(L, lam))
            for n in range(net.geometry.n_max + 1):
                assert column_path_counts(net, n).max_refl_paths <= 2

    def test_reflection_closure_is_not_exact_in_general(self):
        """Past n = 2 the closed form underestimates the measured reflection average."""
        g = RodGeometry(12, 1)
        measured = empirical_stats(enumerate_network(g), 4).mean_refl
        assert measured == pytest.approx(0.175824175824, rel=1e-10)
        assert refl_avg(g, 4) == pytest.approx(0.171703296703, rel=1e-10)

    def test_h2_ratio(self):
        assert h2_offdiag_ratio(enumerate_network(RodGeometry(2, 1))) == 0.5
        e12 = h2_offdiag_ratio(enumerate_network(RodGeometry(12, 1)), "entry")
        e20 = h2_offdiag_ratio(enumerate_network(RodGeometry(20, 2)), "entry")
        assert e12 < 0.5 and e20 < e12
        with pytest.raises(DomainError):
            h2_offdiag_ratio(enumerate_network(RodGeometry(4, 1)), "max")

    def test_h2_ratio_against_matrix_square(self):
        net = enumerate_network(RodGeometry(11, 2))
        A2 = (net.adjacency @ net.adjacency).toarray()
        diag = np.trace(A2)
        off = A2.sum() - diag
        assert h2_offdiag_ratio(net) == pytest.approx(off / diag, rel=1e-14)
        N = net.n_states
        assert h2_offdiag_ratio(net, "entry") == pytest.approx((off / (N * (N - 1))) / (diag / N))


class TestSampling:
    def test_degenerate_columns(self):
        net = enumerate_network(RodGeometry(10, 1))
        alt = {0b0101010101, 0b1010101010}
        for seed in range(20):
            assert sample_microstate(net, 5, seed).bits in alt
            assert sample_microstate(net, 0, seed).bits == 0

    def test_deterministic(self):
        net = enumerate_network(RodGeometry(14, 1))
        assert sample_microstate(net, 3, 7) == sample_microstate(net, 3, 7)
        assert sample_basis_state(net, 7) == sample_basis_state(net, 7)

    def test_out_of_range(self):
        net = enumerate_network(RodGeometry(10, 1))
        with pytest.raises(DomainError):
            sample_microstate(net, 6, 0)

    def test_uniform_over_column(self):
        net = enumerate_network(RodGeometry(12, 1))
        draws = [sample_microstate(net, 2, s).bits for s in range(10000)]
        _, counts = np.unique(draws, return_counts=True)
        assert counts.size == 54
        # every cell inside 3 sigma of the multinomial and a chi-square check overall
        mean, sd = 10000 / 54, math.sqrt(10000 * (1 / 54) * (53 / 54))
        assert np.all(np.abs(counts - mean) <= 3 * sd)
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_basis_state_follows_column_sizes(self):
        net = enumerate_network(RodGeometry(10, 1))
        n = [sample_basis_state(net, s).rod_count for s in range(6000)]
        observed = np.bincount(n, minlength=6)
        expected = net.column_sizes / net.n_states * 6000
        assert stats.chisquare(observed, expected).pvalue > 1e-3


class TestExport:
    def test_files(self, tmp_path):
        net = enumerate_network(RodGeometry(4, 1))
        write_edge_list(net, tmp_path / "e.txt")
        write_columns(net, tmp_path / "c.txt")
        edges = (tmp_path / "e.txt").read_text().splitlines()
        cols = (tmp_path / "c.txt").read_text().splitlines()
        assert edges[0] == "# source target" and len(edges) == 1 + net.n_edges
        assert all(int(a) < int(b) for a, b in (e.split() for e in edges[1:]))
        assert cols[0] == "# state_id n bits"
        assert cols[1:] == ["0 0 0000", "1 1 1000", "2 1 0100", "3 1 0010", "4 1 0001",
                            "5 2 1010", "6 2 0101"]
