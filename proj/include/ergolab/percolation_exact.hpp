#ifndef ERGOLAB_PERCOLATION_EXACT_HPP
#define ERGOLAB_PERCOLATION_EXACT_HPP

#include <ergolab/graphing.hpp>
#include <ergolab/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ergolab {

namespace detail {

/// Integer adjacency matrix of one class under the 2n symbols
/// theta_1..theta_n, theta_1^{-1}..theta_n^{-1} (row sums 2n).
inline std::vector<std::vector<BigInt>> symbol_adjacency(const Graphing& g,
                                                         const std::vector<int>& cls) {
    const std::size_t c = cls.size();
    std::vector<int> pos(g.rel.size(), -1);
    for (std::size_t j = 0; j < c; ++j) pos[cls[j]] = static_cast<int>(j);
    std::vector<std::vector<BigInt>> a(c, std::vector<BigInt>(c, 0));
    for (std::size_t j = 0; j < c; ++j) {
        int y = cls[j];
        for (const auto& gen : g.gens) {
            a[j][pos[gen(y)]] += 1;
            a[j][pos[gen.inverse()(y)]] += 1;
        }
    }
    return a;
}

inline std::vector<std::vector<BigInt>> mat_mul(const std::vector<std::vector<BigInt>>& a,
                                                const std::vector<std::vector<BigInt>>& b) {
    const std::size_t n = a.size();
    std::vector<std::vector<BigInt>> c(n, std::vector<BigInt>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (a[i][k] == 0) continue;
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
        }
    return c;
}

}  // namespace detail

/// <T^k 1_Delta, 1_Delta>: the weighted count of closed length-k walks,
/// computed exactly via integer matrix powers per class.
inline Rat return_probability(const Graphing& g, int k) {
    if (k < 0) throw std::invalid_argument("negative walk length");
    Rat total = 0;
    for (const auto& cls : g.rel.classes) {
        auto a = detail::symbol_adjacency(g, cls);
        std::vector<std::vector<BigInt>> pw(cls.size(), std::vector<BigInt>(cls.size(), 0));
        for (std::size_t i = 0; i < cls.size(); ++i) pw[i][i] = 1;
        for (int t = 0; t < k; ++t) pw = detail::mat_mul(pw, a);
        for (std::size_t i = 0; i < cls.size(); ++i)
            total += g.rel.space.weight[cls[i]] * Rat(pw[i][i]);
    }
    return total;
}

/// One word over the 2n symbols; index i < n means theta_{i+1}, index n + i
/// means theta_{i+1}^{-1}.
struct CycleWord {
    std::vector<int> symbols;
};

/// mu(A_w): the measure of starting points whose trajectory under the word
/// is a simple cycle (returns at step k; all vertices and edges distinct).
inline Rat simple_cycle_measure(const Graphing& g, const CycleWord& w) {
    const int n = static_cast<int>(g.n());
    const int k = static_cast<int>(w.symbols.size());
    std::vector<Automorphism> inv;
    for (const auto& gen : g.gens) inv.push_back(gen.inverse());

    Rat mass = 0;
    for (std::size_t x = 0; x < g.rel.size(); ++x) {
        int cur = static_cast<int>(x);
        std::vector<int> seen{cur};
        std::vector<std::pair<int, int>> used;  // edge slot (base point, generator)
        bool simple = true;
        for (int t = 0; t < k && simple; ++t) {
            int s = w.symbols[t];
            int nxt, base;
            if (s < n) {
                nxt = g.gens[s](cur);
                base = cur;
            } else {
                nxt = inv[s - n](cur);
                base = nxt;
            }
            std::pair<int, int> slot{base, s % n};
            for (const auto& u : used)
                if (u == slot) simple = false;
            used.push_back(slot);
            if (t + 1 < k) {
                for (int v : seen)
                    if (v == nxt) simple = false;
                seen.push_back(nxt);
            } else if (nxt != static_cast<int>(x)) {
                simple = false;
            }
            cur = nxt;
        }
        if (simple && k >= 1) mass += g.rel.space.weight[x];
    }
    return mass;
}

/// mu(Fix(psi_{i_k} ... psi_{i_1})) for one word.
inline Rat fixed_measure(const Graphing& g, const CycleWord& w) {
    const int n = static_cast<int>(g.n());
    std::vector<Automorphism> inv;
    for (const auto& gen : g.gens) inv.push_back(gen.inverse());
    Rat mass = 0;
    for (std::size_t x = 0; x < g.rel.size(); ++x) {
        int cur = static_cast<int>(x);
        for (int s : w.symbols) cur = s < n ? g.gens[s](cur) : inv[s - n](cur);
        if (cur == static_cast<int>(x)) mass += g.rel.space.weight[x];
    }
    return mass;
}

/// Sum of mu(A_w) over all (2n)^k words of length k.
inline Rat total_simple_cycle_measure(const Graphing& g, int k) {
    const int m = 2 * static_cast<int>(g.n());
    Rat total = 0;
    CycleWord w;
    w.symbols.assign(static_cast<std::size_t>(k), 0);
    while (true) {
        total += simple_cycle_measure(g, w);
        int pos = 0;
        while (pos < k && ++w.symbols[pos] == m) w.symbols[pos++] = 0;
        if (pos == k) break;
    }
    return total;
}

struct RatioTestReport {
    bool pass = true;
    std::vector<double> ratios;  // p^2 * r(k+2) / r(k) for even k in [kLo, kHi-2]
};

/// Even-lag ratio test on the series p^k <T^k 1_Delta, 1_Delta>: for
/// p < 1/||T|| every ratio stays below 1; divergence of the series forces
/// p ||T|| >= 1.
inline RatioTestReport ratio_test(const Graphing& g, double p, int k_lo, int k_hi) {
    if (k_lo % 2) ++k_lo;
    RatioTestReport rep;
    for (int k = k_lo; k + 2 <= k_hi; k += 2) {
        Rat rk = return_probability(g, k);
        Rat rk2 = return_probability(g, k + 2);
        if (rk == 0) throw std::invalid_argument("vanishing even return probability");
        double ratio = p * p * to_double(rk2 / rk);
        rep.ratios.push_back(ratio);
        if (ratio >= 1.0) rep.pass = false;
    }
    return rep;
}

/// Brute-force insertion/deletion tolerance on a micro edge set: an event is
/// a set of edge configurations (bitmasks over numEdges <= 20 edges).
struct ToleranceReport {
    bool ok = false;
    Rat measureA, insertion, deletion;
};

inline Rat event_measure(const std::vector<std::uint32_t>& configs, int num_edges, const Rat& p) {
    std::vector<Rat> by_count(static_cast<std::size_t>(num_edges) + 1);
    Rat q = Rat(1) - p;
    for (int j = 0; j <= num_edges; ++j)
        by_count[j] = rat_pow(p, static_cast<unsigned>(j)) *
                      rat_pow(q, static_cast<unsigned>(num_edges - j));
    Rat m = 0;
    for (std::uint32_t c : configs) m += by_count[__builtin_popcount(c)];
    return m;
}

inline ToleranceReport insertion_deletion_check(const std::vector<std::uint32_t>& configs,
                                                int num_edges, int edge, const Rat& p) {
    if (num_edges < 1 || num_edges > 20) throw std::invalid_argument("edge count out of range");
    if (edge < 0 || edge >= num_edges) throw std::invalid_argument("edge index out of range");
    const std::uint32_t bit = 1u << edge;
    const std::size_t total = std::size_t{1} << num_edges;
    std::vector<char> ins(total, 0), del(total, 0);
    std::vector<std::uint32_t> ins_list, del_list;
    for (std::uint32_t c : configs) {
        if (!ins[c | bit]) {
            ins[c | bit] = 1;
            ins_list.push_back(c | bit);
        }
        if (!del[c & ~bit]) {
            del[c & ~bit] = 1;
            del_list.push_back(c & ~bit);
        }
    }
    ToleranceReport rep;
    rep.measureA = event_measure(configs, num_edges, p);
    rep.insertion = event_measure(ins_list, num_edges, p);
    rep.deletion = event_measure(del_list, num_edges, p);
    rep.ok = rep.insertion >= p * rep.measureA &&
             rep.deletion >= (Rat(1) - p) * rep.measureA;
    return rep;
}

}  // namespace ergolab

#endif
