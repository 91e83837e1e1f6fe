#ifndef ERGOLAB_ENTROPY_HPP
#define ERGOLAB_ENTROPY_HPP

#include <ergolab/bernoulli.hpp>
#include <ergolab/spectral.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

/// C = 1 + log(5/3), the additive constant of the ledger's alpha rule.
inline double ledger_constant() { return 1.0 + std::log(5.0 / 3.0); }

inline EntropyValue entropy_of_product(const std::vector<BaseSpace>& bases) {
    EntropyValue e;
    for (const auto& b : bases) {
        EntropyValue part = shannon_entropy(b);
        if (part.infinite) {
            e.infinite = true;
            e.nats = 0.0;
            e.weights.clear();
            return e;
        }
        e.nats += part.nats;
        e.weights.insert(e.weights.end(), part.weights.begin(), part.weights.end());
    }
    return e;
}

struct LedgerEntry {
    double value = 0.0;
    std::string rule;                // direct-witness | lem2 | lem3 | lem4 | thm5-limit
    std::vector<std::string> chain;  // provenance, outermost first
};

struct BetaLedger {
    std::vector<LedgerEntry> entries;

    void add(LedgerEntry e) { entries.push_back(std::move(e)); }

    double minimum() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& e : entries) m = std::min(m, e.value);
        return m;
    }
};

struct AlphaEstimate {
    bool found = false;
    long long n = 0;                         // witness count, >= 3
    int wordLength = 0;                      // power level m
    double achievedNorm = 1.0;               // certified < 1/4 when found
    std::vector<Automorphism> witnessWords;  // materialized when small

    double alpha() const { return std::log(static_cast<double>(n)); }
};

namespace detail {

/// ||(1/b sum of base words)^m|| per class, maximized over classes; exact
/// dense eigensolve on the per-class averaged matrix power. The norm is
/// taken on the orthocomplement of the per-class constants: averaged
/// permutation matrices always fix the constant vector, so the full-space
/// norm of a finite model is identically 1 and carries no information —
/// the mean-zero block is the finite stand-in for the norm on the
/// (constant-free) relation space. Both subspaces are invariant, so the
/// power trick still multiplies norms.
inline double averaged_power_norm(const Graphing& g, const std::vector<Automorphism>& words,
                                  int m) {
    double best = 0.0;
    for (const auto& c : g.rel.classes) {
        const auto sz = static_cast<Eigen::Index>(c.size());
        Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(sz, sz);
        for (const auto& w : words) avg += class_perm_matrix(w, c);
        avg /= static_cast<double>(words.size());
        Eigen::MatrixXd q = Eigen::MatrixXd::Identity(sz, sz) -
                            Eigen::MatrixXd::Constant(sz, sz, 1.0 / static_cast<double>(sz));
        avg = q * avg * q;
        Eigen::MatrixXd pw = q;
        for (int t = 0; t < m; ++t) pw = pw * avg;
        best = std::max(best, op_norm(pw));
    }
    return best;
}

}  // namespace detail

/// Heuristic search for the smallest witness count n >= 3 with averaged
/// operator norm < 1/4: deterministic beam over sub-multisets of the
/// generator/inverse alphabet, powered up by the norm-reduction trick
/// (all length-m products of a base set of b words give n = b^m and norm
/// at most the base norm to the m-th power).
inline AlphaEstimate alpha_search(const Graphing& g, int word_length_cap = 12,
                                  int beam_width = 64) {
    std::vector<Automorphism> alphabet;
    auto push_unique = [&alphabet](Automorphism a) {
        for (const auto& b : alphabet)
            if (b == a) return;
        alphabet.push_back(std::move(a));
    };
    for (const auto& gen : g.gens) {
        push_unique(gen);
        push_unique(gen.inverse());
    }

    // Candidate base sets: subsets of the alphabet, ordered by size then
    // bitmask (deterministic); the beam width caps how many are tried.
    std::vector<std::uint32_t> subsets;
    for (std::uint32_t mask = 1; mask < (1u << alphabet.size()); ++mask) subsets.push_back(mask);
    std::sort(subsets.begin(), subsets.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
        return pa != pb ? pa > pb : a < b;
    });
    if (static_cast<int>(subsets.size()) > beam_width) subsets.resize(beam_width);

    AlphaEstimate best;
    for (std::uint32_t mask : subsets) {
        std::vector<Automorphism> base;
        for (std::size_t i = 0; i < alphabet.size(); ++i)
            if (mask & (1u << i)) base.push_back(alphabet[i]);
        const long long b = static_cast<long long>(base.size());
        long long n = 1;
        for (int m = 1; m <= word_length_cap; ++m) {
            if (n > std::numeric_limits<long long>::max() / b) break;
            n *= b;
            if (best.found && n >= best.n) break;
            if (n < 3) continue;
            double norm = detail::averaged_power_norm(g, base, m);
            if (norm < 0.25) {
                best.found = true;
                best.n = n;
                best.wordLength = m;
                best.achievedNorm = norm;
                best.witnessWords.clear();
                if (n <= 4096) {
                    std::vector<Automorphism> words{Automorphism::identity(g.rel.size())};
                    for (int t = 0; t < m; ++t) {
                        std::vector<Automorphism> next;
                        for (const auto& w : words)
                            for (const auto& a : base) next.push_back(a.compose(w));
                        words = std::move(next);
                    }
                    best.witnessWords = std::move(words);
                }
                break;
            }
        }
    }
    return best;
}

/// Ledger rule from an alpha witness: beta <= log(n) + 1 + log(5/3). Also
/// returns the intermediate exact bound, the entropy of the (n+1)-fold
/// Bernoulli(1/(n+2)) alphabet.
inline LedgerEntry lem2_bound(const AlphaEstimate& alpha, double* intermediate = nullptr) {
    if (!alpha.found || alpha.n < 3) throw std::invalid_argument("invalid alpha witness");
    const double n = static_cast<double>(alpha.n);
    if (intermediate) {
        double p = 1.0 / (n + 2.0);
        *intermediate = -(n + 1.0) * (p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
    }
    LedgerEntry e;
    e.value = std::log(n) + ledger_constant();
    e.rule = "lem2";
    e.chain = {"alpha witness n=" + std::to_string(alpha.n) +
               " norm=" + std::to_string(alpha.achievedNorm)};
    return e;
}

/// beta(R) <= beta(S) / [R:S]; an index of -1 marks infinite index, which
/// forces the bound to 0.
inline LedgerEntry lem3_bound(const LedgerEntry& sub, long long index) {
    if (index == 0 || index < -1) throw std::invalid_argument("index must be >= 1 or -1 for infinite");
    LedgerEntry e;
    e.rule = "lem3";
    e.value = index == -1 ? 0.0 : sub.value / static_cast<double>(index);
    e.chain = {"index " + (index == -1 ? std::string("infinite") : std::to_string(index)),
               "from " + sub.rule + " value " + std::to_string(sub.value)};
    e.chain.insert(e.chain.end(), sub.chain.begin(), sub.chain.end());
    return e;
}

/// beta(R) <= beta(R restricted to Y) * mu(Y).
inline LedgerEntry lem4_bound(const LedgerEntry& restriction, double muY) {
    if (!(muY > 0.0) || muY > 1.0) throw std::invalid_argument("mu(Y) must lie in (0,1]");
    LedgerEntry e;
    e.rule = "lem4";
    e.value = restriction.value * muY;
    e.chain = {"mu(Y) " + std::to_string(muY),
               "from " + restriction.rule + " value " + std::to_string(restriction.value)};
    e.chain.insert(e.chain.end(), restriction.chain.begin(), restriction.chain.end());
    return e;
}

/// The vanishing schedule log(n)/m + C/m: the m-th stage of driving the
/// ledger bound to 0.
inline double thm5_schedule(long long n, long long m) {
    if (n < 3 || m < 1) throw std::invalid_argument("bad schedule parameters");
    return (std::log(static_cast<double>(n)) + ledger_constant()) / static_cast<double>(m);
}

inline LedgerEntry thm5_limit_entry(long long n, long long m) {
    LedgerEntry e;
    e.rule = "thm5-limit";
    e.value = thm5_schedule(n, m);
    e.chain = {"schedule n=" + std::to_string(n) + " m=" + std::to_string(m)};
    return e;
}

/// Lift vs quotient comparison data: the same generators acting upstairs
/// (on X, as full-group automorphisms) and downstairs (as permutations of a
/// finite quotient group Q in its regular representation).
struct QuotientData {
    ProbSpace space;                         // measure on X
    std::vector<Automorphism> lift;          // generators acting on X
    std::vector<std::vector<int>> quotient;  // generator images as permutations of Q
};

struct MomentReport {
    std::vector<Rat> liftMoments, quotientMoments;  // <(T*T)^m 1, 1> for m = 1..cap
    bool termwise = true;   // mu(Fix(w on X)) <= [w trivial on Q] per word
    bool momentsOk = true;  // aggregated inequality per m
    double liftNorm = 0.0, quotientNorm = 0.0;
    bool normOk = false;
};

inline MomentReport norm_comparison_check(const QuotientData& data, int m_cap) {
    const std::size_t n_gens = data.lift.size();
    if (n_gens == 0 || data.quotient.size() != n_gens)
        throw std::invalid_argument("generator lists disagree");
    const std::size_t nx = data.space.size();
    const std::size_t nq = data.quotient.front().size();
    for (const auto& q : data.quotient) {
        if (q.size() != nq) throw std::invalid_argument("quotient permutation size mismatch");
        std::vector<char> hit(nq, 0);
        for (int v : q) {
            if (v < 0 || v >= static_cast<int>(nq) || hit[v])
                throw std::invalid_argument("quotient entry is not a permutation");
            hit[v] = 1;
        }
    }
    std::vector<std::vector<int>> lift_inv, quot_inv;
    for (const auto& a : data.lift) lift_inv.push_back(a.inverse().map);
    for (const auto& q : data.quotient) {
        std::vector<int> inv(nq);
        for (std::size_t i = 0; i < nq; ++i) inv[q[i]] = static_cast<int>(i);
        quot_inv.push_back(std::move(inv));
    }

    MomentReport rep;
    const Rat uniform_q = Rat(1, static_cast<unsigned>(nq));
    for (int m = 1; m <= m_cap; ++m) {
        Rat lift_total = 0, quot_total = 0;
        const Rat word_weight = rat_pow(Rat(1, static_cast<unsigned>(n_gens)),
                                        static_cast<unsigned>(2 * m));
        // word = product over t of theta_{i_t}^{-1} theta_{j_t}
        std::vector<int> idx(static_cast<std::size_t>(2 * m), 0);
        while (true) {
            Rat fix_x = 0;
            for (std::size_t x = 0; x < nx; ++x) {
                int cur = static_cast<int>(x);
                for (int t = 0; t < m; ++t) {
                    cur = data.lift[idx[2 * t]](cur);
                    cur = lift_inv[idx[2 * t + 1]][cur];
                }
                if (cur == static_cast<int>(x)) fix_x += data.space.weight[x];
            }
            Rat fix_q = 0;
            for (std::size_t y = 0; y < nq; ++y) {
                int cur = static_cast<int>(y);
                for (int t = 0; t < m; ++t) {
                    cur = data.quotient[idx[2 * t]][cur];
                    cur = quot_inv[idx[2 * t + 1]][cur];
                }
                if (cur == static_cast<int>(y)) fix_q += uniform_q;
            }
            if (fix_x > fix_q) rep.termwise = false;
            lift_total += fix_x;
            quot_total += fix_q;
            std::size_t pos = 0;
            while (pos < idx.size() && ++idx[pos] == static_cast<int>(n_gens)) idx[pos++] = 0;
            if (pos == idx.size()) break;
        }
        rep.liftMoments.push_back(word_weight * lift_total);
        rep.quotientMoments.push_back(word_weight * quot_total);
        if (rep.liftMoments.back() > rep.quotientMoments.back()) rep.momentsOk = false;
    }

    auto avg_norm = [](const std::vector<std::vector<int>>& perms, std::size_t n) {
        Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(n, n);
        for (const auto& p : perms)
            for (std::size_t j = 0; j < n; ++j) avg(p[j], static_cast<Eigen::Index>(j)) += 1.0;
        avg /= static_cast<double>(perms.size());
        return detail::op_norm(avg);
    };
    std::vector<std::vector<int>> lift_maps;
    for (const auto& a : data.lift) lift_maps.push_back(a.map);
    rep.liftNorm = avg_norm(lift_maps, nx);
    rep.quotientNorm = avg_norm(data.quotient, nq);
    rep.normOk = rep.liftNorm <= rep.quotientNorm + 1e-9;
    return rep;
}

}  // namespace ergolab

#endif
