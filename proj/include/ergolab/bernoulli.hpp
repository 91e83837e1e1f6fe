#ifndef ERGOLAB_BERNOULLI_HPP
#define ERGOLAB_BERNOULLI_HPP

#include <ergolab/eqrel.hpp>
#include <ergolab/graphing.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite base alphabet (K, kappa). The atomless flag marks an idealized
/// continuous base whose entropy is +infinity; such a base carries no
/// symbols and cannot be materialized.
struct BaseSpace {
    std::vector<std::string> symbols;
    std::vector<Rat> weight;
    bool atomless = false;

    BaseSpace() = default;
    BaseSpace(std::vector<std::string> s, std::vector<Rat> w)
        : symbols(std::move(s)), weight(std::move(w)) {
        validate();
    }

    static BaseSpace atomless_base() {
        BaseSpace b;
        b.atomless = true;
        return b;
    }

    static BaseSpace uniform(int k) {
        BaseSpace b;
        for (int i = 0; i < k; ++i) {
            b.symbols.push_back(std::to_string(i));
            b.weight.push_back(Rat(1, k));
        }
        b.validate();
        return b;
    }

    /// {0,1}^n with independent Bernoulli(p) coordinates; symbol strings are
    /// little-endian bit strings, symbol index = the bitmask.
    static BaseSpace bernoulli_tuple(int n, const Rat& p) {
        if (n < 1 || p <= 0 || p >= 1) throw std::invalid_argument("bad bernoulli tuple parameters");
        BaseSpace b;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            std::string s;
            Rat w = 1;
            for (int i = 0; i < n; ++i) {
                bool on = mask & (1u << i);
                s.push_back(on ? '1' : '0');
                w *= on ? p : Rat(1) - p;
            }
            b.symbols.push_back(std::move(s));
            b.weight.push_back(w);
        }
        b.validate();
        return b;
    }

    /// K^N with product weights; tuple index is little-endian base |K|.
    static BaseSpace power(const BaseSpace& k, int n) {
        if (k.atomless) return atomless_base();
        if (n < 1) throw std::invalid_argument("power must be >= 1");
        BaseSpace b;
        std::vector<std::size_t> digit(static_cast<std::size_t>(n), 0);
        while (true) {
            std::string s;
            Rat w = 1;
            for (int i = 0; i < n; ++i) {
                if (i) s.push_back(',');
                s += k.symbols[digit[i]];
                w *= k.weight[digit[i]];
            }
            b.symbols.push_back(std::move(s));
            b.weight.push_back(w);
            int pos = 0;
            while (pos < n && ++digit[pos] == k.size()) digit[pos++] = 0;
            if (pos == n) break;
        }
        b.validate();
        return b;
    }

    std::size_t size() const { return symbols.size(); }

    void validate() const {
        if (atomless) return;
        if (symbols.empty() || symbols.size() != weight.size())
            throw std::invalid_argument("malformed base space");
        Rat total = 0;
        for (const Rat& w : weight) {
            if (w <= 0) throw std::invalid_argument("nonpositive symbol weight");
            total += w;
        }
        if (total != 1) throw std::invalid_argument("symbol weights do not sum to 1");
    }
};

/// Shannon entropy of a base in nats; +infinity marker for atomless bases.
struct EntropyValue {
    double nats = 0.0;
    bool infinite = false;
    std::vector<Rat> weights;  // retained symbolic form
};

inline EntropyValue shannon_entropy(const BaseSpace& base) {
    EntropyValue e;
    if (base.atomless) {
        e.infinite = true;
        return e;
    }
    for (const Rat& w : base.weight) {
        double d = to_double(w);
        if (d > 0.0) e.nats -= d * std::log(d);
    }
    e.weights = base.weight;
    return e;
}

/// The Bernoulli extension X_K of a finite relation: points (x, omega) with
/// omega in K^{[x]}, encoded as offset[x] + code where code is the
/// little-endian base-|K| number over the sorted class members.
struct BernoulliExtension {
    EqRel rel;
    BaseSpace base;
    EqRel ext;
    std::vector<int> proj;          // extension point -> base point
    std::vector<long long> offset;  // base point -> first extension id

    long long code_of(int id) const { return id - offset[proj[id]]; }
    int point_id(int x, long long code) const { return static_cast<int>(offset[x] + code); }

    /// Symbol index of omega at the given position of the sorted class.
    int digit(long long code, int pos) const {
        const long long k = static_cast<long long>(base.size());
        for (int i = 0; i < pos; ++i) code /= k;
        return static_cast<int>(code % k);
    }
};

namespace detail {

inline long long checked_pow(long long base, std::size_t exp, long long cap) {
    long long v = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (v > cap / base) return cap + 1;
        v *= base;
    }
    return v;
}

}  // namespace detail

inline BernoulliExtension build_extension(const EqRel& rel, const BaseSpace& base,
                                          long long budget = 1'000'000) {
    if (base.atomless) throw std::invalid_argument("cannot materialize an atomless base");
    const long long k = static_cast<long long>(base.size());
    long long total = 0;
    for (const auto& c : rel.classes) {
        long long codes = detail::checked_pow(k, c.size(), budget);
        if (codes > budget || total > budget - codes * static_cast<long long>(c.size()))
            throw BudgetError("extension exceeds the point budget; use the window-based percolation path");
        total += codes * static_cast<long long>(c.size());
    }

    BernoulliExtension bx;
    bx.rel = rel;
    bx.base = base;
    bx.offset.assign(rel.size(), 0);
    long long next = 0;
    for (std::size_t x = 0; x < rel.size(); ++x) {
        bx.offset[x] = next;
        next += detail::checked_pow(k, rel.cls(static_cast<int>(x)).size(), budget);
    }

    std::vector<Rat> w(static_cast<std::size_t>(total));
    bx.proj.assign(static_cast<std::size_t>(total), -1);
    std::vector<std::vector<int>> parts;
    for (const auto& c : rel.classes) {
        long long codes = detail::checked_pow(k, c.size(), budget);
        for (long long code = 0; code < codes; ++code) {
            Rat product = 1;
            long long rest = code;
            for (std::size_t j = 0; j < c.size(); ++j) {
                product *= base.weight[static_cast<std::size_t>(rest % k)];
                rest /= k;
            }
            std::vector<int> cls;
            for (int y : c) {
                int id = static_cast<int>(bx.offset[y] + code);
                w[id] = rel.space.weight[y] * product;
                bx.proj[id] = y;
                cls.push_back(id);
            }
            parts.push_back(std::move(cls));
        }
    }
    bx.ext = EqRel::from_classes(ProbSpace(std::move(w)), std::move(parts));
    return bx;
}

/// Exact isomorphism witness between two finite relations.
struct IsoWitness {
    std::vector<int> map;  // source point -> target point
    bool bijective = false;
    bool measurePreserving = false;
    bool relationIso = false;
    bool commutes = true;  // projections agree (set when projections given)

    bool ok() const { return bijective && measurePreserving && relationIso && commutes; }
};

inline void verify_iso(const EqRel& src, const EqRel& tgt, IsoWitness& w,
                       const std::vector<int>* src_proj = nullptr,
                       const std::vector<int>* tgt_proj = nullptr) {
    w.bijective = src.size() == tgt.size() && w.map.size() == src.size();
    if (w.bijective) {
        std::vector<char> hit(tgt.size(), 0);
        for (int t : w.map) {
            if (t < 0 || t >= static_cast<int>(tgt.size()) || hit[t]) {
                w.bijective = false;
                break;
            }
            hit[t] = 1;
        }
    }
    if (!w.bijective) return;
    w.measurePreserving = true;
    for (std::size_t x = 0; x < src.size(); ++x)
        if (src.space.weight[x] != tgt.space.weight[w.map[x]]) {
            w.measurePreserving = false;
            break;
        }
    w.relationIso = true;
    for (const auto& c : src.classes) {
        for (int x : c)
            if (!tgt.related(w.map[x], w.map[c.front()])) w.relationIso = false;
        // class sizes on both sides must match for the image to be a full class
        if (tgt.cls(w.map[c.front()]).size() != c.size()) w.relationIso = false;
        if (!w.relationIso) break;
    }
    if (src_proj && tgt_proj) {
        for (std::size_t x = 0; x < src.size(); ++x)
            if ((*src_proj)[x] != (*tgt_proj)[w.map[x]]) {
                w.commutes = false;
                break;
            }
    }
}

/// Identification of percolation labels with a Bernoulli extension: the left
/// side carries omega in {0,1}^{E_x} indexed by edge slots (y, i), the right
/// side is the extension with base {0,1}^n, matched via
/// omega'(y)_i = omega(y, theta_i(y)).
struct PercLabelWitness {
    BernoulliExtension right;  // extension of rel with base {0,1}^n
    EqRel left;                // percolation-label relation, same layout
    IsoWitness iso;
};

inline PercLabelWitness perc_label_iso(const Graphing& g, const Rat& p,
                                       long long budget = 1'000'000) {
    const int n = static_cast<int>(g.n());
    PercLabelWitness wit;
    wit.right = build_extension(g.rel, BaseSpace::bernoulli_tuple(n, p), budget);

    // Left side: same point layout, weights computed edge-by-edge from the
    // open/closed bits of the slot mask.
    const EqRel& rel = g.rel;
    std::vector<Rat> w(wit.right.ext.size());
    std::vector<std::vector<int>> parts;
    const Rat q = Rat(1) - p;
    for (const auto& c : rel.classes) {
        const int slots = n * static_cast<int>(c.size());
        const long long codes = 1ll << slots;
        for (long long mask = 0; mask < codes; ++mask) {
            Rat product = 1;
            for (int s = 0; s < slots; ++s) product *= (mask >> s) & 1 ? p : q;
            std::vector<int> cls;
            for (int y : c) {
                int id = wit.right.point_id(y, mask);
                w[id] = rel.space.weight[y] * product;
                cls.push_back(id);
            }
            parts.push_back(std::move(cls));
        }
    }
    wit.left = EqRel::from_classes(ProbSpace(std::move(w)), std::move(parts));

    // The slot order (class position, generator) makes the bit groups of the
    // mask coincide with the tuple digits, so the matching map is the
    // identity on codes.
    wit.iso.map.resize(wit.left.size());
    for (std::size_t id = 0; id < wit.left.size(); ++id) wit.iso.map[id] = static_cast<int>(id);
    verify_iso(wit.left, wit.right.ext, wit.iso, &wit.right.proj, &wit.right.proj);
    return wit;
}

namespace detail {

/// Checks that theta_i(D) are pairwise disjoint and cover the rel-class of
/// D, for every sub-class D. Throws with a witness point otherwise.
inline void check_decomposition(const EqRel& rel, const EqRel& sub,
                                const std::vector<Automorphism>& maps) {
    for (const auto& d : sub.classes) {
        std::vector<char> hit(rel.size(), 0);
        std::size_t count = 0;
        for (const auto& m : maps)
            for (int y : d) {
                int z = m(y);
                if (!rel.related(z, d.front()))
                    throw std::invalid_argument("translate leaves the class; witness point " +
                                                std::to_string(z));
                if (hit[z])
                    throw std::invalid_argument("translated sub-classes overlap; witness point " +
                                                std::to_string(z));
                hit[z] = 1;
                ++count;
            }
        if (count != rel.cls(d.front()).size())
            throw std::invalid_argument("translated sub-classes do not cover; witness class " +
                                        std::to_string(d.front()));
    }
}

}  // namespace detail

/// Lift-of-subrelation isomorphism: the lift of S inside R_K is matched with
/// the extension of S with base K^N via omega'(y)_n = omega(theta_n(y)).
struct LiftWitness {
    BernoulliExtension relExt;  // R_K, source layout
    EqRel sourceLift;           // lift of sub inside R_K
    BernoulliExtension target;  // extension of sub with base K^N
    IsoWitness iso;
    double baseEntropy = 0.0;
    double liftedEntropy = 0.0;
};

inline LiftWitness lift_subrelation_iso(const EqRel& rel, const EqRel& sub, const BaseSpace& base,
                                        const std::vector<Automorphism>& maps,
                                        long long budget = 1'000'000) {
    IndexResult idx = index_of(rel, sub);
    if (!idx.constant) throw std::invalid_argument("index of sub in rel is not constant");
    const int n_maps = static_cast<int>(maps.size());
    if (idx.value != n_maps) throw std::invalid_argument("transversal size differs from the index");
    for (const auto& m : maps)
        if (!m.valid_for(rel)) throw std::invalid_argument("transversal map not in the full group");
    detail::check_decomposition(rel, sub, maps);

    LiftWitness wit;
    wit.relExt = build_extension(rel, base, budget);
    wit.target = build_extension(sub, BaseSpace::power(base, n_maps), budget);

    // Source lift: same points as R_K, classes refined to sub.
    {
        std::vector<std::vector<int>> parts;
        const long long k = static_cast<long long>(base.size());
        for (const auto& d : sub.classes) {
            long long codes = detail::checked_pow(k, rel.cls(d.front()).size(), budget);
            for (long long code = 0; code < codes; ++code) {
                std::vector<int> cls;
                for (int y : d) cls.push_back(wit.relExt.point_id(y, code));
                parts.push_back(std::move(cls));
            }
        }
        wit.sourceLift = EqRel::from_classes(wit.relExt.ext.space, std::move(parts));
    }

    const long long k = static_cast<long long>(base.size());
    const long long l = detail::checked_pow(k, static_cast<std::size_t>(n_maps), budget);
    wit.iso.map.assign(wit.sourceLift.size(), -1);
    for (std::size_t id = 0; id < wit.sourceLift.size(); ++id) {
        int x = wit.relExt.proj[id];
        long long code = wit.relExt.code_of(static_cast<int>(id));
        const auto& rel_cls = rel.cls(x);
        const auto& sub_cls = sub.cls(x);
        auto pos_in_rel = [&rel_cls](int point) {
            return static_cast<int>(std::lower_bound(rel_cls.begin(), rel_cls.end(), point) -
                                    rel_cls.begin());
        };
        long long out = 0, place = 1;
        for (int y : sub_cls) {
            long long symbol = 0, base_pow = 1;
            for (const auto& m : maps) {
                symbol += wit.relExt.digit(code, pos_in_rel(m(y))) * base_pow;
                base_pow *= k;
            }
            out += symbol * place;
            place *= l;
        }
        wit.iso.map[id] = wit.target.point_id(x, out);
    }
    verify_iso(wit.sourceLift, wit.target.ext, wit.iso, &wit.relExt.proj, &wit.target.proj);
    wit.baseEntropy = shannon_entropy(base).nats;
    wit.liftedEntropy = shannon_entropy(wit.target.base).nats;
    return wit;
}

/// Compression isomorphism: the restriction of R_K to the lift of Y is
/// matched with the inhomogeneous extension over R restricted to Y, with
/// per-point alphabet K^{S(y)} padded by * outside S(y).
struct CompressionWitness {
    Restriction sourceRestriction;  // R_K restricted to the lift of Y
    EqRel target;                   // inhomogeneous extension over rel|Y
    IsoWitness iso;
    double entropyLedger = 0.0;     // H(K) / mu(Y)
    double entropyIntegral = 0.0;   // sum over y of weight * H(K) * |S(y)| after renormalization
    Rat muY;
};

inline CompressionWitness compression_iso(const EqRel& rel, const std::vector<int>& subsetY,
                                          const BaseSpace& base,
                                          const std::vector<PartialIso>& maps,
                                          long long budget = 1'000'000) {
    // Validate the covering family: domains inside Y, images disjoint and
    // covering the whole space.
    std::vector<char> inY(rel.size(), 0);
    for (int y : subsetY) inY[y] = 1;
    std::vector<char> covered(rel.size(), 0);
    for (const auto& m : maps) {
        if (!m.valid_for(rel)) throw std::invalid_argument("partial map not class-preserving");
        for (std::size_t y = 0; y < rel.size(); ++y) {
            if (!m.defined(static_cast<int>(y))) continue;
            if (!inY[y]) throw std::invalid_argument("partial map domain leaves Y");
            int z = m(static_cast<int>(y));
            if (covered[z])
                throw std::invalid_argument("images overlap; witness point " + std::to_string(z));
            covered[z] = 1;
        }
    }
    for (std::size_t z = 0; z < rel.size(); ++z)
        if (!covered[z])
            throw std::invalid_argument("images do not cover; witness point " + std::to_string(z));

    CompressionWitness wit;
    BernoulliExtension relExt = build_extension(rel, base, budget);

    std::vector<int> lift_ids;
    for (std::size_t id = 0; id < relExt.ext.size(); ++id)
        if (inY[relExt.proj[id]]) lift_ids.push_back(static_cast<int>(id));
    wit.sourceRestriction = restrict_rel(relExt.ext, lift_ids);
    wit.muY = wit.sourceRestriction.scale;

    // S(y) per point of Y: indices of maps defined at y, ascending.
    std::vector<std::vector<int>> s_of(rel.size());
    for (std::size_t i = 0; i < maps.size(); ++i)
        for (std::size_t y = 0; y < rel.size(); ++y)
            if (maps[i].defined(static_cast<int>(y))) s_of[y].push_back(static_cast<int>(i));

    Restriction ry = restrict_rel(rel, subsetY);
    const long long k = static_cast<long long>(base.size());

    // Target layout: per restricted class, mixed-radix codes with radix
    // |K|^{|S(y)|} per member.
    std::vector<long long> t_offset(ry.rel.size(), 0);
    long long total = 0;
    std::vector<long long> class_codes(ry.rel.classes.size(), 1);
    for (std::size_t ci = 0; ci < ry.rel.classes.size(); ++ci) {
        for (int yr : ry.rel.classes[ci]) {
            long long radix = detail::checked_pow(k, s_of[ry.points[yr]].size(), budget);
            if (class_codes[ci] > budget / std::max(radix, 1ll)) throw BudgetError("compression target exceeds budget");
            class_codes[ci] *= radix;
        }
        total += class_codes[ci] * static_cast<long long>(ry.rel.classes[ci].size());
        if (total > budget) throw BudgetError("compression target exceeds budget");
    }
    {
        long long next = 0;
        for (std::size_t xr = 0; xr < ry.rel.size(); ++xr) {
            t_offset[xr] = next;
            next += class_codes[ry.rel.class_index(static_cast<int>(xr))];
        }
    }

    // Build target weights and classes.
    std::vector<Rat> tw(static_cast<std::size_t>(total));
    std::vector<std::vector<int>> tparts;
    for (std::size_t ci = 0; ci < ry.rel.classes.size(); ++ci) {
        const auto& c = ry.rel.classes[ci];
        for (long long code = 0; code < class_codes[ci]; ++code) {
            Rat product = 1;
            long long rest = code;
            for (int yr : c) {
                long long radix = 1;
                for (std::size_t t = 0; t < s_of[ry.points[yr]].size(); ++t) radix *= k;
                long long local = rest % radix;
                rest /= radix;
                for (std::size_t t = 0; t < s_of[ry.points[yr]].size(); ++t) {
                    product *= base.weight[static_cast<std::size_t>(local % k)];
                    local /= k;
                }
            }
            std::vector<int> cls;
            for (int yr : c) {
                tw[static_cast<std::size_t>(t_offset[yr] + code)] = ry.rel.space.weight[yr] * product;
                cls.push_back(static_cast<int>(t_offset[yr] + code));
            }
            tparts.push_back(std::move(cls));
        }
    }
    wit.target = EqRel::from_classes(ProbSpace(std::move(tw)), std::move(tparts));

    // Map: omega'(y)_i = omega(theta_i(y)) for i in S(y).
    wit.iso.map.assign(wit.sourceRestriction.rel.size(), -1);
    std::vector<int> y_restricted(rel.size(), -1);
    for (std::size_t i = 0; i < ry.points.size(); ++i) y_restricted[ry.points[i]] = static_cast<int>(i);
    for (std::size_t rid = 0; rid < wit.sourceRestriction.rel.size(); ++rid) {
        int id = wit.sourceRestriction.points[rid];
        int x = relExt.proj[id];
        long long code = relExt.code_of(id);
        const auto& rel_cls = rel.cls(x);
        auto pos_in_rel = [&rel_cls](int point) {
            return static_cast<int>(std::lower_bound(rel_cls.begin(), rel_cls.end(), point) -
                                    rel_cls.begin());
        };
        int xr = y_restricted[x];
        const auto& c = ry.rel.cls(xr);
        long long out = 0, place = 1;
        for (int yr : c) {
            int y = ry.points[yr];
            long long local = 0, base_pow = 1;
            for (int i : s_of[y]) {
                local += relExt.digit(code, pos_in_rel(maps[i](y))) * base_pow;
                base_pow *= k;
            }
            out += local * place;
            place *= base_pow;
        }
        wit.iso.map[rid] = static_cast<int>(t_offset[xr] + out);
    }

    // Projections to Y on both sides, in restricted ids.
    std::vector<int> sproj(wit.sourceRestriction.rel.size());
    for (std::size_t rid = 0; rid < sproj.size(); ++rid)
        sproj[rid] = y_restricted[relExt.proj[wit.sourceRestriction.points[rid]]];
    std::vector<int> tproj(wit.target.size());
    for (std::size_t xr = 0; xr < ry.rel.size(); ++xr)
        for (long long code = 0; code < class_codes[ry.rel.class_index(static_cast<int>(xr))]; ++code)
            tproj[static_cast<std::size_t>(t_offset[xr] + code)] = static_cast<int>(xr);
    verify_iso(wit.sourceRestriction.rel, wit.target, wit.iso, &sproj, &tproj);

    double h = shannon_entropy(base).nats;
    wit.entropyLedger = h / to_double(wit.muY);
    for (std::size_t yr = 0; yr < ry.rel.size(); ++yr)
        wit.entropyIntegral +=
            to_double(ry.rel.space.weight[yr]) * h * static_cast<double>(s_of[ry.points[yr]].size());
    return wit;
}

/// Orbit relation of a single automorphism (its cycles).
inline EqRel orbit_relation(const Automorphism& theta, const ProbSpace& space) {
    std::vector<std::vector<int>> parts;
    std::vector<char> seen(space.size(), 0);
    for (std::size_t x = 0; x < space.size(); ++x) {
        if (seen[x]) continue;
        std::vector<int> cyc;
        int cur = static_cast<int>(x);
        do {
            seen[cur] = 1;
            cyc.push_back(cur);
            cur = theta(cur);
        } while (cur != static_cast<int>(x));
        parts.push_back(std::move(cyc));
    }
    return EqRel::from_classes(space, std::move(parts));
}

/// Conjugacy of the lifted automorphism with theta x shift: sigma maps
/// (x, k) with k in K^{N x L(x)} to (x, omega), omega(theta_i theta^j x) =
/// k_{i,j}, and conjugates (x, omega) -> (theta x, omega) to theta x cyclic
/// shift in j.
struct ConjugacyWitness {
    bool bijective = false;
    bool measurePreserving = false;
    bool commutes = false;

    bool ok() const { return bijective && measurePreserving && commutes; }
};

inline ConjugacyWitness shift_conjugacy(const EqRel& rel, const Automorphism& theta,
                                        const BaseSpace& base,
                                        const std::vector<Automorphism>& maps,
                                        long long budget = 1'000'000) {
    if (!theta.valid_for(rel)) throw std::invalid_argument("theta not in the full group");
    EqRel sub = orbit_relation(theta, rel.space);
    if (!rel.refines(sub)) throw std::invalid_argument("theta orbits leave rel classes");
    detail::check_decomposition(rel, sub, maps);
    const int n_maps = static_cast<int>(maps.size());

    BernoulliExtension relExt = build_extension(rel, base, budget);
    const long long k = static_cast<long long>(base.size());

    // Domain: (x, code) with code over N * L(x) coordinates ordered
    // (i + N * j); the domain id layout mirrors the extension layout.
    std::vector<long long> d_offset(rel.size(), 0);
    long long total = 0;
    for (std::size_t x = 0; x < rel.size(); ++x) {
        d_offset[x] = total;
        std::size_t l = sub.cls(static_cast<int>(x)).size();
        long long codes = detail::checked_pow(k, static_cast<std::size_t>(n_maps) * l, budget);
        if (codes > budget || total > budget - codes) throw BudgetError("conjugacy domain exceeds budget");
        total += codes;
    }

    ConjugacyWitness wit;
    std::vector<int> sigma(static_cast<std::size_t>(total), -1);
    std::vector<char> hit(relExt.ext.size(), 0);
    wit.bijective = total == static_cast<long long>(relExt.ext.size());
    wit.measurePreserving = true;
    wit.commutes = true;

    for (std::size_t x = 0; x < rel.size(); ++x) {
        const auto& rel_cls = rel.cls(static_cast<int>(x));
        auto pos_in_rel = [&rel_cls](int point) {
            return static_cast<int>(std::lower_bound(rel_cls.begin(), rel_cls.end(), point) -
                                    rel_cls.begin());
        };
        const int l = static_cast<int>(sub.cls(static_cast<int>(x)).size());
        // digit (i, j) of the domain code lands at class position of
        // theta_i theta^j x in the extension code
        std::vector<int> slot(static_cast<std::size_t>(n_maps) * l);
        {
            int cur = static_cast<int>(x);
            for (int j = 0; j < l; ++j) {
                for (int i = 0; i < n_maps; ++i) slot[i + n_maps * j] = pos_in_rel(maps[i](cur));
                cur = theta(cur);
            }
            std::vector<char> used(rel_cls.size(), 0);
            for (int s : slot) {
                if (used[s]) throw std::invalid_argument("transversal invalid: slot collision");
                used[s] = 1;
            }
        }
        long long codes = detail::checked_pow(k, slot.size(), budget);
        std::vector<long long> place(rel_cls.size(), 1);
        for (std::size_t q = 1; q < rel_cls.size(); ++q) place[q] = place[q - 1] * k;
        for (long long code = 0; code < codes; ++code) {
            long long out = 0, rest = code;
            for (std::size_t d = 0; d < slot.size(); ++d) {
                out += (rest % k) * place[slot[d]];
                rest /= k;
            }
            int ext_id = relExt.point_id(static_cast<int>(x), out);
            sigma[static_cast<std::size_t>(d_offset[x] + code)] = ext_id;
            if (hit[ext_id]) wit.bijective = false;
            hit[ext_id] = 1;
            // domain weight mu(x) * product of kappa over digits; the digit
            // multiset is preserved by sigma, so compare against the
            // extension weight directly.
            Rat dom_w = rel.space.weight[x];
            rest = code;
            for (std::size_t d = 0; d < slot.size(); ++d) {
                dom_w *= base.weight[static_cast<std::size_t>(rest % k)];
                rest /= k;
            }
            if (dom_w != relExt.ext.space.weight[ext_id]) wit.measurePreserving = false;
        }
    }

    // Conjugacy: sigma(theta x, tau code) == lifted-theta(sigma(x, code)),
    // where tau shifts j by one within each cycle and the lift keeps omega.
    for (std::size_t x = 0; x < rel.size(); ++x) {
        const int l = static_cast<int>(sub.cls(static_cast<int>(x)).size());
        const std::size_t digits = static_cast<std::size_t>(n_maps) * l;
        long long codes = detail::checked_pow(k, digits, budget);
        int tx = theta(static_cast<int>(x));
        for (long long code = 0; code < codes; ++code) {
            // tau: digit (i, j) of the image = digit (i, j+1 mod l) of code
            long long shifted = 0, place = 1;
            for (std::size_t d = 0; d < digits; ++d) {
                int i = static_cast<int>(d) % n_maps;
                int j = static_cast<int>(d) / n_maps;
                std::size_t src = static_cast<std::size_t>(i + n_maps * ((j + 1) % l));
                long long digit = code;
                for (std::size_t t = 0; t < src; ++t) digit /= k;
                shifted += (digit % k) * place;
                place *= k;
            }
            int lhs = sigma[static_cast<std::size_t>(d_offset[tx] + shifted)];
            int rhs_ext = sigma[static_cast<std::size_t>(d_offset[x] + code)];
            // lifted theta on the extension: (x, omega) -> (theta x, omega)
            int rhs = relExt.point_id(tx, relExt.code_of(rhs_ext));
            if (lhs != rhs) wit.commutes = false;
        }
    }
    return wit;
}

/// Transversal family for a constant-index pair: theta_i sends the k-th
/// element of the j-th sub-class of each rel-class to the k-th element of
/// the (j+i mod N)-th sub-class. Requires aligned sub-class sizes and
/// weights; theta_0 = id.
inline std::vector<Automorphism> make_transversal_maps(const EqRel& rel, const EqRel& sub) {
    IndexResult idx = index_of(rel, sub);
    if (!idx.constant) throw std::invalid_argument("non-constant index");
    const int n = static_cast<int>(idx.value);
    std::vector<Automorphism> maps;
    for (int i = 0; i < n; ++i) {
        std::vector<int> m(rel.size());
        for (const auto& c : rel.classes) {
            std::vector<const std::vector<int>*> subs;
            for (const auto& d : sub.classes)
                if (rel.class_of[d.front()] == c.front()) subs.push_back(&d);
            for (std::size_t j = 0; j < subs.size(); ++j) {
                const auto& src = *subs[j];
                const auto& dst = *subs[(j + i) % subs.size()];
                if (src.size() != dst.size())
                    throw std::invalid_argument("sub-class sizes differ within a class");
                for (std::size_t t = 0; t < src.size(); ++t) m[src[t]] = dst[t];
            }
        }
        Automorphism a(std::move(m));
        if (!a.valid_for(rel)) throw std::invalid_argument("weights do not align across sub-classes");
        maps.push_back(std::move(a));
    }
    return maps;
}

/// Round-robin covering family from Y: the m-th member of each class is the
/// image of the (m mod |Y cap C|)-th point of Y cap C under map number
/// (m div |Y cap C|).
inline std::vector<PartialIso> make_compression_maps(const EqRel& rel,
                                                     const std::vector<int>& subsetY) {
    std::vector<char> inY(rel.size(), 0);
    for (int y : subsetY) inY[y] = 1;
    std::size_t max_maps = 0;
    for (const auto& c : rel.classes) {
        std::size_t t = 0;
        for (int p : c)
            if (inY[p]) ++t;
        if (t == 0) throw std::invalid_argument("Y misses a class");
        max_maps = std::max(max_maps, (c.size() + t - 1) / t);
    }
    std::vector<PartialIso> maps(max_maps, PartialIso(rel.size()));
    for (const auto& c : rel.classes) {
        std::vector<int> ys;
        for (int p : c)
            if (inY[p]) ys.push_back(p);
        for (std::size_t m = 0; m < c.size(); ++m) {
            std::size_t i = m / ys.size();
            int y = ys[m % ys.size()];
            if (rel.space.weight[y] != rel.space.weight[c[m]])
                throw std::invalid_argument("weights do not align for the covering family");
            maps[i].map[y] = c[m];
        }
    }
    return maps;
}

}  // namespace ergolab

#endif
