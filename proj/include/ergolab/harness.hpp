#ifndef ERGOLAB_HARNESS_HPP
#define ERGOLAB_HARNESS_HPP

#include <ergolab/cluster.hpp>
#include <ergolab/entropy.hpp>
#include <ergolab/isoperimetric.hpp>
#include <ergolab/json_io.hpp>
#include <ergolab/percolation.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <vector>

namespace ergolab {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

/// 12 significant digits, '.' decimal; the byte-stable CSV number format.
inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace detail {

inline void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw SchemaError(path, what);
}

inline std::vector<double> parse_grid(const json& j) {
    if (j.is_array()) {
        auto g = j.get<std::vector<double>>();
        require(std::is_sorted(g.begin(), g.end()), "pGrid", "must be ascending");
        return g;
    }
    require(j.is_object() && j.contains("from") && j.contains("to") && j.contains("step"),
            "pGrid", "need an array or {from,to,step}");
    double from = j["from"].get<double>(), to = j["to"].get<double>(), step = j["step"].get<double>();
    require(step > 0 && to >= from, "pGrid", "bad range");
    std::vector<double> g;
    for (int i = 0;; ++i) {
        double p = from + i * step;
        if (p > to + 1e-12) break;
        g.push_back(p);
    }
    return g;
}

inline std::vector<std::uint64_t> parse_seeds(const json& cfg, std::uint64_t offset) {
    require(cfg.contains("seeds") && cfg["seeds"].is_array() && !cfg["seeds"].empty(), "seeds",
            "missing nonempty array");
    std::vector<std::uint64_t> seeds;
    for (const auto& s : cfg["seeds"]) seeds.push_back(s.get<std::uint64_t>() + offset);
    return seeds;
}

}  // namespace detail

struct RunManifest {
    json body;

    void write(const std::filesystem::path& dir) const {
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << body.dump(2) << "\n";
    }
};

class ExperimentRunner {
public:
    ExperimentRunner(json config, std::filesystem::path out_dir, int threads = 1,
                     std::uint64_t seed_offset = 0)
        : cfg_(std::move(config)), dir_(std::move(out_dir)), threads_(std::max(1, threads)),
          seed_offset_(seed_offset) {}

    RunManifest run() {
        detail::require(cfg_.contains("kind") && cfg_["kind"].is_string(), "kind",
                        "missing string");
        std::filesystem::create_directories(dir_);
        manifest_.body["codeVersion"] = "ergolab 0.1.0";
        manifest_.body["kind"] = cfg_["kind"];
        manifest_.body["configDigest"] = hex64(fnv1a64(cfg_.dump()));
        manifest_.body["outputs"] = json::object();
        manifest_.body["results"] = json::object();

        const std::string kind = cfg_["kind"].get<std::string>();
        if (kind == "sweep")
            run_sweep();
        else if (kind == "percolate")
            run_percolate();
        else if (kind == "interval-probe")
            run_interval_probe();
        else if (kind == "spectral")
            run_spectral();
        else if (kind == "entropy-ledger")
            run_entropy();
        else if (kind == "coinduce")
            run_coinduce();
        else if (kind == "extension-suite")
            run_extension_suite();
        else
            throw SchemaError("kind", "unknown kind " + kind);

        manifest_.write(dir_);
        return manifest_;
    }

private:
    void emit(const std::string& name, const std::string& bytes) {
        std::ofstream out(dir_ / name, std::ios::binary);
        out << bytes;
        manifest_.body["outputs"][name] = hex64(fnv1a64(bytes));
    }

    CayleyWindow window() const {
        detail::require(cfg_.contains("window"), "window", "missing");
        return window_from_json(cfg_["window"]);
    }

    SweepOptions sweep_options() const {
        SweepOptions opts;
        if (cfg_.contains("thresholds")) {
            const auto& t = cfg_["thresholds"];
            if (t.contains("frac")) opts.frac_threshold = t["frac"].get<double>();
            if (t.contains("bigSize")) opts.big_size = t["bigSize"].get<std::size_t>();
        }
        return opts;
    }

    void run_sweep() {
        CayleyWindow w = window();
        detail::require(cfg_.contains("pGrid"), "pGrid", "missing");
        std::vector<double> grid = detail::parse_grid(cfg_["pGrid"]);
        std::vector<std::uint64_t> seeds = detail::parse_seeds(cfg_, seed_offset_);
        SweepOptions opts = sweep_options();
        manifest_.body["seedLedger"] = seeds;

        // one task per seed; rows merged in seed order, so the thread count
        // never changes the output
        std::vector<PhaseReport> parts(seeds.size());
        std::size_t next = 0;
        std::mutex mu;
        auto worker = [&]() {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= seeds.size()) return;
                    i = next++;
                }
                parts[i] = sweep(w, grid, {seeds[i]}, opts);
            }
        };
        std::vector<std::future<void>> pool;
        for (int t = 1; t < threads_; ++t) pool.push_back(std::async(std::launch::async, worker));
        worker();
        for (auto& f : pool) f.get();

        std::ostringstream csv;
        csv << "p,seed,largestFrac,bigClusters,spanning\n";
        std::vector<double> mean_largest(grid.size(), 0.0), mean_big(grid.size(), 0.0);
        for (std::size_t s = 0; s < seeds.size(); ++s)
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto& row = parts[s].rows[i];
                csv << fmt_g(row.p) << ',' << row.seed << ',' << fmt_g(row.largestFrac) << ','
                    << row.bigClusters << ',' << row.spanning << '\n';
                mean_largest[i] += row.largestFrac / static_cast<double>(seeds.size());
                mean_big[i] += static_cast<double>(row.bigClusters) / static_cast<double>(seeds.size());
            }
        emit("sweep.csv", csv.str());

        std::ostringstream summary;
        summary << "p,meanLargestFrac,meanBigClusters\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            summary << fmt_g(grid[i]) << ',' << fmt_g(mean_largest[i]) << ',' << fmt_g(mean_big[i])
                    << '\n';
        emit("summary.csv", summary.str());

        double frac_threshold = opts.frac_threshold;
        double pc = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (mean_largest[i] > frac_threshold) {
                pc = grid[i];
                break;
            }
        manifest_.body["results"]["pCHatProxy"] = pc;

        if (cfg_.value("svg", false)) emit("sweep.svg", svg_curve(grid, mean_largest));
    }

    static std::string svg_curve(const std::vector<double>& xs, const std::vector<double>& ys) {
        // a view of summary.csv, never a separate computation path
        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
               "viewBox=\"0 0 640 400\">\n<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
               "<polyline fill=\"none\" stroke=\"black\" points=\"";
        double x_lo = xs.front(), x_hi = xs.back();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double px = 40.0 + 560.0 * (xs[i] - x_lo) / std::max(x_hi - x_lo, 1e-12);
            double py = 380.0 - 360.0 * std::min(std::max(ys[i], 0.0), 1.0);
            svg << fmt_g(px) << ',' << fmt_g(py) << ' ';
        }
        svg << "\"/>\n</svg>\n";
        return svg.str();
    }

    void run_percolate() {
        CayleyWindow w = window();
        detail::require(cfg_.contains("p"), "p", "missing");
        detail::require(cfg_.contains("seed"), "seed", "missing");
        PercConfig pc{cfg_["p"].get<double>(), &w,
                      EdgeLabels{cfg_["seed"].get<std::uint64_t>() + seed_offset_}};
        ClusterPartition part = percolate(pc);
        manifest_.body["seedLedger"] = {pc.labels.seed};
        std::ostringstream csv;
        csv << "clusterId,size,boundaryComponents\n";
        for (int r : part.roots)
            csv << r << ',' << part.size_of(r) << ',' << part.boundary_touches(r) << '\n';
        emit("clusters.csv", csv.str());
        manifest_.body["results"]["clusters"] = part.roots.size();
    }

    void run_interval_probe() {
        detail::require(cfg_.contains("rank"), "rank", "missing");
        detail::require(cfg_.contains("radius"), "radius", "missing");
        detail::require(cfg_.contains("p"), "p", "missing");
        const int rank = cfg_["rank"].get<int>();
        const int radius = cfg_["radius"].get<int>();
        const double p = cfg_["p"].get<double>();
        const long long threshold = cfg_.value("sizeThreshold", 1000ll);
        std::vector<std::uint64_t> seeds = detail::parse_seeds(cfg_, seed_offset_);
        manifest_.body["seedLedger"] = seeds;

        double normT = 2.0 * std::sqrt(2.0 * rank - 1.0);  // free-group tree closed form
        Interval iv = interval_for_p(rank, normT);
        CayleyWindow w = free_group_window(rank, radius);
        ProbeReport probe = nonuniqueness_probe(w, p, seeds, threshold);

        std::ostringstream csv;
        csv << "seed,bigClusters\n";
        for (std::size_t i = 0; i < seeds.size(); ++i) csv << seeds[i] << ',' << probe.counts[i] << '\n';
        emit("probe.csv", csv.str());
        manifest_.body["results"]["intervalLo"] = iv.lo;
        manifest_.body["results"]["intervalHi"] = iv.hi;
        manifest_.body["results"]["meanBigClusters"] = probe.meanBigClusters;
        manifest_.body["results"]["fractionWithMany"] = probe.fractionWithMany;
    }

    void run_spectral() {
        detail::require(cfg_.contains("window"), "window", "missing");
        std::vector<int> radii;
        if (cfg_.contains("radii")) radii = cfg_["radii"].get<std::vector<int>>();
        const int iso_samples = cfg_.value("isoSamples", 20);

        std::ostringstream csv;
        csv << "radius,vertices,edges,windowNorm,isoUpperBound\n";
        auto row = [&csv, iso_samples](const CayleyWindow& w) {
            SpectralEstimate norm = window_norm(w);
            double iso = std::numeric_limits<double>::quiet_NaN();
            if (iso_samples > 0) iso = isoperimetric(w, IsoMode::AnnealedSample, iso_samples).value;
            csv << w.radius << ',' << w.vertex_count() << ',' << w.edges.size() << ','
                << fmt_g(norm.value) << ',' << fmt_g(iso) << '\n';
        };
        if (radii.empty()) {
            row(window_from_json(cfg_["window"]));
        } else {
            json base = cfg_["window"];
            for (int r : radii) {
                base["radius"] = r;
                row(window_from_json(base));
            }
        }
        emit("spectrum.csv", csv.str());
    }

    void run_entropy() {
        BetaLedger ledger;
        double intermediate = 0.0;
        if (cfg_.contains("alphaN")) {
            AlphaEstimate alpha;
            alpha.found = true;
            alpha.n = cfg_["alphaN"].get<long long>();
            ledger.add(lem2_bound(alpha, &intermediate));
        } else {
            detail::require(cfg_.contains("eqrel"), "eqrel", "need alphaN or eqrel");
            std::vector<Automorphism> autos;
            EqRel rel = eqrel_from_json(cfg_["eqrel"], &autos);
            detail::require(!autos.empty(), "eqrel.automorphisms", "need generators");
            Graphing g(rel, autos);
            AlphaEstimate alpha = alpha_search(g, cfg_.value("wordLengthCap", 12),
                                               cfg_.value("beamWidth", 64));
            detail::require(alpha.found, "eqrel", "no alpha witness found below the cap");
            ledger.add(lem2_bound(alpha, &intermediate));
        }
        if (cfg_.contains("schedule")) {
            const auto& s = cfg_["schedule"];
            ledger.add(thm5_limit_entry(s["n"].get<long long>(), s["m"].get<long long>()));
        }
        std::ostringstream csv;
        csv << "rule,value\n";
        for (const auto& e : ledger.entries) csv << e.rule << ',' << fmt_g(e.value) << '\n';
        emit("ledger.csv", csv.str());
        json entries = json::array();
        for (const auto& e : ledger.entries)
            entries.push_back({{"value", e.value}, {"rule", e.rule}, {"chain", e.chain}});
        emit("ledger.json",
             json{{"entries", entries},
                  {"minimum", ledger.minimum()},
                  {"lem2Intermediate", intermediate}}
                     .dump(2) +
                 "\n");
        manifest_.body["results"]["minimum"] = ledger.minimum();
    }

    void run_coinduce() {
        detail::require(cfg_.contains("eqrel"), "eqrel", "missing");
        detail::require(cfg_.contains("betaGenerators"), "betaGenerators", "missing");
        detail::require(cfg_.contains("alphaGenerators"), "alphaGenerators", "missing");
        detail::require(cfg_.contains("yWeights"), "yWeights", "missing");
        EqRel rel = eqrel_from_json(cfg_["eqrel"]);
        std::vector<Automorphism> gen_x, gen_y;
        for (const auto& a : cfg_["betaGenerators"])
            gen_x.push_back(Automorphism(a.get<std::vector<int>>()));
        for (const auto& a : cfg_["alphaGenerators"])
            gen_y.push_back(Automorphism(a.get<std::vector<int>>()));
        std::vector<Rat> yw;
        for (const auto& s : cfg_["yWeights"]) yw.push_back(parse_rat(s.get<std::string>()));
        ProbSpace y_space(std::move(yw));

        PairedAction act = PairedAction::close(gen_x, gen_y);
        ChoiceSystem cs = build_choice_system(rel, act);
        Coinduced co = coinduce(cs, y_space, cfg_.value("budget", 1000000ll));
        CocycleReport cocycles = verify_cocycles(cs);
        CindReport props = verify_cind_props(cs, co);

        json out;
        out["choiceSystem"] = choice_system_to_json(cs);
        out["classes"] = co.relAlpha.classes.size();
        out["points"] = co.relAlpha.size();
        out["cocycles"] = {{"perm", cocycles.permCocycle},
                           {"delta", cocycles.deltaRelation},
                           {"reflexive", cocycles.reflexive}};
        out["props"] = {{"extension", props.extensionOk},
                        {"expansionContainment", props.expansionContainment},
                        {"expansionMeasure", props.expansionMeasure},
                        {"injFailureMeasure", rat_str(props.injFailureMeasure)}};
        emit("coinduce.json", out.dump(2) + "\n");
        manifest_.body["results"]["extension"] = props.extensionOk;
    }

    void run_extension_suite() {
        const int instances = cfg_.value("instances", 50);
        const std::uint64_t seed = cfg_.value("seed", 1ull) + seed_offset_;
        SplitMix rng(seed);
        manifest_.body["seedLedger"] = {seed};
        std::ostringstream csv;
        csv << "instance,points,classes,symbols,extensionPoints,isExtension\n";
        int failures = 0;
        for (int i = 0; i < instances; ++i) {
            const int n = 2 + static_cast<int>(rng.below(11));
            std::vector<Rat> w(n);
            Rat total = 0;
            for (auto& x : w) {
                x = Rat(1 + static_cast<int>(rng.below(5)));
                total += x;
            }
            for (auto& x : w) x /= total;
            std::vector<int> order(n);
            std::iota(order.begin(), order.end(), 0);
            for (int j = n - 1; j > 0; --j)
                std::swap(order[j], order[rng.below(static_cast<std::uint64_t>(j) + 1)]);
            std::vector<std::vector<int>> parts(1);
            for (int j = 0; j < n; ++j) {
                if (!parts.back().empty() && rng.below(3) == 0) parts.emplace_back();
                parts.back().push_back(order[j]);
            }
            EqRel rel = EqRel::from_classes(ProbSpace(w), parts);
            const int k = 1 + static_cast<int>(rng.below(3));
            BernoulliExtension bx;
            try {
                bx = build_extension(rel, BaseSpace::uniform(k), 200000);
            } catch (const BudgetError&) {
                continue;
            }
            ExtensionMap ext{bx.ext, rel, bx.proj};
            bool ok = check_extension(ext).isExtension;
            if (!ok) ++failures;
            csv << i << ',' << n << ',' << rel.classes.size() << ',' << k << ',' << bx.ext.size()
                << ',' << (ok ? 1 : 0) << '\n';
        }
        emit("results.csv", csv.str());
        manifest_.body["results"]["failures"] = failures;
    }

    json cfg_;
    std::filesystem::path dir_;
    int threads_;
    std::uint64_t seed_offset_;
    RunManifest manifest_;
};

struct ReplayResult {
    bool pass = true;
    std::vector<std::string> missing, mismatched;
};

inline ReplayResult replay_check(const std::filesystem::path& dir) {
    ReplayResult res;
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) {
        res.pass = false;
        res.missing.push_back("manifest.json");
        return res;
    }
    json manifest = json::parse(in);
    for (const auto& [name, digest] : manifest["outputs"].items()) {
        std::ifstream f(dir / name, std::ios::binary);
        if (!f) {
            res.pass = false;
            res.missing.push_back(name);
            continue;
        }
        std::ostringstream bytes;
        bytes << f.rdbuf();
        if (hex64(fnv1a64(bytes.str())) != digest.get<std::string>()) {
            res.pass = false;
            res.mismatched.push_back(name);
        }
    }
    return res;
}

}  // namespace ergolab

#endif
