#pragma once

// End-to-end experiment orchestration. The graph side samples critical
// multigraphs across a ladder of sizes, ranks components, and records raw
// and rescaled functionals per replica; the limit side samples weighted
// excursions and their transformed profiles; comparison is by (weighted)
// two-sample KS. Every rescaling exponent lives in one table keyed by alpha.
//
// Runs are deterministic: each replica derives its streams from the master
// seed and (n, replica, purpose) labels, so the result table and every
// persisted byte are independent of thread count and scheduling order.
//
// CSV schemas (fixed; floats are shortest round-trip decimals):
//   graph_results.csv   n,replica,component,functional,raw,rescaled
//   graph_profiles.csv  n,replica,component,snapshot,time,value
//   graph_marks.csv     n,replica,component,l,r,l_rescaled,r_rescaled
//   limit_results.csv   replica,functional,value,weight
//   limit_profiles.csv  replica,snapshot,time,value
//   limit_marks.csv     replica,s,y,t

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "config_model.hpp"
#include "degree_law.hpp"
#include "errors.hpp"
#include "exploration_stats.hpp"
#include "lamperti.hpp"
#include "rng.hpp"
#include "stable.hpp"
#include "stats.hpp"
#include "step_path.hpp"

namespace critsir {

// ---------------------------------------------------------------------------
// Normalization table

// The three exponents of the critical window at a given alpha: component
// duration grows like n^time, daily counts like n^height, component mass
// like n^mass. height + mass = 1 and time = mass - height.
struct ScalingExponents {
    double time = 0.0;
    double height = 0.0;
    double mass = 0.0;
};

inline ScalingExponents scaling_exponents(double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw DomainError("scaling_exponents: alpha must lie in (1,2)");
    return {(alpha - 1.0) / (alpha + 1.0), 1.0 / (alpha + 1.0), alpha / (alpha + 1.0)};
}

// Multipliers taking raw functionals at size n to their rescaled values.
struct ScalingFactors {
    double time = 1.0;
    double height = 1.0;
    double mass = 1.0;
};

inline ScalingFactors scaling_factors(double alpha, double n) {
    if (!(n >= 1.0)) throw DomainError("scaling_factors: n must be at least 1");
    const ScalingExponents e = scaling_exponents(alpha);
    return {std::pow(n, -e.time), std::pow(n, -e.height), std::pow(n, -e.mass)};
}

// ---------------------------------------------------------------------------
// Configuration

// Purpose labels for stream derivation. The numeric values are part of the
// reproducibility contract; changing them changes every output byte.
enum class StreamPurpose : std::uint64_t {
    degrees = 1,
    pairing = 2,
    excursion = 3,
    marks = 4,
    matching = 5,
};

inline std::uint64_t purpose_label(StreamPurpose p) { return static_cast<std::uint64_t>(p); }

inline const std::vector<std::string>& known_functionals() {
    static const std::vector<std::string> names = {"size",     "width",   "radius",
                                                   "peak_day", "surplus", "area"};
    return names;
}

struct ExperimentConfig {
    double alpha = 1.5;
    double c = 0.1;
    std::vector<std::uint64_t> sizes = {1000};
    std::uint64_t replicas = 1;
    std::uint64_t components = 1;  // track the i largest, i = 1..components
    std::uint64_t master_seed = 1;
    std::vector<std::string> functionals = known_functionals();
    std::size_t profile_points = 64;
    std::string out_dir;  // empty: no persistence, results stay in memory
    unsigned threads = 1; // 0: hardware concurrency

    // limit side
    std::string route = "walk";  // "walk" or "grid"
    std::uint64_t excursion_length = 2000;
    double window = 0.05;
    double grid_dt = 1e-3;
    std::string tilt = "exp";  // "exp", "poly", or "none"
    unsigned poly_degree = 1;
    std::uint64_t excursion_attempts = 500000;
};

inline void validate(const ExperimentConfig& cfg) {
    if (!(cfg.alpha > 1.0 && cfg.alpha < 2.0))
        throw DomainError("ExperimentConfig: alpha must lie in (1,2)");
    if (!(cfg.c > 0.0)) throw DomainError("ExperimentConfig: c must be positive");
    if (cfg.sizes.empty()) throw DomainError("ExperimentConfig: no sizes given");
    for (std::uint64_t n : cfg.sizes)
        if (n < 1) throw DomainError("ExperimentConfig: sizes must be at least 1");
    if (cfg.replicas < 1) throw DomainError("ExperimentConfig: replicas must be at least 1");
    if (cfg.components < 1) throw DomainError("ExperimentConfig: components must be at least 1");
    if (cfg.functionals.empty()) throw DomainError("ExperimentConfig: no functionals selected");
    for (const std::string& f : cfg.functionals) {
        const auto& known = known_functionals();
        if (std::find(known.begin(), known.end(), f) == known.end())
            throw DomainError("ExperimentConfig: unknown functional " + f);
    }
    if (cfg.profile_points < 1)
        throw DomainError("ExperimentConfig: profile_points must be at least 1");
    if (cfg.route != "walk" && cfg.route != "grid")
        throw DomainError("ExperimentConfig: route must be walk or grid");
    if (cfg.excursion_length < 1)
        throw DomainError("ExperimentConfig: excursion_length must be at least 1");
    if (!(cfg.window > 0.0)) throw DomainError("ExperimentConfig: window must be positive");
    if (!(cfg.grid_dt > 0.0 && cfg.grid_dt < 1.0))
        throw DomainError("ExperimentConfig: grid_dt must lie in (0,1)");
    if (cfg.tilt != "exp" && cfg.tilt != "poly" && cfg.tilt != "none")
        throw DomainError("ExperimentConfig: tilt must be exp, poly, or none");
    if (cfg.excursion_attempts < 1)
        throw DomainError("ExperimentConfig: excursion_attempts must be at least 1");
}

// ---------------------------------------------------------------------------
// Result tables

struct GraphMark {
    std::uint64_t l = 0;  // label offsets within the component, 0-based
    std::uint64_t r = 0;
    double l_rescaled = 0.0;
    double r_rescaled = 0.0;
};

struct ComponentResult {
    std::uint64_t rank = 1;  // 1-based, by decreasing size, ties by discovery
    std::uint64_t size = 0;
    double width = 0.0;  // max daily count, sup_h Z(h)
    std::uint64_t peak_day = 0;
    std::uint64_t radius = 0;
    std::uint64_t surplus = 0;
    double area = 0.0;  // sum of (walk + 1) over the component's forest steps
    double size_rescaled = 0.0;
    double width_rescaled = 0.0;
    double peak_day_rescaled = 0.0;
    double radius_rescaled = 0.0;
    double area_rescaled = 0.0;
    std::vector<double> profile;  // rescaled Z snapshots at midpoint times
    double profile_dt = 0.0;
    std::vector<GraphMark> marks;
};

struct ReplicaResult {
    std::uint64_t n = 0;
    std::uint64_t replica = 0;
    std::vector<ComponentResult> components;  // sizes nonincreasing in rank
};

struct GraphResultTable {
    std::vector<std::string> functionals;
    std::vector<ReplicaResult> rows;  // ordered by (size index, replica)
};

inline const std::vector<std::string>& limit_functionals() {
    static const std::vector<std::string> names = {
        "area",  "length",    "radius",    "width",    "peak_time",
        "marks", "depth_q25", "depth_q50", "depth_q75"};
    return names;
}

struct LimitRow {
    std::uint64_t replica = 0;
    double weight = 1.0;
    double area = 0.0;
    double length = 0.0;
    double radius = 0.0;
    double width = 0.0;
    double peak_time = 0.0;
    double depth_q25 = 0.0;
    double depth_q50 = 0.0;
    double depth_q75 = 0.0;
    std::uint64_t mark_count = 0;
    std::vector<double> profile;
    double profile_dt = 0.0;
    std::vector<PoissonMark> marks;
};

struct LimitResultTable {
    std::vector<LimitRow> rows;
};

// ---------------------------------------------------------------------------
// CSV plumbing

namespace detail {

inline constexpr const char* kGraphResultsHeader = "n,replica,component,functional,raw,rescaled";
inline constexpr const char* kGraphProfilesHeader = "n,replica,component,snapshot,time,value";
inline constexpr const char* kGraphMarksHeader = "n,replica,component,l,r,l_rescaled,r_rescaled";
inline constexpr const char* kLimitResultsHeader = "replica,functional,value,weight";
inline constexpr const char* kLimitProfilesHeader = "replica,snapshot,time,value";
inline constexpr const char* kLimitMarksHeader = "replica,s,y,t";

// Shortest round-trip decimal; locale-free, so bytes reproduce everywhere.
inline std::string fmt(double v) {
    char buf[64];
    const std::to_chars_result res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct FunctionalCell {
    std::string raw;
    std::string rescaled;
};

inline FunctionalCell functional_cell(const ComponentResult& c, const std::string& name) {
    if (name == "size") return {std::to_string(c.size), fmt(c.size_rescaled)};
    if (name == "width") return {fmt(c.width), fmt(c.width_rescaled)};
    if (name == "radius") return {std::to_string(c.radius), fmt(c.radius_rescaled)};
    if (name == "peak_day") return {std::to_string(c.peak_day), fmt(c.peak_day_rescaled)};
    // the surplus is a count, invariant under the critical rescaling
    if (name == "surplus") return {std::to_string(c.surplus), std::to_string(c.surplus)};
    if (name == "area") return {fmt(c.area), fmt(c.area_rescaled)};
    throw DomainError("functional_cell: unknown functional " + name);
}

inline void write_graph_rows(std::ostream& results, std::ostream& profiles, std::ostream& marks,
                             const ReplicaResult& row,
                             const std::vector<std::string>& functionals) {
    for (const ComponentResult& c : row.components) {
        const std::string prefix = std::to_string(row.n) + ',' + std::to_string(row.replica) +
                                   ',' + std::to_string(c.rank) + ',';
        for (const std::string& name : functionals) {
            const FunctionalCell cell = functional_cell(c, name);
            results << prefix << name << ',' << cell.raw << ',' << cell.rescaled << '\n';
        }
        for (std::size_t j = 0; j < c.profile.size(); ++j) {
            const double t = (static_cast<double>(j) + 0.5) * c.profile_dt;
            profiles << prefix << j << ',' << fmt(t) << ',' << fmt(c.profile[j]) << '\n';
        }
        for (const GraphMark& m : c.marks)
            marks << prefix << m.l << ',' << m.r << ',' << fmt(m.l_rescaled) << ','
                  << fmt(m.r_rescaled) << '\n';
    }
}

inline void write_limit_rows(std::ostream& results, std::ostream& profiles, std::ostream& marks,
                             const LimitRow& row) {
    const std::string prefix = std::to_string(row.replica) + ',';
    const std::string wtail = ',' + fmt(row.weight) + '\n';
    results << prefix << "area," << fmt(row.area) << wtail;
    results << prefix << "length," << fmt(row.length) << wtail;
    results << prefix << "radius," << fmt(row.radius) << wtail;
    results << prefix << "width," << fmt(row.width) << wtail;
    results << prefix << "peak_time," << fmt(row.peak_time) << wtail;
    results << prefix << "marks," << fmt(static_cast<double>(row.mark_count)) << wtail;
    results << prefix << "depth_q25," << fmt(row.depth_q25) << wtail;
    results << prefix << "depth_q50," << fmt(row.depth_q50) << wtail;
    results << prefix << "depth_q75," << fmt(row.depth_q75) << wtail;
    for (std::size_t j = 0; j < row.profile.size(); ++j) {
        const double t = (static_cast<double>(j) + 0.5) * row.profile_dt;
        profiles << prefix << j << ',' << fmt(t) << ',' << fmt(row.profile[j]) << '\n';
    }
    for (const PoissonMark& m : row.marks)
        marks << prefix << fmt(m.s) << ',' << fmt(m.y) << ',' << fmt(m.t) << '\n';
}

inline std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    out << header << '\n';
    return out;
}

inline void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

// Sinks stream rows as replicas complete, flushing per replica so partial
// results survive an interruption. All writes happen on the draining thread.
struct GraphCsvSink {
    std::ofstream results, profiles, marks;

    explicit GraphCsvSink(const std::string& dir) {
        ensure_directory(dir);
        const std::filesystem::path base(dir);
        results = open_csv(base / "graph_results.csv", kGraphResultsHeader);
        profiles = open_csv(base / "graph_profiles.csv", kGraphProfilesHeader);
        marks = open_csv(base / "graph_marks.csv", kGraphMarksHeader);
    }
    void write(const ReplicaResult& row, const std::vector<std::string>& functionals) {
        write_graph_rows(results, profiles, marks, row, functionals);
        results.flush();
        profiles.flush();
        marks.flush();
    }
};

struct LimitCsvSink {
    std::ofstream results, profiles, marks;

    explicit LimitCsvSink(const std::string& dir) {
        ensure_directory(dir);
        const std::filesystem::path base(dir);
        results = open_csv(base / "limit_results.csv", kLimitResultsHeader);
        profiles = open_csv(base / "limit_profiles.csv", kLimitProfilesHeader);
        marks = open_csv(base / "limit_marks.csv", kLimitMarksHeader);
    }
    void write(const LimitRow& row) {
        write_limit_rows(results, profiles, marks, row);
        results.flush();
        profiles.flush();
        marks.flush();
    }
};

// Runs jobs 0..count-1 on a small pool and consumes completed jobs in index
// order on the calling thread, so persisted bytes cannot depend on thread
// timing. On a job failure the contiguous prefix of completed jobs is still
// drained, then the first exception rethrows.
template <class Job, class Sink>
inline void ordered_parallel_run(std::size_t count, unsigned threads, Job&& job, Sink&& sink) {
    if (count == 0) return;
    if (threads == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw > 0 ? hw : 1;
    }
    if (threads == 1) {
        for (std::size_t j = 0; j < count; ++j) {
            job(j);
            sink(j);
        }
        return;
    }

    std::mutex mu;
    std::condition_variable cv;
    std::vector<std::uint8_t> done(count, 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    bool abort = false;

    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= count) return;
            {
                std::lock_guard<std::mutex> lk(mu);
                if (abort) return;
            }
            try {
                job(j);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!first_error) first_error = std::current_exception();
                abort = true;
                cv.notify_all();
                return;
            }
            {
                std::lock_guard<std::mutex> lk(mu);
                done[j] = 1;
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    const std::size_t spawn = std::min<std::size_t>(threads, count);
    pool.reserve(spawn);
    for (std::size_t i = 0; i < spawn; ++i) pool.emplace_back(worker);

    std::size_t head = 0;
    {
        std::unique_lock<std::mutex> lk(mu);
        while (head < count) {
            cv.wait(lk, [&] { return done[head] || abort; });
            while (head < count && done[head]) {
                lk.unlock();
                sink(head);
                lk.lock();
                ++head;
            }
            if (abort && head < count && !done[head]) break;
        }
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Graph-side experiment

namespace detail {

inline ReplicaResult run_graph_replica(const ExperimentConfig& cfg, const CriticalDegreeLaw& law,
                                       const DegreeSampler& sampler, std::uint64_t n,
                                       std::uint64_t replica) {
    ReplicaResult out;
    out.n = n;
    out.replica = replica;

    Rng deg_rng(derive_stream(cfg.master_seed, n, replica, purpose_label(StreamPurpose::degrees)));
    const DegreeSequence seq = sample_degrees(sampler, n, deg_rng);
    Rng pair_rng(derive_stream(cfg.master_seed, n, replica, purpose_label(StreamPurpose::pairing)));
    auto [graph, log] = construct(seq.degrees, ExploreMode::BF, pair_rng);
    const ExploredForest forest = split_backedges(graph, log);
    const std::vector<std::uint64_t> surplus = surplus_by_component(forest);

    const std::size_t comp_count = log.component_boundaries.size();
    std::vector<std::uint64_t> comp_size(comp_count);
    for (std::size_t k = 0; k < comp_count; ++k) {
        const std::uint64_t a = log.component_boundaries[k];
        const std::uint64_t b = k + 1 < comp_count ? log.component_boundaries[k + 1] : n;
        comp_size[k] = b - a;
    }
    std::vector<std::size_t> ranked(comp_count);
    for (std::size_t k = 0; k < comp_count; ++k) ranked[k] = k;
    std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        if (comp_size[a] != comp_size[b]) return comp_size[a] > comp_size[b];
        return a < b;
    });

    const ScalingFactors f = scaling_factors(cfg.alpha, static_cast<double>(n));
    const std::size_t tracked = std::min<std::size_t>(cfg.components, comp_count);
    out.components.reserve(tracked);
    for (std::size_t i = 0; i < tracked; ++i) {
        const std::size_t k = ranked[i];
        ComponentResult c;
        c.rank = i + 1;
        c.size = comp_size[k];
        c.surplus = surplus[k];

        const std::uint32_t root = log.order[log.component_boundaries[k]];
        const auto [Z, C] = height_profile(graph, root);
        std::size_t peak = 0;
        for (std::size_t h = 0; h < Z.values.size(); ++h)
            if (Z.values[h] > Z.values[peak]) peak = h;
        c.width = Z.values[peak];
        c.peak_day = peak;
        c.radius = Z.values.size() - 1;

        // area under (walk + 1) on the component's forest steps: the walk
        // ends the component at -1, so the last term contributes zero
        const StepPath x = component_walk(forest, k);
        double area = 0.0;
        for (double v : x.values) area += v + 1.0;
        c.area = area;

        c.size_rescaled = static_cast<double>(c.size) * f.mass;
        c.width_rescaled = c.width * f.height;
        c.peak_day_rescaled = static_cast<double>(c.peak_day) * f.time;
        c.radius_rescaled = static_cast<double>(c.radius) * f.time;
        c.area_rescaled = c.area * f.height * f.mass;

        const std::size_t days = Z.values.size();
        c.profile_dt = static_cast<double>(days) * f.time / static_cast<double>(cfg.profile_points);
        c.profile.reserve(cfg.profile_points);
        for (std::size_t j = 0; j < cfg.profile_points; ++j) {
            const double frac = (static_cast<double>(j) + 0.5) / static_cast<double>(cfg.profile_points);
            const auto h = static_cast<std::size_t>(frac * static_cast<double>(days));
            c.profile.push_back(Z.values[std::min(h, days - 1)] * f.height);
        }

        const std::uint64_t start = forest.component_starts[k];
        for (const auto& [l, r] : forest.new_leaf_pairs) {
            if (l - 1 < start) continue;
            const std::uint64_t end =
                k + 1 < forest.component_starts.size() ? forest.component_starts[k + 1]
                                                       : forest.size();
            if (l - 1 >= end) continue;
            GraphMark m;
            m.l = l - 1 - start;
            m.r = r - 1 - start;
            m.l_rescaled = static_cast<double>(m.l) * f.mass;
            m.r_rescaled = static_cast<double>(m.r) * f.mass;
            c.marks.push_back(m);
        }
        out.components.push_back(std::move(c));
    }
    return out;
}

} // namespace detail

// Samples R multigraphs at every size, ranks components by decreasing size
// (ties by discovery order), and records raw plus rescaled functionals. When
// cfg.out_dir is set the rows stream to CSV as they complete, in (size,
// replica) order, flushed per replica. Errors propagate after the completed
// prefix has been flushed.
inline GraphResultTable run_graph_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const CriticalDegreeLaw law = solve_critical_family(cfg.alpha, cfg.c);
    const DegreeSampler sampler(law);

    GraphResultTable table;
    table.functionals = cfg.functionals;
    const std::size_t jobs = cfg.sizes.size() * cfg.replicas;
    table.rows.resize(jobs);

    std::unique_ptr<detail::GraphCsvSink> sink;
    if (!cfg.out_dir.empty()) sink = std::make_unique<detail::GraphCsvSink>(cfg.out_dir);

    detail::ordered_parallel_run(
        jobs, cfg.threads,
        [&](std::size_t j) {
            const std::uint64_t n = cfg.sizes[j / cfg.replicas];
            const std::uint64_t replica = j % cfg.replicas;
            table.rows[j] = detail::run_graph_replica(cfg, law, sampler, n, replica);
        },
        [&](std::size_t j) {
            if (sink) sink->write(table.rows[j], table.functionals);
        });
    return table;
}

// ---------------------------------------------------------------------------
// Limit-side experiment

using ExcursionSampler = std::function<StepPath(std::uint64_t replica, Rng&)>;

namespace detail {

inline LimitRow run_limit_replica(const ExperimentConfig& cfg, const CriticalDegreeLaw& law,
                                  const ExcursionSampler& sampler, std::uint64_t replica) {
    LimitRow row;
    row.replica = replica;

    Rng rng(derive_stream(cfg.master_seed, 0, replica, purpose_label(StreamPurpose::excursion)));
    const StepPath e = sampler(replica, rng);

    if (cfg.tilt == "exp")
        row.weight = tilt_weight(e, TiltMode::exp_tilt(law.delta));
    else if (cfg.tilt == "poly")
        row.weight = tilt_weight(e, TiltMode::poly_tilt(cfg.poly_degree));

    row.area = excursion_area(e);
    row.length = static_cast<double>(e.values.size()) * e.dt;

    const StepFn<double> f = excursion_to_step(e);
    const LampertiPair<double> pair = lamperti_pair(f);
    row.radius = pair.iota_terminal;
    row.width = width(f);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < pair.h0.values.size(); ++i)
        if (pair.h0.values[i] > pair.h0.values[peak]) peak = i;
    row.peak_time = pair.h0.breaks[peak];
    row.depth_q25 = depth_quantile(f, 0.25).value;
    row.depth_q50 = depth_quantile(f, 0.50).value;
    row.depth_q75 = depth_quantile(f, 0.75).value;

    const auto [zp, cp] = limit_profile(e, cfg.profile_points);
    row.profile = zp.values;
    row.profile_dt = zp.dt;

    Rng mark_rng(derive_stream(cfg.master_seed, 0, replica, purpose_label(StreamPurpose::marks)));
    const PoissonMarks pm = poisson_marks(e, law.delta, mark_rng);
    row.mark_count = pm.size();
    row.marks = pm.marks;
    return row;
}

} // namespace detail

// Samples R excursions through the given sampler, applies the configured
// tilt as an importance weight, and records transformed-profile functionals
// and Poisson marks per replica. Persistence mirrors the graph side.
inline LimitResultTable run_limit_experiment(const ExperimentConfig& cfg,
                                             const ExcursionSampler& sampler) {
    validate(cfg);
    const CriticalDegreeLaw law = solve_critical_family(cfg.alpha, cfg.c);

    LimitResultTable table;
    table.rows.resize(cfg.replicas);

    std::unique_ptr<detail::LimitCsvSink> sink;
    if (!cfg.out_dir.empty()) sink = std::make_unique<detail::LimitCsvSink>(cfg.out_dir);

    detail::ordered_parallel_run(
        static_cast<std::size_t>(cfg.replicas), cfg.threads,
        [&](std::size_t j) {
            table.rows[j] = detail::run_limit_replica(cfg, law, sampler,
                                                      static_cast<std::uint64_t>(j));
        },
        [&](std::size_t j) {
            if (sink) sink->write(table.rows[j]);
        });
    return table;
}

// Route-based entry: "walk" conditions the size-biased degree walk on a long
// first excursion, "grid" straddles time 1 on a fixed lattice.
inline LimitResultTable run_limit_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const CriticalDegreeLaw law = solve_critical_family(cfg.alpha, cfg.c);
    const StableConfig scfg = stable_config_from_law(law, cfg.grid_dt);
    std::shared_ptr<SizeBiasedDegreeSampler> degree;
    if (cfg.route == "walk") degree = std::make_shared<SizeBiasedDegreeSampler>(law);

    ExcursionSampler sampler = [scfg, degree, &cfg](std::uint64_t, Rng& rng) {
        if (degree)
            return sample_excursion(scfg, *degree, cfg.excursion_length, cfg.window, rng,
                                    cfg.excursion_attempts);
        return sample_excursion_chaumont(scfg, rng);
    };
    return run_limit_experiment(cfg, sampler);
}

// ---------------------------------------------------------------------------
// Comparison and mass matching

struct ComparisonResult {
    double statistic = 0.0;
    double critical = 0.0;
    double level = 0.01;
    bool pass = false;
    double n_eff_a = 0.0;
    double n_eff_b = 0.0;
};

struct NamedComparison {
    std::string name;
    ComparisonResult result;
};

// Two-sample KS with optional weights on b; pass iff the statistic sits
// below the asymptotic critical value at the given level, with b's weights
// folded into an effective sample size.
inline ComparisonResult compare_distributions(const std::vector<double>& a,
                                              const std::vector<double>& b,
                                              const std::vector<double>& weights_b = {},
                                              double level = 0.01) {
    ComparisonResult r;
    double neff_b = 0.0;
    r.statistic = ks_statistic(a, b, weights_b, &neff_b);
    r.level = level;
    r.n_eff_a = static_cast<double>(a.size());
    r.n_eff_b = neff_b;
    r.critical = ks_critical_value(level, r.n_eff_a, neff_b);
    r.pass = r.statistic < r.critical;
    return r;
}

struct WeightedSample {
    std::vector<double> values;
    std::vector<double> weights;
};

enum class LimitFunctional { width, radius };

// Conditioned-length matching: each target mass draws several unit excursions
// from the bank and rescales each to that length by the self-similar scaling.
// The exponential area tilt is renormalized within the mass group, because the
// tilted law conditioned on a rescaled size carries a normalizer that depends
// on that size; raw tilt weights are not comparable across masses and using
// them globally lets a handful of large masses dominate the sample. Every
// group contributes total weight one, so the weighted sample estimates the
// mixture of conditioned tilted laws over the supplied masses and is directly
// comparable to a graph run observed at those same rescaled sizes.
inline WeightedSample mass_matched(const std::vector<StepPath>& bank,
                                   const std::vector<double>& masses, double alpha, double delta,
                                   LimitFunctional which, std::uint64_t seed,
                                   std::size_t draws_per_mass = 64) {
    if (bank.empty() || masses.empty())
        throw EmptySample("mass_matched: empty bank or mass list");
    if (!(delta > 0.0)) throw DomainError("mass_matched: delta must be positive");
    if (draws_per_mass == 0) throw DomainError("mass_matched: draws_per_mass must be positive");
    Rng rng(derive_stream(seed, purpose_label(StreamPurpose::matching)));
    WeightedSample out;
    out.values.reserve(masses.size() * draws_per_mass);
    out.weights.reserve(masses.size() * draws_per_mass);
    std::vector<double> exponents(draws_per_mass);
    for (double m : masses) {
        if (!(m > 0.0)) throw DomainError("mass_matched: masses must be positive");
        for (std::size_t k = 0; k < draws_per_mass; ++k) {
            const StepPath& e = bank[rng.uniform_below(bank.size())];
            const double length = static_cast<double>(e.values.size()) * e.dt;
            const StepPath scaled = scale_excursion(e, m / length, alpha);
            const StepFn<double> f = excursion_to_step(scaled);
            double value = 0.0;
            if (which == LimitFunctional::width) {
                value = width(f);
            } else {
                const ExtReal<double> rad = radius(f);
                if (!rad.finite) throw StateError("mass_matched: infinite radius");
                value = rad.value;
            }
            out.values.push_back(value);
            exponents[k] = excursion_area(scaled) / delta;
        }
        // normalize within the group through the max exponent so the tilt
        // cannot overflow even for large masses
        const double top = *std::max_element(exponents.begin(), exponents.end());
        double wsum = 0.0;
        for (double ex : exponents) wsum += std::exp(ex - top);
        for (double ex : exponents) out.weights.push_back(std::exp(ex - top) / wsum);
    }
    return out;
}

} // namespace critsir
