#pragma once

// Report emission and result-file ingestion. emit_report writes the fixed
// CSV tables, a versioned JSON summary (medians and IQRs of the rescaled
// functionals, weighted limit estimates, comparison outcomes), and an SVG
// overlay of rescaled profiles. Apart from the summary's generated_at field,
// every emitted byte is a deterministic function of the result tables. The
// readers invert the CSV writers exactly, so read-then-emit reproduces the
// files byte for byte.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "harness.hpp"
#include "stats.hpp"

namespace critsir {

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t from = 0;
    for (;;) {
        const std::size_t pos = line.find(',', from);
        if (pos == std::string::npos) {
            out.push_back(line.substr(from));
            return out;
        }
        out.push_back(line.substr(from, pos - from));
        from = pos + 1;
    }
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError("malformed number in results file: " + s);
    return v;
}

inline std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError("malformed integer in results file: " + s);
    return v;
}

inline std::ifstream open_csv_in(const std::filesystem::path& path, const char* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw IoError("unexpected header in " + path.string());
    return in;
}

inline std::string iso8601_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Two fixed decimals without touching the locale; plot coordinates only.
inline std::string fixed2(double v) {
    long long s = std::llround(v * 100.0);
    std::string sign = s < 0 ? "-" : "";
    if (s < 0) s = -s;
    return sign + std::to_string(s / 100) + "." + char('0' + (s % 100) / 10) +
           char('0' + s % 10);
}

inline double rescaled_value(const ComponentResult& c, const std::string& name) {
    if (name == "size") return c.size_rescaled;
    if (name == "width") return c.width_rescaled;
    if (name == "radius") return c.radius_rescaled;
    if (name == "peak_day") return c.peak_day_rescaled;
    if (name == "surplus") return static_cast<double>(c.surplus);
    if (name == "area") return c.area_rescaled;
    throw DomainError("rescaled_value: unknown functional " + name);
}

inline double limit_value(const LimitRow& row, const std::string& name) {
    if (name == "area") return row.area;
    if (name == "length") return row.length;
    if (name == "radius") return row.radius;
    if (name == "width") return row.width;
    if (name == "peak_time") return row.peak_time;
    if (name == "marks") return static_cast<double>(row.mark_count);
    if (name == "depth_q25") return row.depth_q25;
    if (name == "depth_q50") return row.depth_q50;
    if (name == "depth_q75") return row.depth_q75;
    throw DomainError("limit_value: unknown functional " + name);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Readers (exact inverses of the CSV writers)

inline GraphResultTable read_graph_results(const std::string& dir) {
    const std::filesystem::path base(dir);
    GraphResultTable table;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> row_index;

    auto locate_row = [&](std::uint64_t n, std::uint64_t replica) -> ReplicaResult& {
        const auto key = std::make_pair(n, replica);
        const auto it = row_index.find(key);
        if (it != row_index.end()) return table.rows[it->second];
        row_index.emplace(key, table.rows.size());
        ReplicaResult row;
        row.n = n;
        row.replica = replica;
        table.rows.push_back(std::move(row));
        return table.rows.back();
    };
    auto locate_component = [&](ReplicaResult& row, std::uint64_t rank,
                                bool create) -> ComponentResult& {
        for (ComponentResult& c : row.components)
            if (c.rank == rank) return c;
        if (!create) throw IoError("results file references a missing component");
        ComponentResult c;
        c.rank = rank;
        row.components.push_back(std::move(c));
        return row.components.back();
    };

    {
        std::ifstream in = detail::open_csv_in(base / "graph_results.csv",
                                               detail::kGraphResultsHeader);
        std::string line;
        while (std::getline(in, line)) {
            const std::vector<std::string> f = detail::split_csv(line);
            if (f.size() != 6) throw IoError("malformed row in graph_results.csv");
            ReplicaResult& row = locate_row(detail::parse_u64(f[0]), detail::parse_u64(f[1]));
            ComponentResult& c = locate_component(row, detail::parse_u64(f[2]), true);
            const std::string& name = f[3];
            const double raw = detail::parse_double(f[4]);
            const double rescaled = detail::parse_double(f[5]);
            if (std::find(table.functionals.begin(), table.functionals.end(), name) ==
                table.functionals.end())
                table.functionals.push_back(name);
            if (name == "size") {
                c.size = static_cast<std::uint64_t>(std::llround(raw));
                c.size_rescaled = rescaled;
            } else if (name == "width") {
                c.width = raw;
                c.width_rescaled = rescaled;
            } else if (name == "radius") {
                c.radius = static_cast<std::uint64_t>(std::llround(raw));
                c.radius_rescaled = rescaled;
            } else if (name == "peak_day") {
                c.peak_day = static_cast<std::uint64_t>(std::llround(raw));
                c.peak_day_rescaled = rescaled;
            } else if (name == "surplus") {
                c.surplus = static_cast<std::uint64_t>(std::llround(raw));
            } else if (name == "area") {
                c.area = raw;
                c.area_rescaled = rescaled;
            } else {
                throw IoError("unknown functional in graph_results.csv: " + name);
            }
        }
    }
    {
        std::ifstream in = detail::open_csv_in(base / "graph_profiles.csv",
                                               detail::kGraphProfilesHeader);
        std::string line;
        while (std::getline(in, line)) {
            const std::vector<std::string> f = detail::split_csv(line);
            if (f.size() != 6) throw IoError("malformed row in graph_profiles.csv");
            ReplicaResult& row = locate_row(detail::parse_u64(f[0]), detail::parse_u64(f[1]));
            ComponentResult& c = locate_component(row, detail::parse_u64(f[2]), false);
            const std::uint64_t snapshot = detail::parse_u64(f[3]);
            if (snapshot != c.profile.size())
                throw IoError("graph_profiles.csv rows out of order");
            const double t = detail::parse_double(f[4]);
            if (snapshot == 0) c.profile_dt = 2.0 * t;  // first midpoint sits at dt/2
            c.profile.push_back(detail::parse_double(f[5]));
        }
    }
    {
        std::ifstream in = detail::open_csv_in(base / "graph_marks.csv",
                                               detail::kGraphMarksHeader);
        std::string line;
        while (std::getline(in, line)) {
            const std::vector<std::string> f = detail::split_csv(line);
            if (f.size() != 7) throw IoError("malformed row in graph_marks.csv");
            ReplicaResult& row = locate_row(detail::parse_u64(f[0]), detail::parse_u64(f[1]));
            ComponentResult& c = locate_component(row, detail::parse_u64(f[2]), false);
            GraphMark m;
            m.l = detail::parse_u64(f[3]);
            m.r = detail::parse_u64(f[4]);
            m.l_rescaled = detail::parse_double(f[5]);
            m.r_rescaled = detail::parse_double(f[6]);
            c.marks.push_back(m);
        }
    }
    return table;
}

inline LimitResultTable read_limit_results(const std::string& dir) {
    const std::filesystem::path base(dir);
    LimitResultTable table;
    std::map<std::uint64_t, std::size_t> row_index;

    auto locate_row = [&](std::uint64_t replica, bool create) -> LimitRow& {
        const auto it = row_index.find(replica);
        if (it != row_index.end()) return table.rows[it->second];
        if (!create) throw IoError("results file references a missing replica");
        row_index.emplace(replica, table.rows.size());
        LimitRow row;
        row.replica = replica;
        table.rows.push_back(std::move(row));
        return table.rows.back();
    };

    {
        std::ifstream in = detail::open_csv_in(base / "limit_results.csv",
                                               detail::kLimitResultsHeader);
        std::string line;
        while (std::getline(in, line)) {
            const std::vector<std::string> f = detail::split_csv(line);
            if (f.size() != 4) throw IoError("malformed row in limit_results.csv");
            LimitRow& row = locate_row(detail::parse_u64(f[0]), true);
            const std::string& name = f[1];
            const double value = detail::parse_double(f[2]);
            row.weight = detail::parse_double(f[3]);
            if (name == "area") row.area = value;
            else if (name == "length") row.length = value;
            else if (name == "radius") row.radius = value;
            else if (name == "width") row.width = value;
            else if (name == "peak_time") row.peak_time = value;
            else if (name == "marks") row.mark_count = static_cast<std::uint64_t>(std::llround(value));
            else if (name == "depth_q25") row.depth_q25 = value;
            else if (name == "depth_q50") row.depth_q50 = value;
            else if (name == "depth_q75") row.depth_q75 = value;
            else throw IoError("unknown functional in limit_results.csv: " + name);
        }
    }
    {
        std::ifstream in = detail::open_csv_in(base / "limit_profiles.csv",
                                               detail::kLimitProfilesHeader);
        std::string line;
        while (std::getline(in, line)) {
            const std::vector<std::string> f = detail::split_csv(line);
            if (f.size() != 4) throw IoError("malformed row in limit_profiles.csv");
            LimitRow& row = locate_row(detail::parse_u64(f[0]), false);
            const std::uint64_t snapshot = detail::parse_u64(f[1]);
            if (snapshot != row.profile.size())
                throw IoError("limit_profiles.csv rows out of order");
            const double t = detail::parse_double(f[2]);
            if (snapshot == 0) row.profile_dt = 2.0 * t;
            row.profile.push_back(detail::parse_double(f[3]));
        }
    }
    {
        std::ifstream in = detail::open_csv_in(base / "limit_marks.csv",
                                               detail::kLimitMarksHeader);
        std::string line;
        while (std::getline(in, line)) {
            const std::vector<std::string> f = detail::split_csv(line);
            if (f.size() != 4) throw IoError("malformed row in limit_marks.csv");
            LimitRow& row = locate_row(detail::parse_u64(f[0]), false);
            PoissonMark m;
            m.s = detail::parse_double(f[1]);
            m.y = detail::parse_double(f[2]);
            m.t = detail::parse_double(f[3]);
            row.marks.push_back(m);
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// SVG overlay

// Overlay of rescaled profiles: discrete component snapshots in blue, limit
// profiles in red, axes labeled by the data maxima. At most 48 polylines per
// family, taken in table order, to bound the file size.
inline std::string profiles_svg(const GraphResultTable& graph, const LimitResultTable& limit) {
    struct Poly {
        const std::vector<double>* values;
        double dt;
        bool discrete;
    };
    std::vector<Poly> polys;
    std::size_t taken = 0;
    for (const ReplicaResult& row : graph.rows) {
        for (const ComponentResult& c : row.components) {
            if (taken >= 48) break;
            if (!c.profile.empty()) {
                polys.push_back({&c.profile, c.profile_dt, true});
                ++taken;
            }
        }
        if (taken >= 48) break;
    }
    taken = 0;
    for (const LimitRow& row : limit.rows) {
        if (taken >= 48) break;
        if (!row.profile.empty()) {
            polys.push_back({&row.profile, row.profile_dt, false});
            ++taken;
        }
    }

    double max_t = 0.0, max_v = 0.0;
    for (const Poly& p : polys) {
        max_t = std::max(max_t, static_cast<double>(p.values->size()) * p.dt);
        for (double v : *p.values) max_v = std::max(max_v, v);
    }
    if (!(max_t > 0.0)) max_t = 1.0;
    if (!(max_v > 0.0)) max_v = 1.0;

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
    s += "  <title>rescaled profiles</title>\n";
    s += "  <rect x=\"60\" y=\"20\" width=\"560\" height=\"340\" fill=\"none\" "
         "stroke=\"#667788\"/>\n";
    s += "  <text x=\"52\" y=\"366\" text-anchor=\"end\" font-size=\"12\">0</text>\n";
    s += "  <text x=\"52\" y=\"30\" text-anchor=\"end\" font-size=\"12\">" +
         detail::fixed2(max_v) + "</text>\n";
    s += "  <text x=\"620\" y=\"378\" text-anchor=\"end\" font-size=\"12\">" +
         detail::fixed2(max_t) + "</text>\n";
    s += "  <text x=\"488\" y=\"38\" font-size=\"12\" fill=\"#1f77b4\">discrete</text>\n";
    s += "  <text x=\"488\" y=\"54\" font-size=\"12\" fill=\"#d62728\">limit</text>\n";
    for (const Poly& p : polys) {
        s += "  <polyline class=\"";
        s += p.discrete ? "discrete" : "limit";
        s += "\" fill=\"none\" stroke=\"";
        s += p.discrete ? "#1f77b4" : "#d62728";
        s += "\" stroke-opacity=\"0.35\" points=\"";
        for (std::size_t j = 0; j < p.values->size(); ++j) {
            const double t = (static_cast<double>(j) + 0.5) * p.dt;
            const double px = 60.0 + 560.0 * t / max_t;
            const double py = 360.0 - 340.0 * (*p.values)[j] / max_v;
            if (j > 0) s += ' ';
            s += detail::fixed2(px) + "," + detail::fixed2(py);
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

// ---------------------------------------------------------------------------
// Report emission

inline void emit_report(const GraphResultTable& graph, const LimitResultTable& limit,
                        const std::vector<NamedComparison>& comparisons,
                        const std::string& dir) {
    detail::ensure_directory(dir);
    const std::filesystem::path base(dir);

    {
        detail::GraphCsvSink sink(dir);
        for (const ReplicaResult& row : graph.rows) sink.write(row, graph.functionals);
    }
    {
        detail::LimitCsvSink sink(dir);
        for (const LimitRow& row : limit.rows) sink.write(row);
    }

    nlohmann::json j;
    j["schema_version"] = 1;
    j["generated_at"] = detail::iso8601_utc_now();

    j["graph"]["replicas"] = graph.rows.size();
    j["graph"]["functionals"] = graph.functionals;
    nlohmann::json per_size = nlohmann::json::object();
    std::vector<std::uint64_t> seen;
    for (const ReplicaResult& row : graph.rows)
        if (std::find(seen.begin(), seen.end(), row.n) == seen.end()) seen.push_back(row.n);
    for (std::uint64_t n : seen) {
        nlohmann::json by_fn = nlohmann::json::object();
        for (const std::string& name : graph.functionals) {
            // summary statistics describe the largest component's rescaled law
            std::vector<double> values;
            for (const ReplicaResult& row : graph.rows) {
                if (row.n != n) continue;
                for (const ComponentResult& c : row.components)
                    if (c.rank == 1) values.push_back(detail::rescaled_value(c, name));
            }
            if (values.empty()) continue;
            const double q1 = sample_quantile(values, 0.25);
            const double q3 = sample_quantile(values, 0.75);
            by_fn[name] = {{"median", sample_quantile(values, 0.5)}, {"iqr", q3 - q1}};
        }
        per_size[std::to_string(n)] = by_fn;
    }
    j["graph"]["per_size"] = per_size;

    j["limit"]["replicas"] = limit.rows.size();
    nlohmann::json limit_summary = nlohmann::json::object();
    if (!limit.rows.empty()) {
        std::vector<double> weights;
        for (const LimitRow& row : limit.rows) weights.push_back(row.weight);
        for (const std::string& name : limit_functionals()) {
            std::vector<double> values;
            for (const LimitRow& row : limit.rows)
                values.push_back(detail::limit_value(row, name));
            const double q1 = sample_quantile(values, 0.25);
            const double q3 = sample_quantile(values, 0.75);
            const SelfNormalized est = self_normalized_mean(values, weights);
            limit_summary[name] = {{"median", sample_quantile(values, 0.5)},
                                   {"iqr", q3 - q1},
                                   {"weighted_mean", est.estimate},
                                   {"std_error", est.std_error}};
        }
    }
    j["limit"]["summary"] = limit_summary;

    nlohmann::json cmps = nlohmann::json::array();
    for (const NamedComparison& c : comparisons)
        cmps.push_back({{"name", c.name},
                        {"statistic", c.result.statistic},
                        {"critical", c.result.critical},
                        {"level", c.result.level},
                        {"pass", c.result.pass},
                        {"n_eff_a", c.result.n_eff_a},
                        {"n_eff_b", c.result.n_eff_b}});
    j["comparisons"] = cmps;

    {
        std::ofstream out(base / "summary.json", std::ios::binary);
        if (!out) throw IoError("cannot open " + (base / "summary.json").string());
        out << j.dump(2) << '\n';
    }
    {
        std::ofstream out(base / "profiles.svg", std::ios::binary);
        if (!out) throw IoError("cannot open " + (base / "profiles.svg").string());
        out << profiles_svg(graph, limit);
    }
}

} // namespace critsir
