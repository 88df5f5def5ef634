// Command line front end for the experiment harness.
//
// Subcommands:
//   solve-law       print the critical degree family as JSON
//   simulate-graph  run graph-side experiments, write CSVs
//   simulate-limit  run limit-side experiments, write CSVs
//   compare         two-sample KS test on value files, verdict in exit code
//   report          regenerate summary.json / profiles.svg from stored CSVs
//
// Every subcommand accepts --config FILE; keys in that JSON file override
// the corresponding flags. When --out is absent the CRITSIR_OUT_DIR
// environment variable supplies the output directory.
//
// Exit codes: 0 success (compare: distributions agree at the level),
// 1 compare rejected, 2 any error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <critsir/degree_law.hpp>
#include <critsir/errors.hpp>
#include <critsir/harness.hpp>
#include <critsir/report.hpp>

namespace {

using critsir::DomainError;
using critsir::IoError;

using Setter = std::function<void(const nlohmann::json&)>;
using Overrides = std::map<std::string, Setter>;

nlohmann::json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object()) throw IoError("config: top level must be an object: " + path);
    return j;
}

void apply_config(const std::string& path, const Overrides& setters) {
    if (path.empty()) return;
    const nlohmann::json j = load_config(path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto s = setters.find(it.key());
        if (s == setters.end())
            throw DomainError("config: unknown key '" + it.key() + "' in " + path);
        s->second(it.value());
    }
}

std::string resolve_out(const std::string& out) {
    if (!out.empty()) return out;
    if (const char* env = std::getenv("CRITSIR_OUT_DIR"); env != nullptr && *env != '\0')
        return env;
    throw DomainError("no output directory: pass --out or set CRITSIR_OUT_DIR");
}

std::vector<std::uint64_t> u64_list(const nlohmann::json& v) {
    std::vector<std::uint64_t> out;
    if (v.is_array())
        for (const auto& x : v) out.push_back(x.get<std::uint64_t>());
    else
        out.push_back(v.get<std::uint64_t>());
    return out;
}

struct ValueFile {
    std::vector<double> values;
    std::vector<double> weights;  // empty unless every line carried one
};

// One value per line; an optional second column is a weight. Comma, tab,
// and space all separate. Either every line has a weight or none does.
ValueFile read_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("compare: cannot open " + path);
    ValueFile vf;
    std::string line;
    while (std::getline(in, line)) {
        for (char& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream ss(line);
        const std::vector<std::string> tok{std::istream_iterator<std::string>(ss),
                                           std::istream_iterator<std::string>()};
        if (tok.empty()) continue;
        if (tok.size() > 2) throw IoError("compare: more than two columns in " + path);
        vf.values.push_back(critsir::detail::parse_double(tok[0]));
        if (tok.size() == 2) vf.weights.push_back(critsir::detail::parse_double(tok[1]));
        if (!vf.weights.empty() && vf.weights.size() != vf.values.size())
            throw IoError("compare: inconsistent weight column in " + path);
    }
    return vf;
}

void add_law_flags(CLI::App* sub, critsir::ExperimentConfig& cfg) {
    sub->add_option("--alpha", cfg.alpha, "tail index in (1,2)")->capture_default_str();
    sub->add_option("--c", cfg.c, "tail weight of the degree law")->capture_default_str();
}

int cmd_solve_law(double alpha, double c) {
    const critsir::CriticalDegreeLaw law = critsir::solve_critical_family(alpha, c);
    const critsir::DegreeSampler sampler(law);
    nlohmann::json j;
    j["alpha"] = law.alpha;
    j["c"] = law.c;
    j["p1"] = law.p1;
    j["p2"] = law.p2;
    j["delta"] = law.delta;
    j["table_size"] = sampler.table_size();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate_graph(critsir::ExperimentConfig cfg) {
    cfg.out_dir = resolve_out(cfg.out_dir);
    const critsir::GraphResultTable table = critsir::run_graph_experiment(cfg);
    std::cout << "graph: " << table.rows.size() << " replicas across " << cfg.sizes.size()
              << " sizes -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_simulate_limit(critsir::ExperimentConfig cfg) {
    cfg.out_dir = resolve_out(cfg.out_dir);
    const critsir::LimitResultTable table = critsir::run_limit_experiment(cfg);
    std::cout << "limit: " << table.rows.size() << " replicas (" << cfg.route << " route) -> "
              << cfg.out_dir << "\n";
    return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, double level) {
    const ValueFile a = read_value_file(a_path);
    const ValueFile b = read_value_file(b_path);
    if (!a.weights.empty())
        throw DomainError("compare: weights are only supported on --b");
    const critsir::ComparisonResult r =
        critsir::compare_distributions(a.values, b.values, b.weights, level);
    nlohmann::json j;
    j["statistic"] = r.statistic;
    j["critical"] = r.critical;
    j["level"] = r.level;
    j["pass"] = r.pass;
    j["n_eff_a"] = r.n_eff_a;
    j["n_eff_b"] = r.n_eff_b;
    std::cout << j.dump(2) << "\n";
    return r.pass ? 0 : 1;
}

int cmd_report(const std::string& in_dir, const std::string& out_flag) {
    const std::string out = resolve_out(out_flag);
    namespace fs = std::filesystem;
    critsir::GraphResultTable graph;
    if (fs::exists(fs::path(in_dir) / "graph_results.csv"))
        graph = critsir::read_graph_results(in_dir);
    critsir::LimitResultTable limit;
    if (fs::exists(fs::path(in_dir) / "limit_results.csv"))
        limit = critsir::read_limit_results(in_dir);
    if (graph.rows.empty() && limit.rows.empty())
        throw IoError("report: no result CSVs found in " + in_dir);
    // Comparison verdicts need the excursion bank for mass matching, which
    // is not serialized; regenerated reports carry summaries and plots only.
    critsir::emit_report(graph, limit, {}, out);
    std::cout << "report: " << graph.rows.size() << " graph + " << limit.rows.size()
              << " limit replicas -> " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"critical epidemics on configuration-model graphs"};
    app.require_subcommand(1);
    int rc = 0;

    // solve-law
    double law_alpha = 1.5, law_c = 0.1;
    std::string law_config;
    CLI::App* solve = app.add_subcommand("solve-law", "print the critical degree family as JSON");
    solve->add_option("--alpha", law_alpha, "tail index in (1,2)")->capture_default_str();
    solve->add_option("--c", law_c, "tail weight of the degree law")->capture_default_str();
    solve->add_option("--config", law_config, "JSON file whose keys override the flags");
    solve->callback([&] {
        apply_config(law_config,
                     {{"alpha", [&](const nlohmann::json& v) { law_alpha = v.get<double>(); }},
                      {"c", [&](const nlohmann::json& v) { law_c = v.get<double>(); }}});
        rc = cmd_solve_law(law_alpha, law_c);
    });

    // simulate-graph
    critsir::ExperimentConfig gcfg;
    std::string graph_config;
    CLI::App* graph = app.add_subcommand("simulate-graph", "sample graphs, write outbreak CSVs");
    add_law_flags(graph, gcfg);
    graph->add_option("--sizes", gcfg.sizes, "vertex counts, comma separated")
        ->delimiter(',')
        ->capture_default_str();
    graph->add_option("--replicas", gcfg.replicas, "replicas per size")->capture_default_str();
    graph->add_option("--seed", gcfg.master_seed, "master seed")->capture_default_str();
    graph->add_option("--out", gcfg.out_dir, "output directory (or CRITSIR_OUT_DIR)");
    graph->add_option("--components", gcfg.components, "largest components tracked per replica")
        ->capture_default_str();
    graph->add_option("--threads", gcfg.threads, "worker threads, 0 = hardware")
        ->capture_default_str();
    graph->add_option("--profile-points", gcfg.profile_points, "snapshots per stored profile")
        ->capture_default_str();
    graph->add_option("--config", graph_config, "JSON file whose keys override the flags");
    graph->callback([&] {
        apply_config(
            graph_config,
            {{"alpha", [&](const nlohmann::json& v) { gcfg.alpha = v.get<double>(); }},
             {"c", [&](const nlohmann::json& v) { gcfg.c = v.get<double>(); }},
             {"sizes", [&](const nlohmann::json& v) { gcfg.sizes = u64_list(v); }},
             {"replicas", [&](const nlohmann::json& v) { gcfg.replicas = v.get<std::uint64_t>(); }},
             {"seed", [&](const nlohmann::json& v) { gcfg.master_seed = v.get<std::uint64_t>(); }},
             {"out", [&](const nlohmann::json& v) { gcfg.out_dir = v.get<std::string>(); }},
             {"components",
              [&](const nlohmann::json& v) { gcfg.components = v.get<std::uint64_t>(); }},
             {"threads", [&](const nlohmann::json& v) { gcfg.threads = v.get<std::uint64_t>(); }},
             {"profile-points",
              [&](const nlohmann::json& v) { gcfg.profile_points = v.get<std::uint64_t>(); }}});
        rc = cmd_simulate_graph(gcfg);
    });

    // simulate-limit
    critsir::ExperimentConfig lcfg;
    std::string limit_config;
    CLI::App* limit = app.add_subcommand("simulate-limit", "sample limit excursions, write CSVs");
    add_law_flags(limit, lcfg);
    limit->add_option("--route", lcfg.route, "excursion sampler: walk or grid")
        ->capture_default_str();
    limit->add_option("--grid", lcfg.grid_dt, "grid resolution for the grid route")
        ->capture_default_str();
    limit->add_option("--excursion-length", lcfg.excursion_length,
                      "target walk length for the walk route")
        ->capture_default_str();
    limit->add_option("--window", lcfg.window, "relative length window for the walk route")
        ->capture_default_str();
    limit->add_option("--replicas", lcfg.replicas, "replica count")->capture_default_str();
    limit->add_option("--seed", lcfg.master_seed, "master seed")->capture_default_str();
    limit->add_option("--tilt", lcfg.tilt, "reweighting: exp, poly, or none")
        ->capture_default_str();
    limit->add_option("--poly-k", lcfg.poly_degree, "degree for the poly tilt")
        ->capture_default_str();
    limit->add_option("--out", lcfg.out_dir, "output directory (or CRITSIR_OUT_DIR)");
    limit->add_option("--threads", lcfg.threads, "worker threads, 0 = hardware")
        ->capture_default_str();
    limit->add_option("--profile-points", lcfg.profile_points, "snapshots per stored profile")
        ->capture_default_str();
    limit->add_option("--config", limit_config, "JSON file whose keys override the flags");
    limit->callback([&] {
        apply_config(
            limit_config,
            {{"alpha", [&](const nlohmann::json& v) { lcfg.alpha = v.get<double>(); }},
             {"c", [&](const nlohmann::json& v) { lcfg.c = v.get<double>(); }},
             {"route", [&](const nlohmann::json& v) { lcfg.route = v.get<std::string>(); }},
             {"grid", [&](const nlohmann::json& v) { lcfg.grid_dt = v.get<double>(); }},
             {"excursion-length",
              [&](const nlohmann::json& v) { lcfg.excursion_length = v.get<std::uint64_t>(); }},
             {"window", [&](const nlohmann::json& v) { lcfg.window = v.get<double>(); }},
             {"replicas", [&](const nlohmann::json& v) { lcfg.replicas = v.get<std::uint64_t>(); }},
             {"seed", [&](const nlohmann::json& v) { lcfg.master_seed = v.get<std::uint64_t>(); }},
             {"tilt", [&](const nlohmann::json& v) { lcfg.tilt = v.get<std::string>(); }},
             {"poly-k",
              [&](const nlohmann::json& v) { lcfg.poly_degree = v.get<std::uint64_t>(); }},
             {"out", [&](const nlohmann::json& v) { lcfg.out_dir = v.get<std::string>(); }},
             {"threads", [&](const nlohmann::json& v) { lcfg.threads = v.get<std::uint64_t>(); }},
             {"profile-points",
              [&](const nlohmann::json& v) { lcfg.profile_points = v.get<std::uint64_t>(); }}});
        rc = cmd_simulate_limit(lcfg);
    });

    // compare
    std::string cmp_a, cmp_b, cmp_config;
    double cmp_level = 0.01;
    CLI::App* cmp = app.add_subcommand("compare", "two-sample KS test on value files");
    cmp->add_option("--a", cmp_a, "first sample, one value per line")->required();
    cmp->add_option("--b", cmp_b, "second sample, optional weight column")->required();
    cmp->add_option("--level", cmp_level, "rejection level")->capture_default_str();
    cmp->add_option("--config", cmp_config, "JSON file whose keys override the flags");
    cmp->callback([&] {
        apply_config(cmp_config,
                     {{"a", [&](const nlohmann::json& v) { cmp_a = v.get<std::string>(); }},
                      {"b", [&](const nlohmann::json& v) { cmp_b = v.get<std::string>(); }},
                      {"level", [&](const nlohmann::json& v) { cmp_level = v.get<double>(); }}});
        rc = cmd_compare(cmp_a, cmp_b, cmp_level);
    });

    // report
    std::string rep_in, rep_out, rep_config;
    CLI::App* rep = app.add_subcommand("report", "regenerate summary and plots from CSVs");
    rep->add_option("--in", rep_in, "directory holding result CSVs")->required();
    rep->add_option("--out", rep_out, "output directory (or CRITSIR_OUT_DIR)");
    rep->add_option("--config", rep_config, "JSON file whose keys override the flags");
    rep->callback([&] {
        apply_config(rep_config,
                     {{"in", [&](const nlohmann::json& v) { rep_in = v.get<std::string>(); }},
                      {"out", [&](const nlohmann::json& v) { rep_out = v.get<std::string>(); }}});
        rc = cmd_report(rep_in, rep_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
