// seed — influence-weighted conflict-graph data selection.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "seed/errors.hpp"
#include "seed/graph.hpp"
#include "seed/influence.hpp"
#include "seed/knn.hpp"
#include "seed/matrixio.hpp"
#include "seed/pipeline.hpp"
#include "seed/rng.hpp"
#include "seed/synth.hpp"
#include "seed/wis.hpp"

namespace {

struct CommonOpts {
    std::string manifest;
    std::string out_dir;
    seed::SeedConfig config;
    std::int64_t budget = -1;
    double budget_frac = -1.0;
    bool no_subspace = false;
    bool no_local_scale = false;
    bool no_wis = false;
    bool emit_edges = false;
};

void add_tuning_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--k", o.config.k, "Neighbour count for density estimation")
        ->capture_default_str();
    cmd->add_option("--alpha", o.config.alpha, "Local scaling factor, in (0,1)")
        ->capture_default_str();
    cmd->add_option("--tau", o.config.tau,
                    "Global edge threshold on cosine similarity (no principled default "
                    "exists; 0.5 is the configurable baseline)")
        ->capture_default_str();
    cmd->add_flag("--no-subspace", o.no_subspace, "Disable node-weight subspace calibration");
    cmd->add_flag("--no-local-scale", o.no_local_scale, "Disable density-adaptive thresholds");
    cmd->add_flag("--no-wis", o.no_wis, "Disable the conflict graph: plain top-K by weight");
    cmd->add_flag("--allow-negative", o.config.allow_negative,
                  "Keep selecting past negative-weight rows until the budget fills");
    cmd->add_flag("--mask-edges", o.config.mask_edges,
                  "Apply the channel mask to edge embeddings as well");
    cmd->add_option("--batch-size", o.config.batch_size, "Candidate block length for the search")
        ->capture_default_str();
    cmd->add_option("--seed", o.config.seed, "Seed echoed into the report")
        ->capture_default_str();
}

void finalize_config(CommonOpts& o) {
    o.config.enable_subspace = !o.no_subspace;
    o.config.enable_local_scaling = !o.no_local_scale;
    o.config.enable_wis = !o.no_wis;
    if (o.budget >= 0) o.config.budget = o.budget;
    if (o.budget_frac >= 0.0) o.config.budget_fraction = o.budget_frac;
}

int cmd_select(CommonOpts& o, const std::string& target) {
    finalize_config(o);
    o.config.target_name = target;
    const auto bundle = seed::read_bundle(o.manifest);
    const auto report = seed::run_select(bundle, o.config);
    seed::emit_report(report, o.out_dir, o.emit_edges);
    std::printf("selected %zu of %zu rows, total weight %.6g -> %s\n",
                report.selection.selected.size(), bundle.train_count,
                report.selection.total_weight, o.out_dir.c_str());
    return 0;
}

int cmd_vote(CommonOpts& o, double retain_frac) {
    finalize_config(o);
    const auto bundle = seed::read_bundle(o.manifest);
    const auto tally = seed::run_vote(bundle, o.config, retain_frac);

    std::filesystem::create_directories(o.out_dir);
    {
        std::ofstream out(std::filesystem::path(o.out_dir) / "selected.txt");
        if (!out) throw seed::IoError("cannot write selected.txt in " + o.out_dir);
        for (const auto id : tally.retained) out << id << "\n";
    }
    {
        nlohmann::json j;
        j["votes"] = tally.votes;
        j["ranking"] = tally.ranking;
        j["retained"] = tally.retained;
        j["weight_sums"] = tally.weight_sums;
        for (const auto& [name, ids] : tally.per_target_selected) {
            j["per_target"][name] = ids;
        }
        std::ofstream out(std::filesystem::path(o.out_dir) / "vote.json");
        if (!out) throw seed::IoError("cannot write vote.json in " + o.out_dir);
        out << j.dump(2) << "\n";
    }
    std::printf("voted over %zu targets, retained %zu of %zu rows -> %s\n",
                tally.per_target_selected.size(), tally.retained.size(), bundle.train_count,
                o.out_dir.c_str());
    return 0;
}

int cmd_graph_stats(CommonOpts& o) {
    finalize_config(o);
    const auto bundle = seed::read_bundle(o.manifest);

    const auto embeddings = seed::build_node_embeddings(bundle);
    const auto normalized = seed::normalize_rows(embeddings);
    const auto knn = seed::knn_search(normalized.matrix, o.config.k, o.config.batch_size);
    const auto sigma = seed::local_density(knn);
    std::vector<double> thresholds;
    if (o.config.enable_local_scaling) {
        thresholds = seed::adaptive_thresholds(sigma, o.config.tau, o.config.alpha);
    }
    const auto graph = seed::build_conflict_graph(knn, thresholds, o.config.enable_local_scaling,
                                                  o.config.tau);

    std::filesystem::create_directories(o.out_dir);
    nlohmann::json j;
    j["nodes"] = graph.node_count;
    j["edges"] = graph.edge_count;
    j["max_degree"] = graph.max_degree;
    j["mean_degree"] = graph.node_count == 0 ? 0.0
                                             : 2.0 * static_cast<double>(graph.edge_count) /
                                                   static_cast<double>(graph.node_count);
    j["zero_norm_rows"] = normalized.zero_rows.size();
    j["k_effective"] = knn.k_effective;
    j["local_scaling"] = o.config.enable_local_scaling;
    j["tau"] = o.config.tau;
    {
        std::ofstream out(std::filesystem::path(o.out_dir) / "graph_stats.json");
        if (!out) throw seed::IoError("cannot write graph_stats.json in " + o.out_dir);
        out << j.dump(2) << "\n";
    }
    seed::write_edge_list(graph, std::filesystem::path(o.out_dir) / "edges.txt");
    std::printf("graph: %zu nodes, %zu edges, max degree %zu -> %s\n", graph.node_count,
                graph.edge_count, graph.max_degree, o.out_dir.c_str());
    return 0;
}

int cmd_oracle_check(int max_nodes, int trials, std::uint64_t seed_value) {
    if (max_nodes < 2 || max_nodes > 30) {
        throw seed::ValidationError("oracle-check: --nodes must lie in [2, 30]");
    }
    if (trials < 1) {
        throw seed::ValidationError("oracle-check: --trials must be >= 1");
    }

    const double densities[] = {0.1, 0.3, 0.6};
    struct Row {
        int trials = 0;
        int valid = 0;
        int bound_ok = 0;
        double ratio_sum = 0.0;
        double ratio_min = 1.0;
    };
    Row rows[3];

    seed::Rng rng(seed_value);
    for (int t = 0; t < trials; ++t) {
        const int di = t % 3;
        const auto n = static_cast<std::size_t>(2 + rng.below(max_nodes - 1));
        const auto graph = seed::random_graph(n, densities[di], rng.next_u64());
        std::vector<double> weights(n);
        for (auto& w : weights) w = rng.uniform();

        const auto greedy = seed::greedy_wis(graph, weights, static_cast<std::int32_t>(n));
        const auto exact = seed::exact_wis(graph, weights, static_cast<std::int32_t>(n));

        auto& row = rows[di];
        ++row.trials;
        if (seed::is_independent_set(graph, greedy.selected)) ++row.valid;
        const double bound =
            exact.total_weight / static_cast<double>(graph.max_degree + 1);
        if (greedy.total_weight >= bound - 1e-12) ++row.bound_ok;
        const double ratio =
            exact.total_weight > 0.0 ? greedy.total_weight / exact.total_weight : 1.0;
        row.ratio_sum += ratio;
        row.ratio_min = std::min(row.ratio_min, ratio);
    }

    std::printf("%8s %8s %8s %10s %10s %10s\n", "density", "trials", "valid", "bound-ok",
                "mean-ratio", "min-ratio");
    bool all_ok = true;
    for (int di = 0; di < 3; ++di) {
        const auto& row = rows[di];
        if (row.trials == 0) continue;
        std::printf("%8.1f %8d %8d %10d %10.4f %10.4f\n", densities[di], row.trials, row.valid,
                    row.bound_ok, row.ratio_sum / row.trials, row.ratio_min);
        all_ok = all_ok && row.valid == row.trials && row.bound_ok == row.trials;
    }
    if (!all_ok) {
        throw seed::InternalError("oracle-check: greedy violated validity or the degree bound");
    }
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    std::ifstream in(spec_path);
    if (!in) throw seed::IoError("cannot open spec: " + spec_path);
    std::stringstream buf;
    buf << in.rdbuf();

    const auto spec = seed::parse_synth_spec(buf.str());
    auto [bundle, truth] = seed::generate(spec);
    const auto manifest = seed::write_bundle(bundle, out_dir);
    {
        std::ofstream out(std::filesystem::path(out_dir) / "ground_truth.json");
        if (!out) throw seed::IoError("cannot write ground_truth.json in " + out_dir);
        out << seed::ground_truth_json(truth) << "\n";
    }
    std::printf("generated %zu train rows, %zu targets, %zu checkpoints -> %s\n",
                bundle.train_count, bundle.target_names.size(), bundle.checkpoints.size(),
                manifest.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seed: influence-weighted conflict-graph data selection"};
    app.require_subcommand(1);

    CommonOpts select_opts, vote_opts, graph_opts;
    std::string select_target;
    double vote_retain = -1.0;
    int oracle_nodes = 18, oracle_trials = 300;
    std::uint64_t oracle_seed = 0;
    std::string synth_spec, synth_out;

    auto* select = app.add_subcommand("select", "Select a budgeted subset for one target");
    select->add_option("--manifest", select_opts.manifest, "Bundle manifest JSON")->required();
    select->add_option("--target", select_target, "Target set name")->required();
    select->add_option("--budget", select_opts.budget, "Selection budget (row count)");
    select->add_option("--budget-frac", select_opts.budget_frac,
                       "Selection budget as a fraction of the pool");
    add_tuning_flags(select, select_opts);
    select->add_flag("--emit-edges", select_opts.emit_edges, "Also write edges.txt");
    select->add_option("--out", select_opts.out_dir, "Output directory")->required();

    auto* vote = app.add_subcommand("vote", "Run one selection per target and tally votes");
    vote->add_option("--manifest", vote_opts.manifest, "Bundle manifest JSON")->required();
    vote->add_option("--budget-frac", vote_opts.budget_frac, "Per-target budget fraction")
        ->required();
    vote->add_option("--retain-frac", vote_retain, "Fraction of the pool to retain")->required();
    add_tuning_flags(vote, vote_opts);
    vote->add_option("--out", vote_opts.out_dir, "Output directory")->required();

    auto* gstats = app.add_subcommand("graph-stats", "Build the conflict graph only");
    gstats->add_option("--manifest", graph_opts.manifest, "Bundle manifest JSON")->required();
    add_tuning_flags(gstats, graph_opts);
    gstats->add_option("--out", graph_opts.out_dir, "Output directory")->required();

    auto* oracle = app.add_subcommand("oracle-check", "Greedy vs exact solver on random graphs");
    oracle->add_option("--nodes", oracle_nodes, "Maximum instance size")->capture_default_str();
    oracle->add_option("--trials", oracle_trials, "Number of random instances")
        ->capture_default_str();
    oracle->add_option("--seed", oracle_seed, "Base seed")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark bundle");
    synth->add_option("--spec", synth_spec, "Spec JSON path")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (select->parsed()) {
            // graph-stats needs no budget; select and vote do
            return cmd_select(select_opts, select_target);
        }
        if (vote->parsed()) {
            if (vote_opts.budget_frac < 0.0) {
                throw seed::ValidationError("vote: --budget-frac required");
            }
            return cmd_vote(vote_opts, vote_retain);
        }
        if (gstats->parsed()) return cmd_graph_stats(graph_opts);
        if (oracle->parsed()) return cmd_oracle_check(oracle_nodes, oracle_trials, oracle_seed);
        if (synth->parsed()) return cmd_synth(synth_spec, synth_out);
    } catch (const seed::InternalError& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    } catch (const seed::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 3;
    } catch (const seed::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
