/*
   Copyright 2026 The pdmpstop Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "pdmp/config.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/pipeline.hpp"
#include "pdmp/stop.hpp"

namespace fs = std::filesystem;
using namespace pdmp;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDelta = 3;
constexpr int kExitNumeric = 4;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::string grid_sizes;
    std::optional<std::size_t> paths;
    std::optional<int> threads;
};

RunConfig resolve(const Options& o)
{
    RunConfig c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (!o.grid_sizes.empty()) c.grid_sizes = parse_size_list(o.grid_sizes);
    if (o.threads) c.threads = *o.threads;
    set_thread_count(c.threads);
    return c;
}

fs::path out_file(const Options& o, const std::string& name)
{
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + o.out + "': " + ec.message());
    return fs::path(o.out) / name;
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return f;
}

std::string grid_file(std::size_t size)
{
    return "grids_" + std::to_string(size) + ".json";
}

void save_grids(const Options& o, const RunConfig& c, const GridArtifacts& art)
{
    auto f = open_out(out_file(o, grid_file(art.grid_size)));
    f << artifacts_to_json(c, art).dump() << '\n';
}

GridArtifacts load_grids(const Options& o, const RunConfig& c, std::size_t size)
{
    const fs::path p = fs::path(o.out) / grid_file(size);
    std::ifstream f(p);
    if (!f) throw ConfigError("cannot read '" + p.string() + "'; run `train` first");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse '" + p.string() + "': " + e.what());
    }
    return artifacts_from_json(c, j);
}

void require_sizes(const RunConfig& c)
{
    if (c.grid_sizes.empty()) throw ConfigError("no grid sizes: set 'grid_sizes' or pass --grid-sizes");
}

void cmd_simulate(const Options& o)
{
    RunConfig c = resolve(o);
    const std::size_t n = o.paths.value_or(c.sim_paths);
    const PdmpModel model = model_from_config(c);
    auto paths = open_out(out_file(o, "paths.csv"));
    auto filter = open_out(out_file(o, "filter.csv"));
    const SimulationSummary s = simulate_batch(model, n, c.seed, paths, filter);
    std::printf("paths           %zu\n", s.n_paths);
    if (n == 0) return;
    std::printf("mean S_1        %.6f +- %.6f\n", s.s1.mean, s.s1.std_error);
    std::printf("mean g(Z_N)     %.6f +- %.6f\n", s.final_reward.mean, s.final_reward.std_error);
    std::printf("boundary jumps  %zu\n", s.boundary_jumps);
}

void cmd_train(const Options& o)
{
    RunConfig c = resolve(o);
    if (o.paths) c.train_paths = *o.paths;
    require_sizes(c);
    const PdmpModel model = model_from_config(c);
    for (std::size_t size : c.grid_sizes) {
        const GridArtifacts art = train_grids(model, c, size);
        save_grids(o, c, art);
        auto f = open_out(out_file(o, "errors_" + std::to_string(size) + ".csv"));
        write_errors_csv(f, art.errors);
        double worst_s = 0.0;
        for (const auto& e : art.errors) worst_s = std::max(worst_s, e.s);
        std::printf("%zu points: trained %zu stages, max s-error %.5f\n", size, art.stages.size(), worst_s);
    }
}

void cmd_solve(const Options& o)
{
    RunConfig c = resolve(o);
    require_sizes(c);
    const PdmpModel model = model_from_config(c);
    for (std::size_t size : c.grid_sizes) {
        GridArtifacts art = load_grids(o, c, size);
        solve_grids(model, c, art);
        save_grids(o, c, art);
        std::printf("%zu points: delta %.5f, v_hat_0 %.6f\n", size, art.policy->grid.delta, art.policy->v0());
    }
}

void cmd_evaluate(const Options& o)
{
    RunConfig c = resolve(o);
    if (o.paths) c.eval_paths = *o.paths;
    require_sizes(c);
    const PdmpModel model = model_from_config(c);
    for (std::size_t size : c.grid_sizes) {
        const GridArtifacts art = load_grids(o, c, size);
        if (!art.policy) throw ConfigError(grid_file(size) + " has no policy; run `solve` first");
        const MeanEstimate m = evaluate_policy(model, *art.policy, art.stages, c.eval_paths, c.seed);
        auto f = open_out(out_file(o, "evaluation_" + std::to_string(size) + ".csv"));
        f << "n_paths,mean,std_error,seed\n";
        f << m.n << ',' << nlohmann::json(m.mean).dump() << ',' << nlohmann::json(m.std_error).dump() << ','
          << c.seed << '\n';
        std::printf("%zu points: v_bar_0 %.6f +- %.6f (%zu paths)\n", size, m.mean, m.std_error, m.n);
    }
}

void cmd_pipeline(const Options& o)
{
    RunConfig c = resolve(o);
    if (o.paths) c.eval_paths = *o.paths;
    require_sizes(c);
    const fs::path report_path = out_file(o, "report.csv");
    RunReport partial;
    auto flush = [&] {
        auto f = open_out(report_path);
        write_report_csv(f, partial);
    };
    try {
        run_pipeline(c, [&](const ReportRow& row, const GridArtifacts& art) {
            save_grids(o, c, art);
            partial.rows.push_back(row);
            flush();
        });
    } catch (const DeltaInfeasible&) {
        flush();
        if (!partial.rows.empty())
            std::fprintf(stderr, "partial report with %zu rows written to %s\n", partial.rows.size(),
                         report_path.string().c_str());
        throw;
    }
    write_report_table(std::cout, partial);
}

void cmd_report(const Options& o)
{
    const fs::path p = fs::path(o.out) / "report.csv";
    std::ifstream f(p);
    if (!f) throw ConfigError("cannot read '" + p.string() + "'; run `pipeline` first");
    write_report_table(std::cout, read_report_csv(f));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Optimal stopping of partially observed PDMPs by quantization"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* cfg = sub->add_option("--config", o.config, "Run configuration file");
        if (needs_config) cfg->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Override the configured seed");
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--grid-sizes", o.grid_sizes, "Comma-separated grid sizes, e.g. 50,1000");
        sub->add_option("--paths", o.paths, "Path count for this step");
        sub->add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)");
    };

    struct Command {
        const char* name;
        const char* help;
        void (*run)(const Options&);
        bool needs_config;
    };
    const Command commands[] = {
        {"simulate", "Simulate chain paths and their filter", cmd_simulate, true},
        {"train", "Train quantization grids (--paths: training paths)", cmd_train, true},
        {"solve", "Solve the dynamic program on saved grids", cmd_solve, true},
        {"evaluate", "Monte Carlo value of the stopping rule (--paths: evaluation paths)", cmd_evaluate, true},
        {"pipeline", "Train, solve, evaluate and report every grid size", cmd_pipeline, true},
        {"report", "Print the table of a saved report.csv", cmd_report, false},
    };
    void (*selected)(const Options&) = nullptr;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        common(sub, cmd.needs_config);
        sub->callback([&selected, run = cmd.run] { selected = run; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        selected(o);
    } catch (const DeltaInfeasible& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDelta;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
