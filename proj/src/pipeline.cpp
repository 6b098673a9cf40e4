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

#include "pdmp/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "pdmp/bounds.hpp"
#include "pdmp/errors.hpp"
#include "pdmp/filter.hpp"
#include "pdmp/stop.hpp"

namespace pdmp {

namespace {

std::string fmt(double x)
{
    if (std::isnan(x)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ConfigError("bad number '" + s + "' in report");
    return x;
}

nlohmann::json model_json(const RunConfig& c)
{
    nlohmann::json j{{"points", c.model.points}, {"x0", c.model.x0},         {"a", c.model.a},
                     {"v", c.model.v},           {"sigma2", c.model.sigma2}, {"horizon", c.model.horizon}};
    if (c.model.initial_distribution) j["prior"] = *c.model.initial_distribution;
    return j;
}

}  // namespace

PdmpModel model_from_config(const RunConfig& config)
{
    return example_model(config.model);
}

GridArtifacts train_grids(const PdmpModel& model, const RunConfig& config, std::size_t grid_size)
{
    GridArtifacts art;
    art.grid_size = grid_size;
    ClvqOptions opt;
    opt.grid_sizes = uniform_grid_sizes(model.horizon(), grid_size);
    opt.n_samples = config.train_paths;
    opt.n_count = config.count_paths;
    opt.seed = config.seed;
    opt.gamma0 = config.gamma0;
    art.stages = clvq_train(model, opt);
    art.errors = measure_errors(art.stages, model, config.error_paths, config.seed, config.p);
    return art;
}

TimeGrid time_grid_for(const PdmpModel& model, const RunConfig& config, const std::vector<QuantError>& errors)
{
    if (config.delta) return build_time_grid(model, *config.delta);
    std::vector<double> s_err;
    for (std::size_t n = 1; n < errors.size(); ++n) s_err.push_back(errors[n].s);
    return build_time_grid(model, s_err, config.safety);
}

void solve_grids(const PdmpModel& model, const RunConfig& config, GridArtifacts& art)
{
    art.policy = backward_recursion(model, art.stages, time_grid_for(model, config, art.errors), config.survival);
}

ReportRow evaluate_grids(const PdmpModel& model, const RunConfig& config, const GridArtifacts& art,
                         const MeanEstimate& sup)
{
    if (!art.policy) throw DomainError("grids have not been solved");
    ReportRow row;
    row.grid_size = art.grid_size;
    row.delta = art.policy->grid.delta;
    row.vhat0 = art.policy->v0();
    const MeanEstimate vbar = evaluate_policy(model, *art.policy, art.stages, config.eval_paths, config.seed);
    row.vbar0 = vbar.mean;
    row.vbar0_se = vbar.std_error;
    row.sup = sup.mean;
    row.sup_se = sup.std_error;
    row.b_em = empirical_bound(row.vbar0, row.vhat0, row.sup);

    std::vector<double> pi_err;
    std::vector<double> s_err;
    for (const auto& e : art.errors) {
        pi_err.push_back(e.pi);
        s_err.push_back(e.s);
        row.err_pi = std::max(row.err_pi, e.pi);
        row.err_s = std::max(row.err_s, e.s);
        row.err_joint = std::max(row.err_joint, e.joint);
    }
    try {
        const BoundReport b = theoretical_bound(bound_inputs(model, pi_err, s_err, row.delta));
        row.b_th = b.value_bound;
        row.b_policy = b.policy_bound;
    } catch (const DeltaInfeasible&) {
        // Only reachable with a delta override below the error-driven minimum.
        if (!config.delta) throw;
        row.b_th = std::numeric_limits<double>::quiet_NaN();
        row.b_policy = std::numeric_limits<double>::quiet_NaN();
    }
    row.seed = config.seed;
    row.train_paths = config.train_paths;
    row.eval_paths = config.eval_paths;
    return row;
}

RunReport run_pipeline(const RunConfig& config,
                       const std::function<void(const ReportRow&, const GridArtifacts&)>& on_row)
{
    if (config.grid_sizes.empty()) throw ConfigError("missing required key 'grid_sizes'");
    const PdmpModel model = model_from_config(config);
    const MeanEstimate sup = estimate_sup(model, config.sup_paths, config.seed);
    RunReport report;
    for (std::size_t size : config.grid_sizes) {
        const auto start = std::chrono::steady_clock::now();
        GridArtifacts art = train_grids(model, config, size);
        solve_grids(model, config, art);
        ReportRow row = evaluate_grids(model, config, art, sup);
        row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.rows.push_back(row);
        if (on_row) on_row(row, art);
    }
    return report;
}

nlohmann::json artifacts_to_json(const RunConfig& config, const GridArtifacts& art)
{
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& e : art.errors) errors.push_back({{"joint", e.joint}, {"pi", e.pi}, {"s", e.s}});
    nlohmann::json j{{"format", "pdmp-grids"},
                     {"version", 1},
                     {"model", model_json(config)},
                     {"grid_size", art.grid_size},
                     {"seed", config.seed},
                     {"p", config.p},
                     {"stages", stages_to_json(art.stages)},
                     {"errors", std::move(errors)}};
    if (art.policy) j["policy"] = policy_to_json(*art.policy);
    return j;
}

GridArtifacts artifacts_from_json(const RunConfig& config, const nlohmann::json& j)
{
    GridArtifacts art;
    try {
        if (j.at("format") != "pdmp-grids") throw ConfigError("not a grid file");
        if (j.at("model") != model_json(config)) throw ConfigError("grid file was built for a different model");
        art.grid_size = j.at("grid_size").get<std::size_t>();
        art.stages = stages_from_json(j.at("stages"));
        for (const auto& e : j.at("errors"))
            art.errors.push_back({e.at("joint").get<double>(), e.at("pi").get<double>(), e.at("s").get<double>()});
        if (j.contains("policy")) art.policy = policy_from_json(j.at("policy"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed grid file: ") + e.what());
    }
    return art;
}

namespace {

const char* const kColumns[] = {"grid_size", "delta",  "vbar0",     "vbar0_se", "vhat0",     "sup",
                                "sup_se",    "b_em",   "b_th",      "b_policy", "err_pi",    "err_s",
                                "err_joint", "seed",   "train_paths", "eval_paths", "wall_time_s"};

}  // namespace

SimulationSummary simulate_batch(const PdmpModel& model, std::size_t n_paths, std::uint64_t seed,
                                 std::ostream& paths, std::ostream& filter)
{
    paths << "path,n,z,x,s,y,boundary\n";
    filter << "path,n";
    for (std::size_t i = 0; i < model.q(); ++i) filter << ",pi" << i;
    filter << '\n';

    SimulationSummary sum;
    sum.n_paths = n_paths;
    std::vector<double> s1(n_paths);
    std::vector<double> fin(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        PathStreams streams(seed, Stream::Simulation, p);
        const ChainPath path = simulate_chain(model, streams);
        const std::vector<FilterState> pis = filter_path(model, path);
        for (std::size_t n = 0; n < path.z.size(); ++n) {
            paths << p << ',' << n << ',' << path.z[n] << ',' << fmt(model.point(path.z[n])[0]) << ','
                  << fmt(path.s[n]) << ',' << fmt(path.y[n][0]) << ',' << (path.boundary[n] ? 1 : 0) << '\n';
            filter << p << ',' << n;
            for (double x : pis[n].probs) filter << ',' << fmt(x);
            filter << '\n';
            if (path.boundary[n]) ++sum.boundary_jumps;
        }
        s1[p] = path.steps() > 0 ? path.s[1] : 0.0;
        fin[p] = model.reward(model.point(path.z.back()));
    }
    if (n_paths > 0) {
        sum.s1 = mean_estimate(s1);
        sum.final_reward = mean_estimate(fin);
    }
    return sum;
}

void write_report_csv(std::ostream& out, const RunReport& report, bool wall_time)
{
    const std::size_t n_cols = std::size(kColumns) - (wall_time ? 0 : 1);
    for (std::size_t c = 0; c < n_cols; ++c) out << (c ? "," : "") << kColumns[c];
    out << '\n';
    for (const auto& r : report.rows) {
        out << r.grid_size << ',' << fmt(r.delta) << ',' << fmt(r.vbar0) << ',' << fmt(r.vbar0_se) << ','
            << fmt(r.vhat0) << ',' << fmt(r.sup) << ',' << fmt(r.sup_se) << ',' << fmt(r.b_em) << ','
            << fmt(r.b_th) << ',' << fmt(r.b_policy) << ',' << fmt(r.err_pi) << ',' << fmt(r.err_s) << ','
            << fmt(r.err_joint) << ',' << r.seed << ',' << r.train_paths << ',' << r.eval_paths;
        if (wall_time) out << ',' << fmt(r.wall_time);
        out << '\n';
    }
}

RunReport read_report_csv(std::istream& in)
{
    RunReport report;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty report");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() < std::size(kColumns) - 1) throw ConfigError("short report line: " + line);
        ReportRow r;
        r.grid_size = std::stoull(f[0]);
        r.delta = parse_double(f[1]);
        r.vbar0 = parse_double(f[2]);
        r.vbar0_se = parse_double(f[3]);
        r.vhat0 = parse_double(f[4]);
        r.sup = parse_double(f[5]);
        r.sup_se = parse_double(f[6]);
        r.b_em = parse_double(f[7]);
        r.b_th = parse_double(f[8]);
        r.b_policy = parse_double(f[9]);
        r.err_pi = parse_double(f[10]);
        r.err_s = parse_double(f[11]);
        r.err_joint = parse_double(f[12]);
        r.seed = std::stoull(f[13]);
        r.train_paths = std::stoull(f[14]);
        r.eval_paths = std::stoull(f[15]);
        if (f.size() > 16) r.wall_time = parse_double(f[16]);
        report.rows.push_back(r);
    }
    return report;
}

void write_report_table(std::ostream& out, const RunReport& report)
{
    out << std::left << std::setw(12) << "grid" << std::right << std::setw(9) << "Delta" << std::setw(9) << "Vbar0"
        << std::setw(9) << "Vhat0" << std::setw(8) << "B_em" << std::setw(9) << "B_th" << '\n';
    for (const auto& r : report.rows) {
        std::ostringstream name;
        name << r.grid_size << " points";
        out << std::left << std::setw(12) << name.str() << std::right << std::fixed << std::setprecision(4)
            << std::setw(9) << r.delta << std::setw(9) << r.vbar0 << std::setw(9) << r.vhat0 << std::setprecision(3)
            << std::setw(8) << r.b_em << std::setprecision(0) << std::setw(9) << r.b_th << '\n';
        out.unsetf(std::ios::floatfield);
    }
    out << std::setprecision(6);
}

void write_errors_csv(std::ostream& out, const std::vector<QuantError>& errors)
{
    out << "n,err_joint,err_pi,err_s\n";
    for (std::size_t n = 0; n < errors.size(); ++n)
        out << n << ',' << fmt(errors[n].joint) << ',' << fmt(errors[n].pi) << ',' << fmt(errors[n].s) << '\n';
}

}  // namespace pdmp
