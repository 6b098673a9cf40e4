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

#include "pdmp/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "pdmp/errors.hpp"

namespace pdmp {

namespace {

using Entries = std::map<std::string, std::vector<std::string>>;

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw ConfigError("bad value '" + text + "' for key '" + key + "'");
    return value;
}

const std::vector<std::string>& require(const Entries& e, const std::string& key)
{
    const auto it = e.find(key);
    if (it == e.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

const std::string& scalar(const std::string& key, const std::vector<std::string>& v)
{
    if (v.size() != 1) throw ConfigError("key '" + key + "' takes a single value");
    return v.front();
}

template <class T>
T get(const Entries& e, const std::string& key)
{
    return parse_number<T>(key, scalar(key, require(e, key)));
}

template <class T>
void get_optional(const Entries& e, const std::string& key, T& out)
{
    if (e.count(key)) out = get<T>(e, key);
}

template <class T>
std::vector<T> get_list(const Entries& e, const std::string& key)
{
    std::vector<T> out;
    for (const auto& s : require(e, key)) out.push_back(parse_number<T>(key, s));
    return out;
}

RunConfig from_entries(const Entries& e)
{
    static const std::set<std::string> known{
        "points", "x0", "a", "v", "sigma2", "horizon", "seed", "prior", "grid_sizes", "train_paths",
        "count_paths", "error_paths", "eval_paths", "sup_paths", "sim_paths", "p", "safety", "delta",
        "survival", "gamma0", "threads"};
    for (const auto& [key, value] : e)
        if (!known.count(key)) throw ConfigError("unknown key '" + key + "'");

    RunConfig c;
    c.model.points = get_list<double>(e, "points");
    c.model.x0 = get<double>(e, "x0");
    c.model.a = get<double>(e, "a");
    c.model.v = get<double>(e, "v");
    c.model.sigma2 = get<double>(e, "sigma2");
    c.model.horizon = get<int>(e, "horizon");
    c.seed = get<std::uint64_t>(e, "seed");
    if (e.count("prior")) c.model.initial_distribution = get_list<double>(e, "prior");
    if (e.count("grid_sizes")) c.grid_sizes = get_list<std::size_t>(e, "grid_sizes");
    get_optional(e, "train_paths", c.train_paths);
    get_optional(e, "count_paths", c.count_paths);
    get_optional(e, "error_paths", c.error_paths);
    get_optional(e, "eval_paths", c.eval_paths);
    get_optional(e, "sup_paths", c.sup_paths);
    get_optional(e, "sim_paths", c.sim_paths);
    get_optional(e, "p", c.p);
    get_optional(e, "safety", c.safety);
    get_optional(e, "gamma0", c.gamma0);
    get_optional(e, "threads", c.threads);
    if (e.count("delta")) c.delta = get<double>(e, "delta");
    if (e.count("survival")) c.survival = parse_survival(scalar("survival", e.at("survival")));

    if (c.model.horizon < 1) throw ConfigError("horizon must be at least 1");
    if (!(c.p >= 1.0)) throw ConfigError("p must be >= 1");
    if (!(c.safety >= 0.0)) throw ConfigError("safety must be >= 0");
    if (!(c.model.sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
    if (!(c.model.a > 0.0) || !(c.model.v > 0.0)) throw ConfigError("a and v must be positive");
    return c;
}

Entries read_entries(std::istream& in)
{
    Entries e;
    for (const auto& item : CLI::ConfigINI().from_config(in)) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty()) throw ConfigError("sections are not supported: '" + item.fullname() + "'");
        e[item.name] = item.inputs;
    }
    return e;
}

}  // namespace

RunConfig parse_config(const std::string& text)
{
    std::istringstream in(text);
    return from_entries(read_entries(in));
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    return from_entries(read_entries(in));
}

std::vector<std::size_t> parse_size_list(const std::string& text)
{
    std::vector<std::size_t> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        std::istringstream words(token);
        std::string w;
        while (words >> w) out.push_back(parse_number<std::size_t>("grid_sizes", w));
    }
    if (out.empty()) throw ConfigError("empty grid size list");
    return out;
}

}  // namespace pdmp
