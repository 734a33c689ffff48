// Copyright 2026 The seqmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seqmeas/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace seqmeas;
using namespace seqmeas::cli;

namespace {

struct Options {
    std::string config_path;
    std::string output_path;
    std::string format;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    unsigned threads = 0;
    bool quiet = false;
};

RunConfig resolve(const Options &opt) {
    RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_config(opt.config_path);
    if (!opt.output_path.empty()) cfg.output_path = opt.output_path;
    if (!opt.format.empty()) cfg.format = parse_format(opt.format);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.samples) cfg.samples = *opt.samples;
    return cfg;
}

void emit(const RunConfig &cfg, const std::string &text) {
    if (cfg.output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file '" + cfg.output_path + "'");
    out << text;
}

void add_common(CLI::App *cmd, Options &opt) {
    cmd->add_option("--config", opt.config_path, "JSON run configuration");
    cmd->add_option("--output", opt.output_path, "result file (default: stdout)");
    cmd->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", opt.seed, "Monte Carlo seed");
    cmd->add_option("--samples", opt.samples, "Monte Carlo sample count");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = all cores)");
    cmd->add_flag("--quiet", opt.quiet, "suppress the human-readable report");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Sequential Gaussian-pointer measurement simulator"};
    app.require_subcommand(1);
    Options opt;
    auto *check = app.add_subcommand("check", "consistency report for a system");
    auto *sweep = app.add_subcommand("sweep", "mean of B versus lambda_a");
    auto *sample = app.add_subcommand("sample", "Monte Carlo (a, b) draws or joint histogram");
    auto *washout = app.add_subcommand("washout", "grid-refinement study of the weak slope");
    for (auto *cmd : {check, sweep, sample, washout}) add_common(cmd, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitPass : kExitInput;
    }

    try {
        RunConfig cfg = resolve(opt);
        if (check->parsed()) {
            std::ostringstream report;
            int code = cmd_check(cfg, report);
            if (!opt.quiet || code != kExitPass) std::cout << report.str();
            if (!cfg.output_path.empty()) emit(cfg, report.str());
            return code;
        }
        Table table;
        std::string name;
        if (sweep->parsed()) {
            table = cmd_sweep(cfg, opt.threads);
            name = "sweep";
        } else if (sample->parsed()) {
            table = cmd_sample(cfg, opt.threads);
            name = "sample";
        } else {
            table = cmd_washout(cfg);
            name = "washout";
        }
        emit(cfg, table.to_string(cfg.format, name));
        if (!opt.quiet && !cfg.output_path.empty()) {
            std::cerr << name << ": wrote " << table.rows.size() << " rows to " << cfg.output_path << "\n";
        }
        return kExitPass;
    } catch (const ValidationError &e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ConsistencyError &e) {
        std::cerr << "assertion failed: " << e.what() << "\n";
        return kExitAssertion;
    }
}
