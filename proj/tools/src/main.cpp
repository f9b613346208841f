// Copyright 2026 The NSQST Authors
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

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "nsqst/parallel.hpp"
#include "nsqst/training.hpp"
#include "nsqst_cli/cli.hpp"

namespace {

void configure_logging() {
    const char* env = std::getenv("NSQST_LOG");
    const std::string level = env ? env : "info";
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else {
        spdlog::set_level(spdlog::level::info);
        spdlog::warn("NSQST_LOG='{}' is not one of error, info, debug; using info", level);
    }
    spdlog::set_pattern("[%l] %v");
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"Shadow-based neural quantum state tomography driver"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> output;
    app.add_option("--config", config_path, "Flat key = value experiment file")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Root seed; overrides the config");
    app.add_option("--threads", threads, "Worker thread cap (0 = hardware concurrency)");
    app.add_option("--output", output, "Output directory; overrides the config");

    auto* prepare = app.add_subcommand("prepare", "Simulate the target state and write target.json");
    auto* collect = app.add_subcommand("collect", "Collect classical shadows of the target");
    auto* train = app.add_subcommand("train", "Train a neural quantum state");
    auto* evaluate = app.add_subcommand("evaluate", "Compare a checkpoint with the target");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = nsqst::cli::load_config(config_path);
        if (seed) config.seed = *seed;
        if (threads) config.threads = *threads;
        if (output) config.output = *output;
        nsqst::set_worker_threads(config.threads);
        if (prepare->parsed()) return nsqst::cli::cmd_prepare(config, std::cout);
        if (collect->parsed()) return nsqst::cli::cmd_collect(config, std::cout);
        if (train->parsed()) return nsqst::cli::cmd_train(config, std::cout);
        if (evaluate->parsed()) return nsqst::cli::cmd_evaluate(config, std::cout);
    } catch (const nsqst::cli::ConfigError& e) {
        spdlog::error("config: {}", e.what());
        return 2;
    } catch (const nsqst::training::NonFiniteError& e) {
        spdlog::error("non-finite value: {}", e.what());
        return 3;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
