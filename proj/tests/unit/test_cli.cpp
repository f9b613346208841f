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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nsqst/targets.hpp"
#include "nsqst_cli/cli.hpp"

using namespace nsqst;
using namespace nsqst::cli;
namespace fs = std::filesystem;
using cplx = std::complex<double>;

namespace {

class TempDir {
   public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("nsqst_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

   private:
    fs::path path_;
};

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string config_error(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

ExperimentConfig small_ghz(const fs::path& out) {
    auto c = parse(
        "target = ghz\nqubits = 3\nghz_theta = 0.9\nprotocol = nsqst\niterations = 4\n"
        "shadows_per_iter = 10\nmc_samples = 100\nshadow_count = 50\nseed = 5\n");
    c.output = out;
    return c;
}

int run_binary(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(NSQST_CLI_BINARY) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// ---------------------------------------------------------------- config

TEST(Config, ParsesKeysCommentsAndWhitespace) {
    const auto c = parse(
        "# experiment\n"
        "target = afh   # trailing comment\n"
        "qubits=4\n"
        "  protocol = nsqst_pretrain\n"
        "noise_parameter = 0.9\n"
        "noise = amplitude_damping\n"
        "f_strategy = analytic\n"
        "overlap_mode = exhaustive\n"
        "reuse_shadows = yes\n"
        "seed = 17\n"
        "\n");
    EXPECT_EQ(c.target.kind, TargetKind::Afh);
    EXPECT_EQ(c.target.qubits, 4);
    EXPECT_EQ(c.train.arch.n, 4);
    EXPECT_EQ(c.train.protocol, training::Protocol::NsqstPretrain);
    EXPECT_EQ(c.train.noise.kind, shadows::NoiseModel::Kind::AmplitudeDamping);
    EXPECT_DOUBLE_EQ(c.train.noise.parameter, 0.9);
    EXPECT_EQ(c.train.f_strategy, training::FStrategy::Analytic);
    EXPECT_EQ(c.train.overlap_mode, training::OverlapMode::Exhaustive);
    EXPECT_TRUE(c.train.reuse_shadows);
    ASSERT_TRUE(c.seed.has_value());
    EXPECT_EQ(*c.seed, 17u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, DefaultsMatchReferenceArchitecture) {
    const auto c = parse("seed = 1\n");
    EXPECT_EQ(c.target.kind, TargetKind::Qcd);
    EXPECT_EQ(c.train.arch, (nqs::Architecture{6, 2, 4, 8}));
    EXPECT_EQ(c.train.iterations, 2000u);
    EXPECT_EQ(c.train.shadows_per_iter, 100u);
    EXPECT_EQ(c.train.mc_samples, 5000u);
    EXPECT_DOUBLE_EQ(c.train.lr, 1e-2);
    EXPECT_DOUBLE_EQ(c.train.nnqst_lr, 1e-3);
    EXPECT_EQ(c.train.samples_per_basis, 512u);
    EXPECT_EQ(c.train.batch_size, 128u);
}

TEST(Config, ErrorsNameTheLine) {
    EXPECT_NE(config_error("seed = 1\nbogus = 3\n").find("test.cfg:2"), std::string::npos);
    EXPECT_NE(config_error("seed = 1\nbogus = 3\n").find("unknown key 'bogus'"), std::string::npos);
    EXPECT_NE(config_error("seed = 1\nseed = 2\n").find("given twice"), std::string::npos);
    EXPECT_NE(config_error("qubits = six\n").find("test.cfg:1"), std::string::npos);
    EXPECT_NE(config_error("seed\n").find("expected 'key = value'"), std::string::npos);
    EXPECT_NE(config_error("seed =\n").find("no value"), std::string::npos);
    EXPECT_NE(config_error("target = ising\n").find("target"), std::string::npos);
    EXPECT_NE(config_error("protocol = qst\n").find("test.cfg:1"), std::string::npos);
    EXPECT_NE(config_error("noise = thermal\n").find("noise"), std::string::npos);
    EXPECT_NE(config_error("noise_parameter = 0.5\n").find("without noise"), std::string::npos);
    EXPECT_NE(config_error("reuse_shadows = maybe\n").find("test.cfg:1"), std::string::npos);
    EXPECT_NE(config_error("iterations = -3\n").find("test.cfg:1"), std::string::npos);
}

TEST(Config, ValidateRequiresSeedAndRanges) {
    EXPECT_THROW(parse("target = ghz\nqubits = 3\n").validate(), ConfigError);
    EXPECT_THROW(parse("target = qcd\nqubits = 4\nseed = 1\n").validate(), ConfigError);
    EXPECT_THROW(parse("target = ghz\nqubits = 1\nseed = 1\n").validate(), ConfigError);
    EXPECT_THROW(parse("seed = 1\nlr = 0\n").validate(), ConfigError);
    EXPECT_THROW(parse("seed = 1\nnoise = amplitude_damping\nnoise_parameter = 1.5\n").validate(), ConfigError);
    EXPECT_THROW(parse("seed = 1\nshadow_count = 0\n").validate(), ConfigError);
    EXPECT_NO_THROW(parse("seed = 1\n").validate());
}

TEST(Config, KeySetIsUniqueAndParsable) {
    const auto keys = config_keys();
    const std::set<std::string> unique(keys.begin(), keys.end());
    EXPECT_EQ(unique.size(), keys.size());
    for (const char* k : {"target", "qubits", "protocol", "iterations", "shadows_per_iter", "mc_samples", "lr", "noise",
                          "noise_parameter", "f_strategy", "epochs", "nnqst_lr", "seed", "output", "threads",
                          "shadow_count", "use_shadow_file", "resume"}) {
        EXPECT_TRUE(unique.count(k)) << k;
    }
}

// ---------------------------------------------------------------- target files

TEST(TargetFile, RoundTripIsExact) {
    TempDir dir;
    for (const char* text : {"target = ghz\nqubits = 3\nghz_theta = 0.3\n", "target = qcd\n",
                             "target = afh\nqubits = 4\nafh_steps = 2\n"}) {
        const auto c = parse(text);
        const auto state = build_target(c.target);
        const auto path = dir.path() / "t.json";
        write_target_file(path, c.target, state);
        const auto back = read_target_file(path);
        EXPECT_EQ(back.spec.kind, c.target.kind);
        EXPECT_EQ(back.spec.qubits, state.qubits());
        ASSERT_EQ(back.state.dimension(), state.dimension());
        for (std::size_t s = 0; s < state.dimension(); ++s) EXPECT_EQ(back.state[s], state[s]) << text;
    }
}

TEST(TargetFile, BuildMatchesLibraryTargets) {
    const auto ghz = build_target(parse("target = ghz\nqubits = 4\nghz_theta = 1.1\n").target);
    const auto ref = targets::prepare_ghz(4, 1.1);
    for (std::size_t s = 0; s < 16; ++s) EXPECT_EQ(ghz[s], ref[s]);
    const auto qcd = build_target(parse("target = qcd\n").target);
    const auto qref = targets::prepare_qcd_state();
    for (std::size_t s = 0; s < 64; ++s) EXPECT_EQ(qcd[s], qref[s]);
}

TEST(TargetFile, RejectsMalformedFiles) {
    TempDir dir;
    const auto path = dir.path() / "bad.json";
    auto write = [&](const std::string& text) { std::ofstream(path) << text; };
    write("not json");
    EXPECT_THROW(read_target_file(path), std::runtime_error);
    write(R"({"format": "something-else", "version": 1})");
    EXPECT_THROW(read_target_file(path), std::runtime_error);
    const auto c = parse("target = ghz\nqubits = 2\n");
    write_target_file(path, c.target, build_target(c.target));
    auto doc = nlohmann::json::parse(read_file(path));
    doc["version"] = 99;
    write(doc.dump());
    EXPECT_THROW(read_target_file(path), std::runtime_error);
    doc["version"] = 1;
    doc["qubits"] = 3;
    write(doc.dump());
    EXPECT_THROW(read_target_file(path), std::runtime_error);
    EXPECT_THROW(read_target_file(dir.path() / "missing.json"), std::runtime_error);
}

// ---------------------------------------------------------------- evaluation helpers

TEST(PhaseTable, AlignsGlobalPhaseAndMasksSmallAmplitudes) {
    const auto target = targets::prepare_ghz(3, 0.8);
    std::vector<cplx> model(target.amplitudes().begin(), target.amplitudes().end());
    for (auto& a : model) a *= std::polar(1.0, 2.1);
    const auto rows = phase_table(model, target);
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_NEAR(rows[7].model_phase, rows[7].target_phase, 1e-12);
    EXPECT_NEAR(rows[0].model_phase, rows[0].target_phase, 1e-12);
    for (std::size_t s = 1; s < 7; ++s) {
        EXPECT_TRUE(std::isnan(rows[s].model_phase));
        EXPECT_TRUE(std::isnan(rows[s].target_phase));
    }
    EXPECT_THROW(phase_table(std::vector<cplx>(4), target), std::invalid_argument);
}

TEST(TrainingObservable, MatchesTargetQuantities) {
    const auto qcd = parse("target = qcd\n").target;
    const auto state = build_target(qcd);
    const auto obs = training_observable(qcd);
    ASSERT_TRUE(obs);
    const auto h = targets::qcd_kinetic_hamiltonian();
    EXPECT_NEAR(obs(state.amplitudes()), quantum::expectation(state, h.terms), 1e-12);
    const auto ghz = parse("target = ghz\nqubits = 3\nghz_theta = 0.6\n").target;
    EXPECT_NEAR(training_observable(ghz)(build_target(ghz).amplitudes()), 0.6, 1e-12);
}

// ---------------------------------------------------------------- commands

TEST(Commands, PipelineIsDeterministic) {
    TempDir dir;
    const auto c = small_ghz(dir.path());
    std::ostringstream log;
    EXPECT_EQ(cmd_prepare(c, log), 0);
    EXPECT_TRUE(fs::exists(c.target_file()));
    EXPECT_EQ(cmd_collect(c, log), 0);
    const auto shadows1 = read_file(c.shadow_file());
    EXPECT_EQ(cmd_collect(c, log), 0);
    EXPECT_EQ(read_file(c.shadow_file()), shadows1);
    const auto set = shadows::load_shadow_set(c.shadow_file());
    EXPECT_EQ(set.shadows.size(), 50u);

    EXPECT_EQ(cmd_train(c, log), 0);
    const auto ckpt1 = read_file(c.checkpoint_file());
    std::ifstream metrics(c.metrics_file());
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(metrics, line)) rows.push_back(nlohmann::json::parse(line));
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0]["protocol"], "nsqst");
    EXPECT_EQ(rows[0]["seed"], 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i]["iter"], i - 1);
        EXPECT_EQ(rows[i]["stage"], "nsqst");
        EXPECT_TRUE(rows[i]["observable"].is_number());
    }
    EXPECT_EQ(cmd_train(c, log), 0);
    EXPECT_EQ(read_file(c.checkpoint_file()), ckpt1);

    EXPECT_EQ(cmd_evaluate(c, log), 0);
    const auto report1 = read_file(c.report_file());
    const auto table1 = read_file(c.table_file());
    EXPECT_EQ(cmd_evaluate(c, log), 0);
    EXPECT_EQ(read_file(c.report_file()), report1);
    EXPECT_EQ(read_file(c.table_file()), table1);
    const auto report = nlohmann::json::parse(report1);
    EXPECT_EQ(report["target"], "ghz");
    EXPECT_NEAR(report["relative_phase"]["target"].get<double>(), 0.9, 1e-12);
    EXPECT_NEAR(report["exact_infidelity"].get<double>(), rows.back()["exact_infid"].get<double>(), 0.5);
    std::istringstream table(table1);
    std::getline(table, line);
    EXPECT_EQ(line, "index,bits,target_sqrt_p,target_phase,model_sqrt_p,model_phase");
    std::size_t count = 0;
    while (std::getline(table, line)) ++count;
    EXPECT_EQ(count, 8u);
}

TEST(Commands, ResumeAppendsAndMatchesUninterruptedRun) {
    TempDir a, b;
    auto full = small_ghz(a.path());
    full.train.iterations = 6;
    std::ostringstream log;
    cmd_prepare(full, log);
    cmd_train(full, log);

    auto part = small_ghz(b.path());
    part.train.iterations = 3;
    cmd_prepare(part, log);
    cmd_train(part, log);
    part.train.iterations = 6;
    part.resume = true;
    cmd_train(part, log);
    EXPECT_EQ(read_file(b.path() / "checkpoint.nsqc"), read_file(a.path() / "checkpoint.nsqc"));
    std::ifstream in(part.metrics_file());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 7u);
}

TEST(Commands, TrainWithShadowFileUsesFixedSet) {
    TempDir dir;
    auto c = small_ghz(dir.path());
    c.use_shadow_file = true;
    std::ostringstream log;
    cmd_prepare(c, log);
    EXPECT_THROW(cmd_train(c, log), std::exception);
    cmd_collect(c, log);
    EXPECT_EQ(cmd_train(c, log), 0);
}

TEST(Commands, MissingInputsThrow) {
    TempDir dir;
    const auto c = small_ghz(dir.path());
    std::ostringstream log;
    EXPECT_THROW(cmd_collect(c, log), std::runtime_error);
    EXPECT_THROW(cmd_train(c, log), std::runtime_error);
    cmd_prepare(c, log);
    EXPECT_THROW(cmd_evaluate(c, log), std::runtime_error);
    auto no_seed = c;
    no_seed.seed.reset();
    EXPECT_THROW(cmd_prepare(no_seed, log), ConfigError);
}

// ---------------------------------------------------------------- binary

TEST(Binary, ExitCodes) {
    TempDir dir;
    const auto cfg = dir.path() / "run.cfg";
    const auto log = dir.path() / "log.txt";
    std::ofstream(cfg) << "target = ghz\nqubits = 3\niterations = 2\nshadows_per_iter = 5\nmc_samples = 50\n"
                          "shadow_count = 20\n";
    const std::string base = "--config " + cfg.string() + " --output " + dir.path().string();
    // No seed anywhere: configuration error.
    EXPECT_EQ(run_binary(base + " prepare", log), 2);
    EXPECT_NE(read_file(log).find("seed"), std::string::npos);
    EXPECT_EQ(run_binary(base + " --seed 3 prepare", log), 0);
    EXPECT_EQ(run_binary(base + " --seed 3 collect", log), 0);
    EXPECT_EQ(run_binary(base + " --seed 3 --threads 1 train", log), 0);
    EXPECT_EQ(run_binary(base + " --seed 3 evaluate", log), 0);
    EXPECT_NE(read_file(log).find("exact_infidelity"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir.path() / "report.json"));

    // Unknown key: configuration error naming the line.
    const auto bad = dir.path() / "bad.cfg";
    std::ofstream(bad) << "seed = 1\nwidth = 4\n";
    EXPECT_EQ(run_binary("--config " + bad.string() + " prepare", log), 2);
    EXPECT_NE(read_file(log).find(":2:"), std::string::npos);
    // Missing input file at run time.
    const auto empty = dir.path() / "empty";
    fs::create_directories(empty);
    EXPECT_EQ(run_binary("--config " + cfg.string() + " --seed 3 --output " + empty.string() + " evaluate", log), 1);
    // Command line errors.
    EXPECT_NE(run_binary("prepare", log), 0);
    EXPECT_NE(run_binary(base + " --seed 3", log), 0);
}
