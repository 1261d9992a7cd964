#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spectronet/cli.hpp"
#include "spectronet/siamese/checkpoint.hpp"

using namespace spectronet;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) { return cli::run(args); }

/// Runs the CLI while capturing everything written to stdout.
int run_captured(std::vector<std::string> args, std::string& out) {
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    int rc = cli::run(args);
    std::cout.rdbuf(old);
    out = captured.str();
    return rc;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f),
            std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) {
        if (c == '\n') ++n;
    }
    return n;
}

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("spectronet_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Pipeline {
    fs::path data = fresh_dir("data");
    fs::path run_dir = fresh_dir("run");

    void synth() {
        REQUIRE(::spectronet::cli::run(
                    {"synth", "--out", data.string(), "--targets", "6",
                     "--shots", "4", "--locations", "2", "--grid", "24",
                     "--white-sigma", "0.1", "--seed", "7"}) == 0);
    }
    void train() {
        REQUIRE(run({"train", "--data", data.string(), "--out",
                     run_dir.string(), "--no-mask", "--epochs", "2",
                     "--batch", "8", "--depth", "3", "--features", "4",
                     "--micro-batch", "8", "--seed", "11"}) == 0);
    }
};

} // namespace

TEST_CASE("synth writes consistent files and is byte-deterministic") {
    fs::path a = fresh_dir("synth_a");
    fs::path b = fresh_dir("synth_b");
    std::vector<std::string> args{"synth", "--targets", "4",  "--shots",
                                  "3",     "--grid",    "16", "--locations",
                                  "3",     "--seed",    "42"};
    auto with_out = [&](const fs::path& dir) {
        auto v = args;
        v.push_back("--out");
        v.push_back(dir.string());
        return v;
    };
    REQUIRE(run(with_out(a)) == 0);
    REQUIRE(run(with_out(b)) == 0);

    for (const char* name : {"spectra.csv", "manifest.csv",
                             "truth_signal.csv", "truth_noise.csv",
                             "synth_config.json"}) {
        CAPTURE(name);
        CHECK(slurp(a / name) == slurp(b / name));
    }
    // 16 grid rows + header in each table; 12 samples + header rows in the
    // manifest.
    CHECK(count_lines(slurp(a / "spectra.csv")) == 17);
    CHECK(count_lines(slurp(a / "truth_signal.csv")) == 17);
    CHECK(count_lines(slurp(a / "truth_noise.csv")) == 17);
    CHECK(count_lines(slurp(a / "manifest.csv")) == 13);
}

TEST_CASE("synth rejects zero targets with a usage error") {
    fs::path dir = fresh_dir("synth_zero");
    CHECK(run({"synth", "--out", dir.string(), "--targets", "0"}) == 2);
}

TEST_CASE("train writes a checkpoint, a trace and an archived config") {
    Pipeline p;
    p.synth();
    p.train();
    CHECK(fs::exists(p.run_dir / "model.ckpt"));
    CHECK(fs::exists(p.run_dir / "train_config.json"));
    // header + one row per epoch
    CHECK(count_lines(slurp(p.run_dir / "trace.csv")) == 3);

    auto [model, meta] = load_checkpoint((p.run_dir / "model.ckpt").string());
    CHECK(meta.arch.depth == 3);
    CHECK(meta.arch.n == 24);
    CHECK(meta.similarity == Similarity::cosine);
}

TEST_CASE("train echoes the similarity mode into the checkpoint header") {
    Pipeline p;
    p.synth();
    REQUIRE(run({"train", "--data", p.data.string(), "--out",
                 p.run_dir.string(), "--no-mask", "--epochs", "1", "--batch",
                 "4", "--depth", "3", "--features", "4", "--loss-align",
                 "raw_inner", "--lambda-align", "0.01", "--lr", "0.001",
                 "--seed", "3"}) == 0);
    std::string header = slurp(p.run_dir / "model.ckpt").substr(0, 400);
    CHECK(header.find("similarity raw_inner") != std::string::npos);
}

TEST_CASE("train rejects zero epochs") {
    Pipeline p;
    p.synth();
    CHECK(run({"train", "--data", p.data.string(), "--out",
               p.run_dir.string(), "--epochs", "0"}) == 2);
}

TEST_CASE("clean writes cleaned spectra and reports throughput") {
    Pipeline p;
    p.synth();
    p.train();
    std::string out;
    int rc = run_captured({"clean", "--data", p.data.string(), "--checkpoint",
                           (p.run_dir / "model.ckpt").string(), "--out",
                           p.run_dir.string(), "--no-mask"},
                          out);
    REQUIRE(rc == 0);
    CHECK(fs::exists(p.run_dir / "cleaned.csv"));
    CHECK(fs::exists(p.run_dir / "clean_config.json"));
    // Throughput line with at least one decimal place.
    CHECK(out.find("spectra/s") != std::string::npos);
    auto dot = out.find(" spectra/s");
    REQUIRE(dot != std::string::npos);
    CHECK(out.rfind('.', dot) != std::string::npos);

    // Same grid as the input data.
    std::string cleaned = slurp(p.run_dir / "cleaned.csv");
    CHECK(count_lines(cleaned) == 25);

    // Byte-identical on a second run.
    fs::path again = fresh_dir("clean_again");
    REQUIRE(run({"clean", "--data", p.data.string(), "--checkpoint",
                 (p.run_dir / "model.ckpt").string(), "--out", again.string(),
                 "--no-mask"}) == 0);
    CHECK(slurp(again / "cleaned.csv") == cleaned);
}

TEST_CASE("clean surfaces a missing checkpoint as a data error") {
    Pipeline p;
    p.synth();
    CHECK(run({"clean", "--data", p.data.string(), "--checkpoint",
               "/nonexistent.ckpt", "--out", p.run_dir.string()}) == 3);
}

TEST_CASE("clean rejects grid/model length mismatches") {
    Pipeline p;
    p.synth();
    p.train(); // trained with --no-mask, N = 24
    // Masking the 240-905 nm grid drops bins, so N no longer matches.
    CHECK(run({"clean", "--data", p.data.string(), "--checkpoint",
               (p.run_dir / "model.ckpt").string(), "--out",
               p.run_dir.string()}) == 3);
}

TEST_CASE("calibrate produces 8-row summaries for raw and cleaned") {
    Pipeline p;
    p.synth();
    p.train();
    REQUIRE(run({"clean", "--data", p.data.string(), "--checkpoint",
                 (p.run_dir / "model.ckpt").string(), "--out",
                 p.run_dir.string(), "--no-mask"}) == 0);

    fs::path raw_out = fresh_dir("cal_raw");
    REQUIRE(run({"calibrate", "--data", p.data.string(), "--out",
                 raw_out.string(), "--rep", "raw", "--no-mask",
                 "--head-epochs", "20", "--head-decay-start", "5", "--seed",
                 "5"}) == 0);
    std::string summary = slurp(raw_out / "summary.csv");
    CHECK(count_lines(summary) == 9); // header + 8 oxides
    CHECK(summary.find("SiO2") != std::string::npos);
    CHECK(summary.find("K2O") != std::string::npos);
    CHECK(summary.find(",raw") != std::string::npos);
    // results: header + 8 oxides * 6 standards
    CHECK(count_lines(slurp(raw_out / "results.csv")) == 49);

    fs::path clean_out = fresh_dir("cal_clean");
    REQUIRE(run({"calibrate", "--data", p.data.string(), "--out",
                 clean_out.string(), "--rep", "cleaned", "--cleaned",
                 (p.run_dir / "cleaned.csv").string(), "--no-mask",
                 "--head-epochs", "20", "--head-decay-start", "5", "--seed",
                 "5"}) == 0);
    CHECK(count_lines(slurp(clean_out / "summary.csv")) == 9);
    CHECK(slurp(clean_out / "summary.csv").find(",cleaned") !=
          std::string::npos);
}

TEST_CASE("calibrate rejects a misspelled representation") {
    Pipeline p;
    p.synth();
    CHECK(run({"calibrate", "--data", p.data.string(), "--out",
               p.run_dir.string(), "--rep", "cleanedd"}) == 2);
}

TEST_CASE("calibrate restricted to a single oxide") {
    Pipeline p;
    p.synth();
    fs::path out = fresh_dir("cal_single");
    REQUIRE(run({"calibrate", "--data", p.data.string(), "--out",
                 out.string(), "--rep", "raw", "--oxide", "MgO", "--no-mask",
                 "--head-epochs", "10", "--head-decay-start", "2"}) == 0);
    CHECK(count_lines(slurp(out / "summary.csv")) == 2);
    CHECK(run({"calibrate", "--data", p.data.string(), "--out", out.string(),
               "--rep", "raw", "--oxide", "Unobtainium"}) == 2);
}

TEST_CASE("plot writes overlays and per-oxide scatters") {
    Pipeline p;
    p.synth();
    p.train();
    REQUIRE(run({"clean", "--data", p.data.string(), "--checkpoint",
                 (p.run_dir / "model.ckpt").string(), "--out",
                 p.run_dir.string(), "--no-mask"}) == 0);
    fs::path cal = fresh_dir("plot_cal");
    REQUIRE(run({"calibrate", "--data", p.data.string(), "--out",
                 cal.string(), "--rep", "raw", "--no-mask", "--head-epochs",
                 "10", "--head-decay-start", "2"}) == 0);

    fs::path out = fresh_dir("plots");
    REQUIRE(run({"plot", "--data", p.data.string(), "--cleaned",
                 (p.run_dir / "cleaned.csv").string(), "--results",
                 (cal / "results.csv").string(), "--out", out.string(),
                 "--no-mask", "--samples", "synth000_l0_s000"}) == 0);
    CHECK(fs::exists(out / "overlay_synth000_l0_s000.svg"));
    for (const char* ox : {"SiO2", "TiO2", "Al2O3", "FeOT", "MgO", "CaO",
                           "Na2O", "K2O"}) {
        CAPTURE(ox);
        CHECK(fs::exists(out / ("scatter_" + std::string(ox) + ".svg")));
    }
    // The overlay honors the blue/orange convention.
    std::string overlay = slurp(out / "overlay_synth000_l0_s000.svg");
    CHECK(overlay.find("#1f77b4") != std::string::npos);
    CHECK(overlay.find("#ff7f0e") != std::string::npos);
    std::string scatter = slurp(out / "scatter_SiO2.svg");
    CHECK(scatter.find("RMSE") != std::string::npos);
}

TEST_CASE("plot on an empty results file is a data error") {
    fs::path out = fresh_dir("plot_empty");
    fs::path results = out / "results.csv";
    {
        std::ofstream f(results);
        f << "oxide,target_id,truth,prediction\n";
    }
    CHECK(run({"plot", "--results", results.string(), "--out",
               out.string()}) == 3);
}

TEST_CASE("default masking is consistent across train and clean") {
    fs::path data = fresh_dir("mask_data");
    REQUIRE(run({"synth", "--out", data.string(), "--targets", "4",
                 "--shots", "2", "--locations", "1", "--grid", "64", "--seed",
                 "1"}) == 0);
    fs::path rundir = fresh_dir("mask_run");
    REQUIRE(run({"train", "--data", data.string(), "--out", rundir.string(),
                 "--epochs", "1", "--batch", "4", "--depth", "3",
                 "--features", "4", "--seed", "2"}) == 0);
    auto [model, meta] = load_checkpoint((rundir / "model.ckpt").string());
    CHECK(meta.arch.n < 64); // the default bands removed some bins
    REQUIRE(run({"clean", "--data", data.string(), "--checkpoint",
                 (rundir / "model.ckpt").string(), "--out",
                 rundir.string()}) == 0);
    CHECK(count_lines(slurp(rundir / "cleaned.csv")) == meta.arch.n + 1);
}
