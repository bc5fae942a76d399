#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "regclust/io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("regclust_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(REGCLUST_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return regclust::read_text_file(p); }

}  // namespace

TEST_CASE("simulate writes a 50 x 60 dataset and labels, byte-identically") {
    const fs::path d = scratch("sim");
    REQUIRE(run("simulate --preset table1 --sigma2 1.0 --seed 7 --output-dir " + (d / "a").string()) == 0);
    REQUIRE(run("simulate --preset table1 --sigma2 1.0 --seed 7 --output-dir " + (d / "b").string()) == 0);
    for (const char* f : {"dataset.csv", "labels.txt", "spec.json"}) {
        CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
    }
    const auto data = regclust::load_dataset(d / "a" / "dataset.csv");
    CHECK(data.series_count() == 50);
    CHECK(data.length() == 60);
    CHECK(regclust::load_labels(d / "a" / "labels.txt").size() == 50);

    REQUIRE(run("simulate --n 1 --output-dir " + (d / "one").string()) == 0);
    CHECK(regclust::load_dataset(d / "one" / "dataset.csv").series_count() == 1);
}

TEST_CASE("fit writes every artifact and reruns are identical") {
    const fs::path d = scratch("fit");
    REQUIRE(run("simulate --seed 3 --output-dir " + d.string()) == 0);
    const std::string common = "fit --input " + (d / "dataset.csv").string() +
                               " --K 2 --L 3 --p 3 --restarts 4 --seed 9 --output-dir ";
    REQUIRE(run(common + (d / "f1").string()) == 0);
    REQUIRE(run(common + (d / "f2").string() + " --threads 2") == 0);
    for (const char* f : {"model.json", "report.json", "partition.csv", "mean_series.csv",
                          "segmentation.csv", "gates.csv", "polynomials.csv"}) {
        CHECK(fs::exists(d / "f1" / f));
        CHECK(slurp(d / "f1" / f) == slurp(d / "f2" / f));
    }
    // header plus one row per series
    const std::string part = slurp(d / "f1" / "partition.csv");
    CHECK(std::count(part.begin(), part.end(), '\n') == 51);
}

TEST_CASE("output directory from the environment") {
    const fs::path d = scratch("env");
    const std::string cmd = "REGCLUST_OUTPUT_DIR=" + d.string() + " " + REGCLUST_CLI +
                            " simulate --n 2 >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(d / "dataset.csv"));
}

TEST_CASE("config file supplies defaults that flags override") {
    const fs::path d = scratch("cfg");
    regclust::write_text_file(d / "run.toml", "[simulate]\nn = 4\nsigma2 = 2.0\n");
    REQUIRE(run("--config " + (d / "run.toml").string() + " simulate --output-dir " +
                (d / "a").string()) == 0);
    CHECK(regclust::load_dataset(d / "a" / "dataset.csv").series_count() == 4);
    REQUIRE(run("--config " + (d / "run.toml").string() + " simulate --n 6 --output-dir " +
                (d / "b").string()) == 0);
    CHECK(regclust::load_dataset(d / "b" / "dataset.csv").series_count() == 6);
}

TEST_CASE("exit codes") {
    const fs::path d = scratch("codes");
    CHECK(run("") == 2);
    CHECK(run("fit") == 2);
    CHECK(run("fit --input x.csv --variance-mode bogus") == 2);
    CHECK(run("fit --input " + (d / "missing.csv").string() + " --output-dir " + d.string()) == 3);
    REQUIRE(run("simulate --n 5 --output-dir " + d.string()) == 0);
    CHECK(run("evaluate --input " + (d / "dataset.csv").string() + " --output-dir " + d.string()) == 3);
    // 60 points cannot hold 20 cubic segments
    CHECK(run("fit --input " + (d / "dataset.csv").string() + " --L 20 --p 3 --output-dir " +
              d.string()) == 3);
}

TEST_CASE("select and evaluate") {
    const fs::path d = scratch("sel");
    REQUIRE(run("simulate --seed 5 --output-dir " + d.string()) == 0);
    REQUIRE(run("select --input " + (d / "dataset.csv").string() +
                " --K-min 2 --K-max 2 --L-min 3 --L-max 3 --p-min 3 --p-max 3 --restarts 2 --output-dir " +
                d.string()) == 0);
    const std::string table = slurp(d / "selection.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 2);
    CHECK(fs::exists(d / "winner.json"));

    REQUIRE(run("fit --input " + (d / "dataset.csv").string() + " --restarts 3 --output-dir " +
                (d / "m").string()) == 0);
    REQUIRE(run("evaluate --input " + (d / "dataset.csv").string() + " --labels " +
                (d / "labels.txt").string() + " --model-file " + (d / "m" / "model.json").string() +
                " --output-dir " + (d / "e").string()) == 0);
    const std::string metrics = slurp(d / "e" / "metrics.csv");
    CHECK(metrics.rfind("method,source,misclassification_pct,inertia,log_likelihood\nhpr,", 0) == 0);
}
