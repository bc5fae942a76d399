#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "regclust/model_selection.hpp"

using namespace regclust;

TEST_CASE("free parameter count spot values") {
    // (K-1) + 2K(L-1) + LK(p+1) + LK = 1 + 8 + 24 + 6
    CHECK(free_parameter_count(ModelStructure{2, 3, 3}) == 39);
    CHECK(free_parameter_count(ModelStructure{1, 1, 0}) == 2);
    CHECK(free_parameter_count(ModelStructure{2, 3, 3, VarianceMode::CommonGlobal}) == 34);
    CHECK(free_parameter_count(ModelStructure{2, 3, 3, VarianceMode::CommonPerCluster}) == 35);
    CHECK(free_parameter_count(ModelStructure{2, 3, 3, VarianceMode::Free, GatingMode::Shared}) == 35);
    CHECK(regmix_free_parameter_count(2, 10) == 1 + 22 + 2);
}

TEST_CASE("free parameter count equals the scalars a model stores") {
    std::mt19937_64 rng(1);
    for (auto v : {VarianceMode::Free, VarianceMode::CommonPerCluster, VarianceMode::CommonGlobal}) {
        for (auto g : {GatingMode::PerCluster, GatingMode::Shared}) {
            for (int k = 1; k <= 3; ++k) {
                for (int l = 1; l <= 4; ++l) {
                    for (int p = 0; p <= 4; ++p) {
                        const ModelStructure s{k, l, p, v, g};
                        const auto model = fixtures::random_model(s, rng);
                        CHECK(static_cast<int>(model.free_parameters().size()) == free_parameter_count(s));
                        // closed form, written out independently
                        const int var_terms = v == VarianceMode::Free ? l * k
                                              : v == VarianceMode::CommonPerCluster ? k
                                                                                     : 1;
                        const int gate_terms = g == GatingMode::Shared ? 2 * (l - 1) : 2 * k * (l - 1);
                        CHECK(free_parameter_count(s) == (k - 1) + gate_terms + l * k * (p + 1) + var_terms);
                    }
                }
            }
        }
    }
}

TEST_CASE("BIC arithmetic") {
    CHECK(std::abs(bic(-100.0, 43, 50) - (-100.0 - 21.5 * std::log(50.0))) <= 1e-9);
    CHECK(bic(-100.0, 43, 50) == doctest::Approx(-184.11).epsilon(1e-4));
    CHECK(bic(-7.5, 0, 50) == -7.5);
    CHECK(bic(-7.5, 12, 1) == -7.5);
    CHECK(bic(-7.5, 12, 10) > bic(-7.5, 13, 10));
}

TEST_CASE("a single-cell grid selects that cell") {
    std::mt19937_64 rng(2);
    const auto data = fixtures::random_data(12, 10, rng);
    SelectionGrid grid;
    grid.clusters = {2, 2};
    grid.segments = {2, 2};
    grid.degrees = {1, 1};
    EmOptions opt;
    opt.restarts = 2;
    const SelectionReport r = select(data, grid, opt);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.winner == 0);
    CHECK(r.best().fitted);
    CHECK(r.best().parameters == free_parameter_count(ModelStructure{2, 2, 1}));
    CHECK(r.best().bic == doctest::Approx(bic(r.best().log_likelihood, r.best().parameters, 12)));
}

TEST_CASE("grid search ordering, infeasible cells and the winner") {
    std::mt19937_64 rng(3);
    const auto data = fixtures::random_data(10, 6, rng);
    SelectionGrid grid;
    grid.clusters = {1, 2};
    grid.segments = {1, 3};
    grid.degrees = {1, 2};
    EmOptions opt;
    opt.restarts = 2;
    const SelectionReport r = select(data, grid, opt);
    CHECK(r.cells.size() == 12);
    CHECK(r.cells.front().structure == ModelStructure{1, 1, 1});
    CHECK(r.cells.back().structure == ModelStructure{2, 3, 2});
    for (const auto& c : r.cells) {
        // m = 6, L = 3 leaves 2 points per segment: p = 2 is infeasible
        const bool feasible = 6 / c.structure.segments >= c.structure.degree + 1;
        CHECK(c.feasible == feasible);
        if (!feasible) CHECK_FALSE(c.fitted);
    }
    for (const auto& c : r.cells) {
        if (c.fitted && c.converged) CHECK(c.bic <= r.best().bic);
    }
}

TEST_CASE("observation-count penalty") {
    std::mt19937_64 rng(4);
    const auto data = fixtures::random_data(10, 8, rng);
    SelectionGrid grid;
    grid.degrees = {1, 1};
    grid.penalty = PenaltySize::Observations;
    EmOptions opt;
    opt.restarts = 1;
    const SelectionReport r = select(data, grid, opt);
    CHECK(r.best().bic == doctest::Approx(bic(r.best().log_likelihood, r.best().parameters, 80)));
}

TEST_CASE("baseline grid") {
    std::mt19937_64 rng(5);
    const auto data = fixtures::random_data(10, 8, rng);
    SelectionGrid grid;
    grid.clusters = {1, 2};
    grid.degrees = {0, 2};
    EmOptions opt;
    opt.restarts = 2;
    const SelectionReport r = select_regmix(data, grid, opt);
    CHECK(r.baseline);
    CHECK(r.cells.size() == 6);
    CHECK(r.cells[4].parameters == regmix_free_parameter_count(2, 1));
}

TEST_CASE("no feasible cell") {
    std::mt19937_64 rng(6);
    const auto data = fixtures::random_data(5, 4, rng);
    SelectionGrid grid;
    grid.segments = {3, 3};
    grid.degrees = {2, 2};
    try {
        select(data, grid, EmOptions{});
        FAIL("expected NoFeasibleCell");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoFeasibleCell);
    }
}
