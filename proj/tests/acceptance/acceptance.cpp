// Acceptance checks. Each invocation runs one criterion, prints its measured
// values and exactly one "criterion N: PASS" or "criterion N: FAIL" line, and
// exits non-zero on failure.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "regclust/gating.hpp"
#include "regclust/hpr_mixture.hpp"
#include "regclust/io.hpp"
#include "regclust/model_selection.hpp"
#include "regclust/random.hpp"
#include "regclust/reg_mixture.hpp"
#include "regclust/study.hpp"
#include "regclust/synthetic.hpp"

using namespace regclust;
namespace fs = std::filesystem;

namespace {

// Seeds of the data streams and of the EM restarts; fixed so every run of
// the suite sees the same replicates.
constexpr std::uint64_t kDataMaster = 1001;
constexpr std::uint64_t kEmMaster = 2002;

// Collects named sub-checks; the criterion passes when all of them do.
class Verdict {
public:
    explicit Verdict(int criterion) : criterion_(criterion) {}

    void check(bool ok, const std::string& what) {
        std::cout << "  [" << (ok ? "ok  " : "fail") << "] " << what << "\n";
        if (!ok) ++failed_;
    }

    int finish() const {
        std::cout << "criterion " << criterion_ << ": " << (failed_ == 0 ? "PASS" : "FAIL");
        if (failed_ != 0) std::cout << " (" << failed_ << " sub-check(s) failed)";
        std::cout << std::endl;
        return failed_ == 0 ? 0 : 1;
    }

private:
    int criterion_;
    int failed_ = 0;
};

std::string num(double v, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::string cell_name(const ModelStructure& s, bool baseline) {
    if (baseline) return "(K=" + std::to_string(s.clusters) + ", p=" + std::to_string(s.degree) + ")";
    return "(K=" + std::to_string(s.clusters) + ", L=" + std::to_string(s.segments) +
           ", p=" + std::to_string(s.degree) + ")";
}

EmOptions study_options(std::uint64_t seed) {
    EmOptions opt;
    opt.restarts = 20;
    opt.seed = seed;
    return opt;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1: Table 1 benchmark, 25 replicates.

int criterion_1() {
    Verdict v(1);
    const int replicates = 25;
    const double sigma2 = 1.0;
    const ModelStructure proposed{2, 3, 3};
    const int baseline_degree = 10;
    std::cout << "Table 1 benchmark: sigma2 = " << sigma2 << ", " << replicates
              << " replicates, proposed " << cell_name(proposed, false)
              << ", baseline (K=2, p=10), 20 restarts each\n";
    const auto start = std::chrono::steady_clock::now();
    std::vector<Comparison> runs;
    int proposed_better = 0;
    for (int r = 0; r < replicates; ++r) {
        const auto sample = generate(table1_spec(sigma2, replicate_seed(kDataMaster, r)));
        const Comparison c =
            compare_methods(sample.data, proposed, baseline_degree, study_options(replicate_seed(kEmMaster, r)));
        runs.push_back(c);
        if (c.proposed.inertia < c.baseline.inertia) ++proposed_better;
        std::cout << "  replicate " << r << ": proposed err " << num(c.proposed.misclassification_pct)
                  << "% inertia " << num(c.proposed.inertia) << " | baseline err "
                  << num(c.baseline.misclassification_pct) << "% inertia " << num(c.baseline.inertia)
                  << "\n";
    }
    const Comparison avg = average(runs);
    const double elapsed = seconds_since(start);
    v.check(avg.proposed.misclassification_pct <= 2.0,
            "proposed mean misclassification " + num(avg.proposed.misclassification_pct) + "% <= 2%");
    v.check(avg.baseline.misclassification_pct <= 5.0,
            "baseline mean misclassification " + num(avg.baseline.misclassification_pct) + "% <= 5%");
    v.check(std::abs(avg.proposed.inertia - 1.20e4) <= 0.25 * 1.20e4,
            "proposed mean inertia " + num(avg.proposed.inertia) + " within 25% of 1.20e4");
    v.check(std::abs(avg.baseline.inertia - 2.25e4) <= 0.25 * 2.25e4,
            "baseline mean inertia " + num(avg.baseline.inertia) + " within 25% of 2.25e4");
    v.check(proposed_better >= 24, "proposed inertia below baseline in " + std::to_string(proposed_better) +
                                       "/25 replicates (need >= 24)");
    v.check(elapsed < 600.0, "runtime " + num(elapsed, 4) + " s < 600 s");
    return v.finish();
}

// ---------------------------------------------------------------------------
// 2: BIC selection, 25 replicates at sigma2 = 2.

int criterion_2() {
    Verdict v(2);
    const int replicates = 25;
    const double sigma2 = 2.0;
    SelectionGrid hpr_grid;
    hpr_grid.clusters = {1, 3};
    hpr_grid.segments = {1, 4};
    hpr_grid.degrees = {1, 4};
    SelectionGrid reg_grid;
    reg_grid.clusters = {1, 3};
    reg_grid.degrees = {1, 12};
    std::cout << "BIC selection: sigma2 = " << sigma2 << ", " << replicates
              << " replicates, proposed grid K 1..3 x L 1..4 x p 1..4, baseline grid K 1..3 x p 1..12, "
                 "20 restarts per cell\n";
    const auto start = std::chrono::steady_clock::now();
    std::map<std::tuple<int, int, int>, int> hpr_wins;
    std::map<std::pair<int, int>, int> reg_wins;
    for (int r = 0; r < replicates; ++r) {
        const auto sample = generate(table1_spec(sigma2, replicate_seed(kDataMaster + 1, r)));
        const auto opt = study_options(replicate_seed(kEmMaster + 1, r));
        const SelectionReport hpr = select(sample.data, hpr_grid, opt);
        const SelectionReport reg = select_regmix(sample.data, reg_grid, opt);
        const auto& hs = hpr.best().structure;
        const auto& rs = reg.best().structure;
        ++hpr_wins[{hs.clusters, hs.segments, hs.degree}];
        ++reg_wins[{rs.clusters, rs.degree}];
        std::cout << "  replicate " << r << ": proposed " << cell_name(hs, false) << " baseline "
                  << cell_name(rs, true) << " (" << num(seconds_since(start), 4) << " s)" << std::endl;
    }
    auto hpr_mode = std::max_element(hpr_wins.begin(), hpr_wins.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
    auto reg_mode = std::max_element(reg_wins.begin(), reg_wins.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
    std::cout << "  proposed winners:";
    for (const auto& [key, count] : hpr_wins) {
        std::cout << " (" << std::get<0>(key) << "," << std::get<1>(key) << "," << std::get<2>(key)
                  << ")x" << count;
    }
    std::cout << "\n  baseline winners:";
    for (const auto& [key, count] : reg_wins) std::cout << " (" << key.first << "," << key.second << ")x" << count;
    std::cout << "\n";
    // A tie for the mode does not count as selecting the target.
    auto unique_mode = [](const auto& wins, const auto& mode) {
        for (auto it = wins.begin(); it != wins.end(); ++it) {
            if (it != mode && it->second == mode->second) return false;
        }
        return true;
    };
    const auto [hk, hl, hp] = hpr_mode->first;
    v.check(hpr_mode->first == std::make_tuple(2, 3, 3) && unique_mode(hpr_wins, hpr_mode),
            "proposed modal BIC choice (" + std::to_string(hk) + "," + std::to_string(hl) + "," +
                std::to_string(hp) + ") in " + std::to_string(hpr_mode->second) + "/25 is (2,3,3)");
    v.check(reg_mode->first == std::make_pair(2, 10) && unique_mode(reg_wins, reg_mode),
            "baseline modal BIC choice (" + std::to_string(reg_mode->first.first) + "," +
                std::to_string(reg_mode->first.second) + ") in " + std::to_string(reg_mode->second) +
                "/25 is (2,10)");
    return v.finish();
}

// ---------------------------------------------------------------------------
// 3: noise sweep.

int criterion_3() {
    Verdict v(3);
    const std::vector<double> levels = {1.0, 1.5, 2.0, 2.5, 3.0};
    const int replicates = 10;
    std::cout << "Noise sweep: sigma2 in {1, 1.5, 2, 2.5, 3}, " << replicates
              << " replicates per level, proposed (K=2, L=3, p=3), baseline (K=2, p=10)\n";
    std::vector<Comparison> per_level;
    for (std::size_t q = 0; q < levels.size(); ++q) {
        std::vector<Comparison> runs;
        for (int r = 0; r < replicates; ++r) {
            const std::uint64_t index = q * 1000 + static_cast<std::uint64_t>(r);
            const auto sample = generate(table1_spec(levels[q], derive_seed(kDataMaster + 2, index)));
            runs.push_back(compare_methods(sample.data, ModelStructure{2, 3, 3}, 10,
                                           study_options(derive_seed(kEmMaster + 2, index))));
        }
        per_level.push_back(average(runs));
        const auto& a = per_level.back();
        std::cout << "  sigma2 " << levels[q] << ": proposed err " << num(a.proposed.misclassification_pct)
                  << "% inertia " << num(a.proposed.inertia) << " | baseline err "
                  << num(a.baseline.misclassification_pct) << "% inertia " << num(a.baseline.inertia)
                  << std::endl;
    }
    for (std::size_t q = 0; q < levels.size(); ++q) {
        const auto& a = per_level[q];
        v.check(a.proposed.inertia < a.baseline.inertia,
                "sigma2 " + num(levels[q]) + ": proposed inertia " + num(a.proposed.inertia) +
                    " < baseline " + num(a.baseline.inertia));
    }
    double low_max = 0.0;
    for (std::size_t q = 0; q < levels.size(); ++q) {
        if (levels[q] <= 2.0) low_max = std::max(low_max, per_level[q].baseline.misclassification_pct);
    }
    const double high = per_level.back().baseline.misclassification_pct;
    v.check(high > low_max, "baseline misclassification at sigma2 = 3 (" + num(high) +
                                "%) exceeds every level sigma2 <= 2 (max " + num(low_max) + "%)");
    return v.finish();
}

// ---------------------------------------------------------------------------
// 4: property suite.

const ModelStructure kModes[] = {
    {2, 3, 1, VarianceMode::Free, GatingMode::PerCluster},
    {2, 3, 1, VarianceMode::CommonPerCluster, GatingMode::PerCluster},
    {2, 3, 1, VarianceMode::CommonGlobal, GatingMode::PerCluster},
    {2, 3, 1, VarianceMode::Free, GatingMode::Shared},
};

bool nondecreasing(const std::vector<double>& trace, double& worst) {
    bool ok = true;
    for (std::size_t q = 1; q < trace.size(); ++q) {
        const double drop = trace[q - 1] - trace[q];
        worst = std::max(worst, drop);
        if (drop > 1e-8) ok = false;
    }
    return ok;
}

void check_monotone(Verdict& v) {
    std::mt19937_64 rng(401);
    int runs = 0, bad = 0, skipped = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const auto data = fixtures::random_data(20, 15, rng);
        EmOptions opt;
        opt.restarts = 1;
        opt.max_iters = 300;
        opt.seed = 500 + static_cast<std::uint64_t>(inst);
        for (const auto& s : kModes) {
            try {
                const HprFit fit = hpr_fit_em(data, s, opt);
                ++runs;
                if (!nondecreasing(fit.report.loglik_trace, worst)) ++bad;
            } catch (const Error&) {
                ++skipped;
            }
        }
        try {
            const RegMixFit fit = regmix_fit_em(data, 2, 2, opt);
            ++runs;
            if (!nondecreasing(fit.report.loglik_trace, worst)) ++bad;
        } catch (const Error&) {
            ++skipped;
        }
    }
    v.check(bad == 0 && runs >= 225,
            "EM log-likelihood never drops by more than 1e-8 on 50 instances x (4 HPR modes + baseline): " +
                std::to_string(runs) + " runs, " + std::to_string(bad) + " violations, " +
                std::to_string(skipped) + " collapsed, largest drop " + num(worst, 3));
}

void check_marginals(Verdict& v) {
    std::mt19937_64 rng(402);
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const auto model = fixtures::random_model(kModes[inst % 4], rng);
        const auto data = fixtures::random_data(8, 10, rng);
        const Posteriors post = e_step(model, data);
        for (int k = 0; k < model.clusters(); ++k) {
            Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(8, 10);
            for (int l = 0; l < model.segments(); ++l) sum += post.lambda_block(k, l);
            for (Eigen::Index j = 0; j < 10; ++j) {
                worst = std::max(worst, (sum.col(j) - post.r.col(k)).cwiseAbs().maxCoeff());
            }
        }
    }
    v.check(worst <= 1e-12, "sum over regimes of lambda equals r on 50 instances, max error " + num(worst, 3) +
                                " <= 1e-12");
}

void check_irls_gradient(Verdict& v) {
    std::mt19937_64 rng(403);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int l_count = 2 + trial % 3;
        const int m = 15;
        IrlsProblem p;
        p.times = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
        p.weights.resize(m, l_count);
        for (int j = 0; j < m; ++j) {
            for (int l = 0; l < l_count; ++l) p.weights(j, l) = 5.0 * u(rng);
        }
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(l_count, 2);
        for (int l = 0; l + 1 < l_count; ++l) a.row(l) << 4.0 * u(rng) - 2.0, 4.0 * u(rng) - 2.0;
        const GatingParameters g(a);
        const Eigen::VectorXd grad = gating_gradient(g, p);
        const Eigen::VectorXd free = g.free_vector();
        const double h = 1e-5;
        for (Eigen::Index q = 0; q < free.size(); ++q) {
            Eigen::VectorXd ap = free, am = free;
            ap[q] += h;
            am[q] -= h;
            const double fd = (gating_objective(GatingParameters::from_free(l_count, ap), p) -
                               gating_objective(GatingParameters::from_free(l_count, am), p)) /
                              (2 * h);
            worst = std::max(worst, std::abs(fd - grad[q]) / std::max(1.0, std::abs(fd)));
        }
    }
    v.check(worst <= 1e-5, "IRLS gradient vs central differences on 20 problems, max relative error " +
                               num(worst, 3) + " <= 1e-5");
}

void check_softmax(Verdict& v) {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_norm = 0.0, worst_shift = 0.0;
    for (int point = 0; point < 1000; ++point) {
        const int l_count = 2 + point % 4;
        // every tenth point uses large logits to exercise overflow safety
        const double scale = point % 10 == 0 ? 800.0 : 5.0;
        Eigen::MatrixXd raw(l_count, 2);
        for (int l = 0; l < l_count; ++l) raw.row(l) << scale * u(rng), scale * u(rng);
        const double t = 2.0 * u(rng);
        // Pinning subtracts the reference row from every row, a pure shift of the
        // logits, so the proportions must match the unpinned softmax.
        Eigen::MatrixXd pinned = raw.rowwise() - raw.row(l_count - 1);
        const Eigen::VectorXd pi = logistic_proportions(GatingParameters(pinned), t);
        const auto ref = oracle::softmax(raw, t);
        worst_norm = std::max(worst_norm, std::abs(pi.sum() - 1.0));
        for (int l = 0; l < l_count; ++l) {
            worst_shift =
                std::max(worst_shift, std::abs(pi[l] - static_cast<double>(ref[static_cast<std::size_t>(l)])));
        }
        if (!pi.allFinite()) worst_norm = INFINITY;
    }
    v.check(worst_norm <= 1e-12, "softmax sums to one at 1000 points, max error " + num(worst_norm, 3));
    v.check(worst_shift <= 1e-12,
            "softmax is shift invariant at 1000 points, max deviation " + num(worst_shift, 3));
}

void check_contiguity(Verdict& v) {
    std::mt19937_64 rng(405);
    int models = 0, violations = 0, skipped = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int l_count = 1 + trial % 4;
        const auto data = fixtures::random_data(10, 24, rng);
        EmOptions opt;
        opt.restarts = 1;
        opt.max_iters = 60;
        opt.seed = 900 + static_cast<std::uint64_t>(trial);
        try {
            const HprFit fit = hpr_fit_em(data, ModelStructure{2, l_count, 1}, opt);
            ++models;
            const TimeGrid fine = TimeGrid::regular(0.0, 1.0 / 400.0, 401);
            for (int k = 0; k < 2; ++k) {
                for (const TimeGrid* g : {&data.grid(), &fine}) {
                    try {
                        const Segmentation s = segment(fit.model, k, *g);
                        if (s.regime_changes() > l_count - 1) ++violations;
                    } catch (const Error&) {
                        ++violations;
                    }
                }
            }
        } catch (const Error&) {
            ++skipped;
        }
    }
    v.check(violations == 0 && models >= 90,
            "argmax-gate segmentation is contiguous for " + std::to_string(models) + " fitted models (" +
                std::to_string(skipped) + " collapsed), " + std::to_string(violations) + " violations");
}

void check_l1_reduction(Verdict& v) {
    std::mt19937_64 rng(406);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto data = fixtures::random_data(20, 12, rng);
        EmOptions opt;
        const int k_count = 1 + trial % 3;
        const RegMixtureModel init =
            regmix_initialize(data, k_count, 1 + trial % 3, 700 + static_cast<std::uint64_t>(trial),
                              opt.scaling_for(data.grid()));
        const RegMixFit reg = regmix_run_em(data, init, opt);
        const HprFit hpr = hpr_run_em(data, to_hpr_model(init), opt);
        worst = std::max(worst, std::abs(hpr.report.final_log_likelihood - reg.report.final_log_likelihood) /
                                    std::abs(reg.report.final_log_likelihood));
    }
    v.check(worst <= 1e-6, "L = 1 fit equals the baseline fit on 20 instances, max relative difference " +
                               num(worst, 3) + " <= 1e-6");
}

void check_m_step(Verdict& v) {
    std::mt19937_64 rng(407);
    std::normal_distribution<double> n01(0, 1);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int m = 18, n = 9, k_count = 2, l_count = 3;
        const int degree = trial % 3;
        const TimeGrid grid = TimeGrid::regular(0.0, 1.0 / (m - 1), m);
        std::vector<int> z(n), seg(m);
        for (int i = 0; i < n; ++i) z[i] = i % k_count;
        for (int j = 0; j < m; ++j) seg[j] = j / 6;
        Eigen::MatrixXd x(n, m);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) x(i, j) = 3.0 * z[i] + 2.0 * seg[j] + grid[j] + n01(rng);
        }
        const TimeSeriesDataset data(grid, x);
        Posteriors post;
        post.segments = l_count;
        post.r = Eigen::MatrixXd::Zero(n, k_count);
        post.lambda.assign(k_count * l_count, Eigen::MatrixXd::Zero(n, m));
        for (int i = 0; i < n; ++i) {
            post.r(i, z[i]) = 1.0;
            for (int j = 0; j < m; ++j) post.lambda[static_cast<std::size_t>(z[i] * l_count + seg[j])](i, j) = 1.0;
        }
        const auto prev = fixtures::random_model(ModelStructure{k_count, l_count, degree}, rng);
        const MStepResult res = m_step(post, data, prev);
        for (int k = 0; k < k_count; ++k) {
            for (int l = 0; l < l_count; ++l) {
                std::vector<oracle::Real> t, y, w;
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < m; ++j) {
                        if (z[i] != k || seg[j] != l) continue;
                        t.push_back(grid[j]);
                        y.push_back(x(i, j));
                        w.push_back(1.0L);
                    }
                }
                const auto beta = oracle::wls(t, y, w, degree);
                oracle::Real rss = 0.0L;
                for (std::size_t q = 0; q < t.size(); ++q) {
                    const auto e = y[q] - oracle::poly(beta, t[q]);
                    rss += e * e;
                }
                for (int u = 0; u <= degree; ++u) {
                    worst = std::max(worst, std::abs(res.model.beta(k, l)[u] - static_cast<double>(beta[u])));
                }
                worst = std::max(worst, std::abs(res.model.variance(k, l) - static_cast<double>(rss / t.size())));
            }
        }
    }
    v.check(worst <= 1e-9, "M-step with hard posteriors matches per-segment OLS, max error " + num(worst, 3) +
                               " <= 1e-9");
}

void check_parameter_count(Verdict& v) {
    std::mt19937_64 rng(408);
    int mismatches = 0, cells = 0;
    for (auto vm : {VarianceMode::Free, VarianceMode::CommonPerCluster, VarianceMode::CommonGlobal}) {
        for (auto gm : {GatingMode::PerCluster, GatingMode::Shared}) {
            for (int k = 1; k <= 3; ++k) {
                for (int l = 1; l <= 4; ++l) {
                    for (int p = 0; p <= 4; ++p) {
                        const ModelStructure s{k, l, p, vm, gm};
                        const auto model = fixtures::random_model(s, rng);
                        ++cells;
                        if (static_cast<int>(model.free_parameters().size()) != free_parameter_count(s)) {
                            ++mismatches;
                        }
                    }
                }
            }
        }
    }
    v.check(mismatches == 0, "parameter count equals the programmatic count on " + std::to_string(cells) +
                                 " (K, L, p, mode) cells, " + std::to_string(mismatches) + " mismatches");
    const int nu = free_parameter_count(ModelStructure{2, 3, 3});
    v.check(nu == 43, "nu(K=2, L=3, p=3) = " + std::to_string(nu) + " equals 43");
    const long double expected = -100.0L - 21.5L * std::log(50.0L);
    const double got = bic(-100.0, 43, 50);
    v.check(std::abs(static_cast<long double>(got) - expected) <= 1e-9L,
            "bic(-100, 43, 50) = " + num(got, 12) + " matches -100 - 21.5 ln 50 to 1e-9");
}

void check_round_trip(Verdict& v) {
    std::mt19937_64 rng(409);
    int mismatches = 0, models = 0;
    for (int trial = 0; trial < 20; ++trial) {
        ModelStructure s = kModes[trial % 4];
        s.clusters = 1 + trial % 3;
        s.segments = 1 + trial % 4;
        s.degree = trial % 5;
        const auto model = fixtures::random_model(s, rng);
        const AnyModel back = model_from_json(model_to_json(model));
        const auto* hpr = std::get_if<HprMixtureModel>(&back);
        ++models;
        if (hpr == nullptr || hpr->structure() != model.structure() ||
            hpr->free_parameters() != model.free_parameters() || hpr->variances() != model.variances() ||
            hpr->scaling().offset != model.scaling().offset || hpr->scaling().scale != model.scaling().scale) {
            ++mismatches;
        }
    }
    const auto sample = generate(table1_spec(1.0, 11));
    std::stringstream csv;
    write_dataset_csv(csv, sample.data);
    const TimeSeriesDataset data = read_dataset_csv(csv);
    const bool data_ok =
        data.values() == sample.data.values() && data.grid().values() == sample.data.grid().values();
    EmOptions opt;
    opt.restarts = 2;
    const RegMixFit reg = regmix_fit_em(sample.data, 2, 4, opt);
    const AnyModel reg_back = model_from_json(model_to_json(reg.model));
    const auto* rm = std::get_if<RegMixtureModel>(&reg_back);
    const bool reg_ok = rm != nullptr && rm->free_parameters() == reg.model.free_parameters() &&
                        regmix_log_likelihood(*rm, sample.data) == reg.report.final_log_likelihood;
    v.check(mismatches == 0 && data_ok && reg_ok,
            "serialization round trip is exact for " + std::to_string(models) +
                " HPR models, a baseline model and a dataset");
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(REGCLUST_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void check_cli_determinism(Verdict& v) {
    const fs::path root = fs::temp_directory_path() / "regclust_acceptance_cli";
    fs::remove_all(root);
    bool ok = true;
    for (const char* run : {"a", "b"}) {
        const fs::path d = root / run;
        ok = ok && run_cli("simulate --preset table1 --sigma2 1.5 --seed 17 --output-dir " + d.string()) == 0;
        ok = ok && run_cli("fit --input " + (d / "dataset.csv").string() +
                           " --K 2 --L 3 --p 3 --restarts 5 --seed 23 --output-dir " + (d / "fit").string()) == 0;
    }
    int compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file()) continue;
        const fs::path other = root / "b" / fs::relative(entry.path(), root / "a");
        ++compared;
        if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ok = false;
    }
    v.check(ok && compared >= 10, "CLI simulate + fit reruns are byte-identical across " +
                                      std::to_string(compared) + " output files");
    fs::remove_all(root);
}

int criterion_4() {
    Verdict v(4);
    std::cout << "Property suite\n";
    check_monotone(v);
    check_marginals(v);
    check_irls_gradient(v);
    check_softmax(v);
    check_contiguity(v);
    check_l1_reduction(v);
    check_m_step(v);
    check_parameter_count(v);
    check_round_trip(v);
    check_cli_determinism(v);
    return v.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> criteria;
    app.add_option("--criterion", criteria, "criterion number(s) to run (default: all)")
        ->check(CLI::Range(1, 4));
    CLI11_PARSE(app, argc, argv);
    if (criteria.empty()) criteria = {1, 2, 3, 4};
    const std::function<int()> table[] = {criterion_1, criterion_2, criterion_3, criterion_4};
    int status = 0;
    for (int c : criteria) {
        try {
            status |= table[c - 1]();
        } catch (const std::exception& e) {
            std::cout << "  error: " << e.what() << "\ncriterion " << c << ": FAIL" << std::endl;
            status = 1;
        }
    }
    return status;
}
