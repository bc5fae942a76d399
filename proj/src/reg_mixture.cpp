#include "regclust/reg_mixture.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "regclust/parallel.hpp"
#include "regclust/random.hpp"

namespace regclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(const Eigen::VectorXd& v) {
    const double top = v.maxCoeff();
    if (!std::isfinite(top)) return top;
    return top + std::log((v.array() - top).exp().sum());
}

// n x K matrix of log pi_k + log N(x_i; T beta_k, sigma2_k I).
Eigen::MatrixXd joint_scores(const RegMixtureModel& model, const TimeSeriesDataset& data) {
    const DesignMatrix design = build_design(data.grid(), model.degree(), model.scaling());
    const Eigen::MatrixXd means = design.matrix() * model.coefficients();  // m x K
    const auto m = static_cast<double>(data.length());
    Eigen::MatrixXd scores(data.values().rows(), model.clusters());
    for (int k = 0; k < model.clusters(); ++k) {
        const double var = model.variance(k);
        const Eigen::VectorXd sq =
            (data.values().rowwise() - means.col(k).transpose()).rowwise().squaredNorm();
        scores.col(k) = (std::log(model.proportions()[k]) - 0.5 * m * (kLog2Pi + std::log(var)) -
                         0.5 * sq.array() / var)
                            .matrix();
    }
    return scores;
}

struct RegEStep {
    Eigen::MatrixXd r;
    double log_likelihood = 0.0;
};

RegEStep regmix_e_step(const RegMixtureModel& model, const TimeSeriesDataset& data) {
    const Eigen::MatrixXd scores = joint_scores(model, data);
    RegEStep out;
    out.r.resize(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double total = log_sum_exp(scores.row(i).transpose());
        out.log_likelihood += total;
        out.r.row(i) = (scores.row(i).array() - total).exp().matrix();
    }
    return out;
}

RegMixtureModel regmix_m_step(const Eigen::MatrixXd& r, const TimeSeriesDataset& data,
                              const RegMixtureModel& previous, std::set<std::string>& warnings) {
    const auto n = static_cast<double>(data.series_count());
    const auto m = static_cast<double>(data.length());
    const int k_count = previous.clusters();
    const Eigen::MatrixXd& x = data.values();
    const DesignMatrix design = build_design(data.grid(), previous.degree(), previous.scaling());
    const double floor = variance_floor(data);

    const Eigen::VectorXd mass = r.colwise().sum().transpose();
    Eigen::MatrixXd coefficients(previous.degree() + 1, k_count);
    Eigen::VectorXd variances(k_count);
    for (int k = 0; k < k_count; ++k) {
        if (!(mass[k] >= 1e-10 * n)) {
            throw Error(ErrorCode::EmptyComponent,
                        "cluster " + std::to_string(k + 1) + " lost its posterior mass");
        }
        // Every point of series i carries weight r_ik, so the weighted fit is
        // an OLS fit of the responsibility-weighted mean series.
        const Eigen::VectorXd target = (x.transpose() * r.col(k)) / mass[k];
        WlsSolution sol = least_squares(design, target);
        if (sol.ridge_applied) warnings.insert("ridge jitter applied to a singular design");
        coefficients.col(k) = sol.beta;
        const Eigen::VectorXd fitted = design.matrix() * sol.beta;
        const Eigen::VectorXd sq = (x.rowwise() - fitted.transpose()).rowwise().squaredNorm();
        double v = r.col(k).dot(sq) / (m * mass[k]);
        if (!(v >= floor)) {
            warnings.insert("variance floored at 1e-8 x data variance");
            v = floor;
        }
        variances[k] = v;
    }
    Eigen::VectorXd proportions = mass / n;
    proportions /= proportions.sum();
    return RegMixtureModel(previous.degree(), previous.scaling(), std::move(proportions),
                           std::move(coefficients), std::move(variances));
}

}  // namespace

double regmix_log_density(const RegMixtureModel& model, const Eigen::VectorXd& series,
                          const DesignMatrix& design) {
    if (series.size() != design.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "series length != design rows");
    }
    const auto m = static_cast<double>(series.size());
    Eigen::VectorXd score(model.clusters());
    for (int k = 0; k < model.clusters(); ++k) {
        const double var = model.variance(k);
        const double sq = (series - predict_polynomial(design, model.beta(k))).squaredNorm();
        score[k] = std::log(model.proportions()[k]) - 0.5 * m * (kLog2Pi + std::log(var)) -
                   0.5 * sq / var;
    }
    return log_sum_exp(score);
}

double regmix_log_likelihood(const RegMixtureModel& model, const TimeSeriesDataset& data) {
    return regmix_e_step(model, data).log_likelihood;
}

Eigen::MatrixXd regmix_posteriors(const RegMixtureModel& model, const TimeSeriesDataset& data) {
    return regmix_e_step(model, data).r;
}

Eigen::MatrixXd regmix_mean_series(const RegMixtureModel& model, const TimeGrid& grid) {
    const DesignMatrix design = build_design(grid, model.degree(), model.scaling());
    return (design.matrix() * model.coefficients()).transpose();
}

RegMixtureModel regmix_initialize(const TimeSeriesDataset& data, int clusters, int degree,
                                  std::uint64_t seed, const TimeScaling& scaling) {
    if (clusters < 1) throw Error(ErrorCode::InvalidStructure, "K must be >= 1");
    Rng rng(seed);
    const std::vector<int> picks = draw_distinct(static_cast<int>(data.series_count()), clusters, rng);
    const DesignMatrix design = build_design(data.grid(), degree, scaling);
    const double floor = variance_floor(data);
    Eigen::MatrixXd coefficients(degree + 1, clusters);
    Eigen::VectorXd variances(clusters);
    for (int k = 0; k < clusters; ++k) {
        const Eigen::VectorXd x = data.values().row(picks[static_cast<std::size_t>(k)]).transpose();
        coefficients.col(k) = least_squares(design, x).beta;
        const double v =
            (x - design.matrix() * coefficients.col(k)).squaredNorm() / static_cast<double>(x.size());
        variances[k] = std::max(v, floor);
    }
    return RegMixtureModel(degree, scaling, Eigen::VectorXd::Constant(clusters, 1.0 / clusters),
                           std::move(coefficients), std::move(variances));
}

RegMixFit regmix_run_em(const TimeSeriesDataset& data, const RegMixtureModel& init,
                        const EmOptions& options) {
    options.validate();
    RegMixtureModel model = init;
    RegEStep post = regmix_e_step(model, data);
    if (!std::isfinite(post.log_likelihood)) {
        throw Error(ErrorCode::NonFiniteObjective, "initial log-likelihood is not finite");
    }
    EmFitReport report;
    report.loglik_trace.push_back(post.log_likelihood);
    std::set<std::string> warnings;
    for (int it = 1; it <= options.max_iters; ++it) {
        RegMixtureModel next_model = regmix_m_step(post.r, data, model, warnings);
        RegEStep next = regmix_e_step(next_model, data);
        if (!std::isfinite(next.log_likelihood)) {
            throw Error(ErrorCode::NonFiniteObjective, "log-likelihood became non-finite");
        }
        const double previous = post.log_likelihood;
        model = std::move(next_model);
        post = std::move(next);
        report.loglik_trace.push_back(post.log_likelihood);
        report.iterations = it;
        if (post.log_likelihood - previous <= options.tol * std::abs(previous)) {
            report.converged = true;
            break;
        }
    }
    report.final_log_likelihood = post.log_likelihood;
    report.posteriors_r = std::move(post.r);
    report.warnings.assign(warnings.begin(), warnings.end());
    return {std::move(model), std::move(report)};
}

RegMixFit regmix_fit_em(const TimeSeriesDataset& data, int clusters, int degree,
                        const EmOptions& options) {
    options.validate();
    if (clusters < 1 || degree < 0) {
        throw Error(ErrorCode::InvalidStructure, "need K >= 1 and p >= 0");
    }
    if (degree + 1 > static_cast<int>(data.length())) {
        throw Error(ErrorCode::DegreeTooLargeForGrid, "p + 1 exceeds the series length");
    }
    if (static_cast<int>(data.series_count()) < clusters) {
        throw Error(ErrorCode::InvalidStructure, "fewer series than clusters");
    }
    const TimeScaling scaling = options.scaling_for(data.grid());
    const auto restarts = static_cast<std::size_t>(options.restarts);
    std::vector<std::optional<RegMixFit>> fits(restarts);
    std::vector<RestartOutcome> outcomes(restarts);

    parallel_for(restarts, options.threads, [&](std::size_t r) {
        RestartOutcome& o = outcomes[r];
        o.seed = derive_seed(options.seed, r);
        try {
            const RegMixtureModel init = regmix_initialize(data, clusters, degree, o.seed, scaling);
            RegMixFit fit = regmix_run_em(data, init, options);
            o.log_likelihood = fit.report.final_log_likelihood;
            o.iterations = fit.report.iterations;
            o.converged = fit.report.converged;
            fits[r] = std::move(fit);
        } catch (const Error& e) {
            o.failed = true;
            o.failure = e.what();
            o.log_likelihood = -std::numeric_limits<double>::infinity();
        }
    });

    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < restarts; ++r) {
        if (!fits[r]) continue;
        if (!best || outcomes[r].log_likelihood > outcomes[*best].log_likelihood) best = r;
    }
    if (!best) {
        throw Error(ErrorCode::AllRestartsFailed,
                    "all " + std::to_string(restarts) + " restarts failed (" + outcomes[0].failure + ")");
    }
    RegMixFit result = std::move(*fits[*best]);
    result.report.restart_index = static_cast<int>(*best);
    result.report.restarts = std::move(outcomes);
    return result;
}

}  // namespace regclust
