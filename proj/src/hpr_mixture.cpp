#include "regclust/hpr_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "regclust/parallel.hpp"
#include "regclust/random.hpp"

namespace regclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Per-cluster quantities that do not depend on the series.
struct ClusterTables {
    Eigen::MatrixXd log_gate;  // m x L
    Eigen::MatrixXd mean;      // m x L
    Eigen::ArrayXd log_norm;   // L, -0.5 * log(2 pi sigma2)
    Eigen::ArrayXd inv_var;    // L
};

std::vector<ClusterTables> tabulate(const HprMixtureModel& model, const TimeGrid& grid) {
    const Eigen::VectorXd times = model.scaling().apply(grid.values());
    const DesignMatrix design = build_design(times, model.degree());
    std::vector<ClusterTables> tables(static_cast<std::size_t>(model.clusters()));
    for (int k = 0; k < model.clusters(); ++k) {
        auto& c = tables[static_cast<std::size_t>(k)];
        c.log_gate = log_logistic_proportions(model.gating(k), times);
        c.mean = design.matrix() * model.coefficients(k);
        const Eigen::ArrayXd var = model.variances().row(k).transpose().array();
        c.log_norm = -0.5 * (kLog2Pi + var.log());
        c.inv_var = var.inverse();
    }
    return tables;
}

// Fills `terms` (m x L) with log pi_kl(t_j) + log N(x_j; mu_jl, sigma2_l),
// `lse` with the per-point log-sum-exp over l, and returns sum_j lse_j.
double point_terms(const ClusterTables& c, const Eigen::VectorXd& x, Eigen::MatrixXd& terms,
                   Eigen::VectorXd& lse) {
    const Eigen::Index m = c.mean.rows();
    const Eigen::Index l_count = c.mean.cols();
    terms.resize(m, l_count);
    lse.resize(m);
    for (Eigen::Index l = 0; l < l_count; ++l) {
        terms.col(l) = (c.log_gate.col(l).array() + c.log_norm[l] -
                        0.5 * c.inv_var[l] * (x - c.mean.col(l)).array().square())
                           .matrix();
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double top = terms.row(j).maxCoeff();
        const double s = top + std::log((terms.row(j).array() - top).exp().sum());
        lse[j] = s;
        total += s;
    }
    return total;
}

double log_sum_exp(const Eigen::VectorXd& v) {
    const double top = v.maxCoeff();
    if (!std::isfinite(top)) return top;
    return top + std::log((v.array() - top).exp().sum());
}

double gating_cap(const TimeScaling& scaling) { return scaling.is_identity() ? 1e6 : 1e4; }

}  // namespace

double component_log_density(const HprMixtureModel& model, int k, const Eigen::VectorXd& series,
                             const TimeGrid& grid) {
    if (static_cast<std::size_t>(series.size()) != grid.size()) {
        throw Error(ErrorCode::DimensionMismatch, "series length != grid length");
    }
    const auto tables = tabulate(model, grid);
    Eigen::MatrixXd terms;
    Eigen::VectorXd lse;
    return point_terms(tables[static_cast<std::size_t>(k)], series, terms, lse);
}

Posteriors e_step(const HprMixtureModel& model, const TimeSeriesDataset& data) {
    const auto tables = tabulate(model, data.grid());
    const Eigen::Index n = data.values().rows();
    const Eigen::Index m = data.values().cols();
    const int k_count = model.clusters();
    const int l_count = model.segments();

    Posteriors post;
    post.segments = l_count;
    post.r.resize(n, k_count);
    post.lambda.assign(static_cast<std::size_t>(k_count * l_count), Eigen::MatrixXd(n, m));
    const Eigen::VectorXd log_pi = model.proportions().array().log().matrix();

    Eigen::MatrixXd terms;
    Eigen::VectorXd lse;
    Eigen::VectorXd score(k_count);
    double loglik = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x = data.values().row(i).transpose();
        for (int k = 0; k < k_count; ++k) {
            score[k] = log_pi[k] + point_terms(tables[static_cast<std::size_t>(k)], x, terms, lse);
            for (int l = 0; l < l_count; ++l) {
                post.lambda[static_cast<std::size_t>(k * l_count + l)].row(i) =
                    (terms.col(l) - lse).array().exp().matrix().transpose();
            }
        }
        const double total = log_sum_exp(score);
        loglik += total;
        for (int k = 0; k < k_count; ++k) {
            const double rik = std::exp(score[k] - total);
            post.r(i, k) = rik;
            for (int l = 0; l < l_count; ++l) {
                post.lambda[static_cast<std::size_t>(k * l_count + l)].row(i) *= rik;
            }
        }
    }
    post.log_likelihood = loglik;
    return post;
}

double observed_log_likelihood(const HprMixtureModel& model, const TimeSeriesDataset& data) {
    const auto tables = tabulate(model, data.grid());
    const Eigen::VectorXd log_pi = model.proportions().array().log().matrix();
    Eigen::MatrixXd terms;
    Eigen::VectorXd lse;
    Eigen::VectorXd score(model.clusters());
    double loglik = 0.0;
    for (Eigen::Index i = 0; i < data.values().rows(); ++i) {
        const Eigen::VectorXd x = data.values().row(i).transpose();
        for (int k = 0; k < model.clusters(); ++k) {
            score[k] = log_pi[k] + point_terms(tables[static_cast<std::size_t>(k)], x, terms, lse);
        }
        loglik += log_sum_exp(score);
    }
    return loglik;
}

MStepResult m_step(const Posteriors& posteriors, const TimeSeriesDataset& data,
                   const HprMixtureModel& previous, int irls_max_iters,
                   double irls_gradient_tolerance) {
    const ModelStructure& s = previous.structure();
    const int k_count = s.clusters;
    const int l_count = s.segments;
    const auto n = static_cast<double>(data.series_count());
    const auto m = static_cast<double>(data.length());
    const Eigen::MatrixXd& x = data.values();
    if (posteriors.r.cols() != k_count || posteriors.segments != l_count ||
        posteriors.r.rows() != x.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "posteriors do not match the model structure");
    }

    std::set<std::string> warnings;
    MStepResult out{previous, {}, false, false};

    // Proportions.
    const Eigen::VectorXd mass = posteriors.r.colwise().sum().transpose();
    for (int k = 0; k < k_count; ++k) {
        if (!(mass[k] >= 1e-10 * n)) {
            throw Error(ErrorCode::EmptyComponent,
                        "cluster " + std::to_string(k + 1) + " lost its posterior mass");
        }
    }
    Eigen::VectorXd proportions = mass / n;
    proportions /= proportions.sum();

    // Gating.
    const Eigen::VectorXd times = previous.scaling().apply(data.grid().values());
    IrlsOptions irls;
    irls.max_iters = irls_max_iters;
    irls.gradient_tolerance = irls_gradient_tolerance;
    irls.alpha_cap = gating_cap(previous.scaling());

    auto regime_weights = [&](int k) {
        Eigen::MatrixXd w(times.size(), l_count);
        for (int l = 0; l < l_count; ++l) {
            w.col(l) = posteriors.lambda_block(k, l).colwise().sum().transpose();
        }
        return w;
    };
    auto run_irls = [&](IrlsProblem problem, const GatingParameters& init) {
        IrlsResult r = irls_fit(problem, init, irls);
        out.gating_damped = out.gating_damped || r.damped;
        out.gating_saturated = out.gating_saturated || r.saturated;
        return r.params;
    };

    std::vector<GatingParameters> gating = previous.gating();
    if (l_count > 1) {
        if (s.gating_mode == GatingMode::Shared) {
            IrlsProblem problem{times, Eigen::MatrixXd::Zero(times.size(), l_count)};
            for (int k = 0; k < k_count; ++k) problem.weights += regime_weights(k);
            const GatingParameters shared = run_irls(std::move(problem), previous.gating(0));
            std::fill(gating.begin(), gating.end(), shared);
        } else {
            for (int k = 0; k < k_count; ++k) {
                gating[static_cast<std::size_t>(k)] =
                    run_irls(IrlsProblem{times, regime_weights(k)}, previous.gating(k));
            }
        }
    }

    // Regressions: the weighted sum of squares over series collapses onto a
    // per-time-point problem with weight W_j and target S_j / W_j.
    const DesignMatrix design = build_design(times, s.degree);
    std::vector<Eigen::MatrixXd> coefficients(static_cast<std::size_t>(k_count),
                                              Eigen::MatrixXd(s.coefficient_count(), l_count));
    Eigen::MatrixXd rss(k_count, l_count);
    Eigen::MatrixXd weight(k_count, l_count);
    for (int k = 0; k < k_count; ++k) {
        for (int l = 0; l < l_count; ++l) {
            const Eigen::MatrixXd& lam = posteriors.lambda_block(k, l);
            const Eigen::VectorXd w = lam.colwise().sum().transpose();
            const Eigen::VectorXd sx = lam.cwiseProduct(x).colwise().sum().transpose();
            Eigen::VectorXd target = Eigen::VectorXd::Zero(w.size());
            for (Eigen::Index j = 0; j < w.size(); ++j) {
                if (w[j] > 0.0) target[j] = sx[j] / w[j];
            }
            WlsSolution sol = weighted_least_squares(design, w, target);
            if (sol.ridge_applied) warnings.insert("ridge jitter applied to a singular weighted design");
            if (!sol.beta.allFinite()) {
                sol.beta = previous.beta(k, l);
                warnings.insert("kept previous coefficients for a regime with no weight");
            }
            coefficients[static_cast<std::size_t>(k)].col(l) = sol.beta;
            const Eigen::VectorXd fitted = design.matrix() * sol.beta;
            rss(k, l) = (lam.array() * (x.rowwise() - fitted.transpose()).array().square()).sum();
            weight(k, l) = w.sum();
        }
    }

    // Variances.
    const double floor = variance_floor(data);
    Eigen::MatrixXd variances(k_count, l_count);
    auto floored = [&](double v) {
        if (!(v >= floor)) {
            warnings.insert("variance floored at 1e-8 x data variance");
            return floor;
        }
        return v;
    };
    switch (s.variance_mode) {
        case VarianceMode::Free:
            for (int k = 0; k < k_count; ++k) {
                for (int l = 0; l < l_count; ++l) {
                    variances(k, l) = weight(k, l) > 0.0 ? floored(rss(k, l) / weight(k, l))
                                                         : previous.variance(k, l);
                }
            }
            break;
        case VarianceMode::CommonPerCluster:
            for (int k = 0; k < k_count; ++k) {
                variances.row(k).setConstant(floored(rss.row(k).sum() / weight.row(k).sum()));
            }
            break;
        case VarianceMode::CommonGlobal:
            variances.setConstant(floored(rss.sum() / (n * m)));
            break;
    }

    out.model = HprMixtureModel(s, previous.scaling(), std::move(proportions), std::move(gating),
                                std::move(coefficients), std::move(variances));
    out.warnings.assign(warnings.begin(), warnings.end());
    return out;
}

ExpectedLogLikelihood expected_complete_log_likelihood(const HprMixtureModel& model,
                                                       const Posteriors& posteriors,
                                                       const TimeSeriesDataset& data) {
    const auto tables = tabulate(model, data.grid());
    const Eigen::MatrixXd& x = data.values();
    ExpectedLogLikelihood q;
    for (int k = 0; k < model.clusters(); ++k) {
        q.proportions += posteriors.r.col(k).sum() * std::log(model.proportions()[k]);
        const auto& c = tables[static_cast<std::size_t>(k)];
        for (int l = 0; l < model.segments(); ++l) {
            const Eigen::MatrixXd& lam = posteriors.lambda_block(k, l);
            const Eigen::VectorXd w = lam.colwise().sum().transpose();
            q.gating += w.dot(c.log_gate.col(l));
            const Eigen::ArrayXXd sq = (x.rowwise() - c.mean.col(l).transpose()).array().square();
            q.regression += c.log_norm[l] * lam.sum() - 0.5 * c.inv_var[l] * (lam.array() * sq).sum();
        }
    }
    return q;
}

HprMixtureModel hpr_initialize(const TimeSeriesDataset& data, const ModelStructure& structure,
                               std::uint64_t seed, const TimeScaling& scaling) {
    structure.validate();
    const int k_count = structure.clusters;
    const int l_count = structure.segments;
    const auto m = static_cast<Eigen::Index>(data.length());
    const Eigen::Index segment_length = m / l_count;
    if (segment_length < structure.coefficient_count()) {
        throw Error(ErrorCode::InsufficientSegmentLength,
                    "segments of " + std::to_string(segment_length) + " points cannot fit degree " +
                        std::to_string(structure.degree));
    }
    Rng rng(seed);
    const std::vector<int> picks = draw_distinct(static_cast<int>(data.series_count()), k_count, rng);
    const DesignMatrix design = build_design(data.grid(), structure.degree, scaling);
    const double floor = variance_floor(data);

    std::vector<Eigen::MatrixXd> coefficients;
    Eigen::MatrixXd rss(k_count, l_count);
    Eigen::MatrixXd counts(k_count, l_count);
    for (int k = 0; k < k_count; ++k) {
        const Eigen::VectorXd x = data.values().row(picks[static_cast<std::size_t>(k)]).transpose();
        Eigen::MatrixXd beta(structure.coefficient_count(), l_count);
        for (int l = 0; l < l_count; ++l) {
            const Eigen::Index begin = l * segment_length;
            const Eigen::Index end = (l + 1 == l_count) ? m : begin + segment_length;
            Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
            w.segment(begin, end - begin).setOnes();
            beta.col(l) = weighted_least_squares(design, w, x).beta;
            const Eigen::VectorXd resid = (x - design.matrix() * beta.col(l)).segment(begin, end - begin);
            rss(k, l) = resid.squaredNorm();
            counts(k, l) = static_cast<double>(end - begin);
        }
        coefficients.push_back(std::move(beta));
    }

    Eigen::MatrixXd variances(k_count, l_count);
    switch (structure.variance_mode) {
        case VarianceMode::Free:
            variances = rss.cwiseQuotient(counts);
            break;
        case VarianceMode::CommonPerCluster:
            for (int k = 0; k < k_count; ++k) {
                variances.row(k).setConstant(rss.row(k).sum() / counts.row(k).sum());
            }
            break;
        case VarianceMode::CommonGlobal:
            variances.setConstant(rss.sum() / counts.sum());
            break;
    }
    variances = variances.cwiseMax(floor);

    std::vector<GatingParameters> gating(static_cast<std::size_t>(k_count),
                                         GatingParameters::zeros(l_count));
    return HprMixtureModel(structure, scaling, Eigen::VectorXd::Constant(k_count, 1.0 / k_count),
                           std::move(gating), std::move(coefficients), std::move(variances));
}

HprFit hpr_run_em(const TimeSeriesDataset& data, const HprMixtureModel& init,
                  const EmOptions& options) {
    options.validate();
    HprMixtureModel model = init;
    Posteriors post = e_step(model, data);
    if (!std::isfinite(post.log_likelihood)) {
        throw Error(ErrorCode::NonFiniteObjective, "initial log-likelihood is not finite");
    }
    EmFitReport report;
    report.loglik_trace.push_back(post.log_likelihood);
    std::set<std::string> warnings;

    for (int it = 1; it <= options.max_iters; ++it) {
        MStepResult step = m_step(post, data, model, options.irls_max_iters,
                                  options.irls_gradient_tolerance);
        warnings.insert(step.warnings.begin(), step.warnings.end());
        if (step.gating_saturated) warnings.insert("gating reached its cap (step-like transition)");
        Posteriors next = e_step(step.model, data);
        if (!std::isfinite(next.log_likelihood)) {
            throw Error(ErrorCode::NonFiniteObjective, "log-likelihood became non-finite");
        }
        const double previous = post.log_likelihood;
        model = std::move(step.model);
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
    report.posteriors_lambda = std::move(post.lambda);
    report.warnings.assign(warnings.begin(), warnings.end());
    return {std::move(model), std::move(report)};
}

HprFit hpr_fit_em(const TimeSeriesDataset& data, const ModelStructure& structure,
                  const EmOptions& options) {
    structure.validate();
    options.validate();
    if (static_cast<int>(data.length()) / structure.segments < structure.coefficient_count()) {
        throw Error(ErrorCode::InsufficientSegmentLength,
                    "floor(m / L) < p + 1 for L=" + std::to_string(structure.segments) +
                        ", p=" + std::to_string(structure.degree));
    }
    if (static_cast<int>(data.series_count()) < structure.clusters) {
        throw Error(ErrorCode::InvalidStructure, "fewer series than clusters");
    }
    const TimeScaling scaling = options.scaling_for(data.grid());
    const auto restarts = static_cast<std::size_t>(options.restarts);
    std::vector<std::optional<HprFit>> fits(restarts);
    std::vector<RestartOutcome> outcomes(restarts);
    EmOptions inner = options;
    inner.threads = 1;

    parallel_for(restarts, options.threads, [&](std::size_t r) {
        RestartOutcome& o = outcomes[r];
        o.seed = derive_seed(options.seed, r);
        try {
            const HprMixtureModel init = hpr_initialize(data, structure, o.seed, scaling);
            HprFit fit = hpr_run_em(data, init, inner);
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
    HprFit result = std::move(*fits[*best]);
    result.report.restart_index = static_cast<int>(*best);
    result.report.restarts = std::move(outcomes);
    return result;
}

std::vector<int> map_partition(const Eigen::MatrixXd& r) {
    std::vector<int> labels(static_cast<std::size_t>(r.rows()));
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < r.cols(); ++k) {
            if (r(i, k) > r(i, best)) best = k;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
    }
    return labels;
}

Eigen::VectorXd mean_series(const HprMixtureModel& model, int k, const TimeGrid& grid) {
    const Eigen::VectorXd times = model.scaling().apply(grid.values());
    const DesignMatrix design = build_design(times, model.degree());
    const Eigen::MatrixXd gates = logistic_proportions(model.gating(k), times);
    const Eigen::MatrixXd curves = design.matrix() * model.coefficients(k);
    return gates.cwiseProduct(curves).rowwise().sum();
}

Eigen::MatrixXd mean_series(const HprMixtureModel& model, const TimeGrid& grid) {
    Eigen::MatrixXd out(model.clusters(), static_cast<Eigen::Index>(grid.size()));
    for (int k = 0; k < model.clusters(); ++k) out.row(k) = mean_series(model, k, grid).transpose();
    return out;
}

Eigen::VectorXd regime_curve(const HprMixtureModel& model, int k, int l, const TimeGrid& grid) {
    const DesignMatrix design = build_design(grid, model.degree(), model.scaling());
    return predict_polynomial(design, model.beta(k, l));
}

int Segmentation::regime_changes() const {
    int changes = 0;
    for (std::size_t j = 1; j < regime_at.size(); ++j) {
        if (regime_at[j] != regime_at[j - 1]) ++changes;
    }
    return changes;
}

Segmentation segment(const HprMixtureModel& model, int k, const TimeGrid& grid) {
    const GatingParameters& alpha = model.gating(k);
    const int l_count = alpha.regimes();
    Segmentation seg;
    seg.intervals.resize(static_cast<std::size_t>(l_count));
    seg.regime_at.resize(grid.size());
    std::vector<std::size_t> hits(static_cast<std::size_t>(l_count), 0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double u = model.scaling().apply(grid[j]);
        // argmax of the softmax is the argmax of the linear scores.
        int best = 0;
        double best_score = alpha.intercept(0) + alpha.slope(0) * u;
        for (int l = 1; l < l_count; ++l) {
            const double score = alpha.intercept(l) + alpha.slope(l) * u;
            if (score > best_score) {
                best = l;
                best_score = score;
            }
        }
        seg.regime_at[j] = best;
        auto& iv = seg.intervals[static_cast<std::size_t>(best)];
        if (!iv) iv.emplace(j, j);
        iv->second = j;
        ++hits[static_cast<std::size_t>(best)];
    }
    for (int l = 0; l < l_count; ++l) {
        const auto& iv = seg.intervals[static_cast<std::size_t>(l)];
        if (iv && iv->second - iv->first + 1 != hits[static_cast<std::size_t>(l)]) {
            throw Error(ErrorCode::ContiguityViolation,
                        "regime " + std::to_string(l + 1) + " of cluster " + std::to_string(k + 1) +
                            " is not contiguous");
        }
    }
    return seg;
}

}  // namespace regclust
