#include "regclust/synthetic.hpp"

#include <cmath>
#include <random>

#include "regclust/design.hpp"
#include "regclust/random.hpp"

namespace regclust {

namespace {

Eigen::MatrixXd gate_matrix(const ClusterSpec& c, const Eigen::VectorXd& times) {
    if (c.gating) return logistic_proportions(*c.gating, times);
    return Eigen::MatrixXd::Ones(times.size(), 1);
}

double regime_variance(const ClusterSpec& c, int l) {
    return c.variances.size() == 1 ? c.variances[0] : c.variances[l];
}

}  // namespace

void GenerativeSpec::validate() const {
    if (n < 1) throw Error(ErrorCode::InvalidSpec, "n must be >= 1");
    if (clusters.empty()) throw Error(ErrorCode::InvalidSpec, "need at least one cluster");
    if (proportions.size() != static_cast<Eigen::Index>(clusters.size())) {
        throw Error(ErrorCode::InvalidSpec, "one proportion per cluster required");
    }
    if (!proportions.allFinite() || (proportions.array() < 0.0).any() ||
        std::abs(proportions.sum() - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidSpec, "proportions must be nonnegative and sum to 1");
    }
    for (const auto& c : clusters) {
        if (c.coefficients.cols() < 1 || c.coefficients.rows() < 1 || !c.coefficients.allFinite()) {
            throw Error(ErrorCode::InvalidSpec, "cluster coefficients must be a finite (p+1) x L matrix");
        }
        if (c.regimes() > 1 && (!c.gating || c.gating->regimes() != c.regimes())) {
            throw Error(ErrorCode::InvalidSpec, "gated clusters need L gating pairs");
        }
        if (c.variances.size() != 1 && c.variances.size() != c.regimes()) {
            throw Error(ErrorCode::InvalidSpec, "variances must have 1 or L entries");
        }
        if (!c.variances.allFinite() || (c.variances.array() < 0.0).any()) {
            throw Error(ErrorCode::InvalidSpec, "variances must be finite and >= 0");
        }
        if (!(c.time_map.scale > 0.0)) {
            throw Error(ErrorCode::InvalidSpec, "cluster time map must have a positive scale");
        }
    }
}

Eigen::VectorXd cluster_mean_curve(const ClusterSpec& cluster, const TimeGrid& grid) {
    const Eigen::VectorXd times = cluster.time_map.apply(grid.values());
    const DesignMatrix design =
        build_design(times, static_cast<int>(cluster.coefficients.rows()) - 1);
    const Eigen::MatrixXd curves = design.matrix() * cluster.coefficients;
    return gate_matrix(cluster, times).cwiseProduct(curves).rowwise().sum();
}

SyntheticSample generate(const GenerativeSpec& spec) {
    spec.validate();
    const auto m = static_cast<Eigen::Index>(spec.grid.size());
    const auto k_count = spec.clusters.size();

    struct Tables {
        Eigen::MatrixXd gates;   // m x L
        Eigen::MatrixXd curves;  // m x L
        Eigen::VectorXd mean;    // m
        Eigen::VectorXd mean_sd; // m, gate-weighted variance, square-rooted
    };
    std::vector<Tables> tables(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        const ClusterSpec& c = spec.clusters[k];
        const Eigen::VectorXd times = c.time_map.apply(spec.grid.values());
        const DesignMatrix design = build_design(times, static_cast<int>(c.coefficients.rows()) - 1);
        auto& t = tables[k];
        t.gates = gate_matrix(c, times);
        t.curves = design.matrix() * c.coefficients;
        t.mean = t.gates.cwiseProduct(t.curves).rowwise().sum();
        Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
        for (int l = 0; l < c.regimes(); ++l) var += t.gates.col(l) * regime_variance(c, l);
        t.mean_sd = var.cwiseSqrt();
    }

    Eigen::MatrixXd values(spec.n, m);
    std::vector<int> labels(static_cast<std::size_t>(spec.n));
    std::vector<std::vector<int>> regimes(static_cast<std::size_t>(spec.n),
                                          std::vector<int>(static_cast<std::size_t>(m)));
    std::vector<double> weights(spec.proportions.data(),
                                spec.proportions.data() + spec.proportions.size());

    for (int i = 0; i < spec.n; ++i) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
        std::discrete_distribution<int> pick_cluster(weights.begin(), weights.end());
        std::normal_distribution<double> noise(0.0, 1.0);
        const int k = pick_cluster(rng);
        labels[static_cast<std::size_t>(i)] = k + 1;
        const ClusterSpec& c = spec.clusters[static_cast<std::size_t>(k)];
        const Tables& t = tables[static_cast<std::size_t>(k)];
        for (Eigen::Index j = 0; j < m; ++j) {
            int regime = 0;
            if (spec.mode == GenerationMode::PerPointRegime) {
                std::vector<double> g(static_cast<std::size_t>(c.regimes()));
                for (int l = 0; l < c.regimes(); ++l) g[static_cast<std::size_t>(l)] = t.gates(j, l);
                std::discrete_distribution<int> pick_regime(g.begin(), g.end());
                regime = pick_regime(rng);
                values(i, j) = t.curves(j, regime) +
                               std::sqrt(regime_variance(c, regime)) * noise(rng);
            } else {
                t.gates.row(j).maxCoeff(&regime);
                values(i, j) = t.mean[j] + t.mean_sd[j] * noise(rng);
            }
            regimes[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = regime + 1;
        }
    }
    return {TimeSeriesDataset(spec.grid, std::move(values), std::move(labels)), std::move(regimes)};
}

GenerativeSpec table1_spec(double sigma2, std::uint64_t seed) {
    if (!(sigma2 > 0.0)) throw Error(ErrorCode::InvalidSpec, "sigma2 must be > 0");
    GenerativeSpec spec;
    spec.n = 50;
    spec.grid = TimeGrid::regular(1.0, 1.0, 60);
    spec.seed = seed;
    spec.proportions = Eigen::Vector2d(0.5, 0.5);

    ClusterSpec staircase;
    staircase.coefficients = Eigen::RowVector3d(10.0, 20.0, 30.0);
    Eigen::MatrixXd alpha(3, 2);
    alpha << 1039.0, -34.4,
             677.0, -16.7,
             0.0, 0.0;
    staircase.gating = GatingParameters(alpha);
    staircase.variances = Eigen::VectorXd::Constant(1, sigma2);

    ClusterSpec polynomial;
    polynomial.coefficients.resize(9, 1);
    polynomial.coefficients << 7.4, 1.9, -0.3, -2e-3, 2e-4, -1.3e-4, 3.2e-6, -3.7e-8, 1.6e-10;
    polynomial.variances = Eigen::VectorXd::Constant(1, sigma2);

    spec.clusters = {staircase, polynomial};
    return spec;
}

}  // namespace regclust
