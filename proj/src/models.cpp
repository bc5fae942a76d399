#include "regclust/models.hpp"

#include <cmath>

namespace regclust {

namespace {

void check_proportions(const Eigen::VectorXd& pi) {
    if (pi.size() < 1) {
        throw Error(ErrorCode::InvalidModel, "a mixture needs at least one proportion");
    }
    if (!pi.allFinite() || (pi.array() <= 0.0).any() || (pi.array() > 1.0).any()) {
        throw Error(ErrorCode::InvalidModel, "mixture proportions must lie in (0, 1]");
    }
    if (std::abs(pi.sum() - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidModel, "mixture proportions must sum to 1");
    }
}

void check_variances(const Eigen::MatrixXd& v) {
    if (!v.allFinite() || (v.array() <= 0.0).any()) {
        throw Error(ErrorCode::InvalidModel, "variances must be finite and positive");
    }
}

}  // namespace

HprMixtureModel::HprMixtureModel(ModelStructure structure, TimeScaling scaling,
                                 Eigen::VectorXd proportions, std::vector<GatingParameters> gating,
                                 std::vector<Eigen::MatrixXd> coefficients,
                                 Eigen::MatrixXd variances)
    : structure_(structure),
      scaling_(scaling),
      proportions_(std::move(proportions)),
      gating_(std::move(gating)),
      coefficients_(std::move(coefficients)),
      variances_(std::move(variances)) {
    structure_.validate();
    const int k_count = structure_.clusters;
    const int l_count = structure_.segments;
    if (!(scaling_.scale > 0.0) || !std::isfinite(scaling_.offset)) {
        throw Error(ErrorCode::InvalidModel, "time scaling must have a positive finite scale");
    }
    if (proportions_.size() != k_count) {
        throw Error(ErrorCode::InvalidModel, "proportion count != K");
    }
    check_proportions(proportions_);
    if (static_cast<int>(gating_.size()) != k_count ||
        static_cast<int>(coefficients_.size()) != k_count) {
        throw Error(ErrorCode::InvalidModel, "need one gating and one coefficient block per cluster");
    }
    for (int k = 0; k < k_count; ++k) {
        if (gating_[k].regimes() != l_count) {
            throw Error(ErrorCode::InvalidModel, "gating regime count != L");
        }
        if (coefficients_[k].rows() != structure_.coefficient_count() ||
            coefficients_[k].cols() != l_count) {
            throw Error(ErrorCode::InvalidModel, "coefficient block must be (p+1) x L");
        }
        if (!coefficients_[k].allFinite()) {
            throw Error(ErrorCode::InvalidModel, "regression coefficients must be finite");
        }
    }
    if (structure_.gating_mode == GatingMode::Shared) {
        for (int k = 1; k < k_count; ++k) {
            if (!(gating_[k] == gating_[0])) {
                throw Error(ErrorCode::InvalidModel, "shared gating requires identical parameters");
            }
        }
    }
    if (variances_.rows() != k_count || variances_.cols() != l_count) {
        throw Error(ErrorCode::InvalidModel, "variance matrix must be K x L");
    }
    check_variances(variances_);
    if (structure_.variance_mode == VarianceMode::CommonPerCluster) {
        for (int k = 0; k < k_count; ++k) {
            if ((variances_.row(k).array() != variances_(k, 0)).any()) {
                throw Error(ErrorCode::InvalidModel, "per-cluster variance must be common to regimes");
            }
        }
    } else if (structure_.variance_mode == VarianceMode::CommonGlobal) {
        if ((variances_.array() != variances_(0, 0)).any()) {
            throw Error(ErrorCode::InvalidModel, "global variance must be common to all regimes");
        }
    }
}

std::vector<double> HprMixtureModel::free_parameters() const {
    std::vector<double> out;
    const int k_count = clusters();
    const int l_count = segments();
    for (int k = 0; k + 1 < k_count; ++k) out.push_back(proportions_[k]);

    const int gating_blocks = structure_.gating_mode == GatingMode::Shared ? 1 : k_count;
    for (int k = 0; k < gating_blocks; ++k) {
        const Eigen::VectorXd free = gating_[k].free_vector();
        out.insert(out.end(), free.data(), free.data() + free.size());
    }
    for (int k = 0; k < k_count; ++k) {
        const auto& c = coefficients_[k];
        out.insert(out.end(), c.data(), c.data() + c.size());
    }
    switch (structure_.variance_mode) {
        case VarianceMode::Free:
            for (int k = 0; k < k_count; ++k)
                for (int l = 0; l < l_count; ++l) out.push_back(variances_(k, l));
            break;
        case VarianceMode::CommonPerCluster:
            for (int k = 0; k < k_count; ++k) out.push_back(variances_(k, 0));
            break;
        case VarianceMode::CommonGlobal:
            out.push_back(variances_(0, 0));
            break;
    }
    return out;
}

RegMixtureModel::RegMixtureModel(int degree, TimeScaling scaling, Eigen::VectorXd proportions,
                                 Eigen::MatrixXd coefficients, Eigen::VectorXd variances)
    : degree_(degree),
      scaling_(scaling),
      proportions_(std::move(proportions)),
      coefficients_(std::move(coefficients)),
      variances_(std::move(variances)) {
    if (degree_ < 0) throw Error(ErrorCode::InvalidStructure, "degree must be >= 0");
    if (!(scaling_.scale > 0.0)) {
        throw Error(ErrorCode::InvalidModel, "time scaling must have a positive scale");
    }
    check_proportions(proportions_);
    const auto k_count = proportions_.size();
    if (coefficients_.rows() != degree_ + 1 || coefficients_.cols() != k_count) {
        throw Error(ErrorCode::InvalidModel, "coefficients must be (p+1) x K");
    }
    if (!coefficients_.allFinite()) {
        throw Error(ErrorCode::InvalidModel, "regression coefficients must be finite");
    }
    if (variances_.size() != k_count) throw Error(ErrorCode::InvalidModel, "variance count != K");
    check_variances(variances_);
}

std::vector<double> RegMixtureModel::free_parameters() const {
    std::vector<double> out;
    for (int k = 0; k + 1 < clusters(); ++k) out.push_back(proportions_[k]);
    out.insert(out.end(), coefficients_.data(), coefficients_.data() + coefficients_.size());
    out.insert(out.end(), variances_.data(), variances_.data() + variances_.size());
    return out;
}

HprMixtureModel to_hpr_model(const RegMixtureModel& model) {
    ModelStructure s;
    s.clusters = model.clusters();
    s.segments = 1;
    s.degree = model.degree();
    std::vector<GatingParameters> gating(static_cast<std::size_t>(s.clusters),
                                         GatingParameters::zeros(1));
    std::vector<Eigen::MatrixXd> coefficients;
    for (int k = 0; k < s.clusters; ++k) coefficients.emplace_back(model.coefficients().col(k));
    return HprMixtureModel(s, model.scaling(), model.proportions(), std::move(gating),
                           std::move(coefficients), model.variances());
}

}  // namespace regclust
