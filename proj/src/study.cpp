#include "regclust/study.hpp"

#include "regclust/hpr_mixture.hpp"
#include "regclust/metrics.hpp"
#include "regclust/random.hpp"
#include "regclust/reg_mixture.hpp"

namespace regclust {

Comparison compare_methods(const TimeSeriesDataset& data, const ModelStructure& proposed,
                           int baseline_degree, const EmOptions& options) {
    if (!data.true_labels()) throw Error(ErrorCode::MissingLabels, "comparison needs true labels");
    const std::vector<int>& truth = *data.true_labels();
    Comparison out;

    const HprFit hpr = hpr_fit_em(data, proposed, options);
    const std::vector<int> hpr_part = map_partition(hpr.report.posteriors_r);
    out.proposed.misclassification_pct =
        misclassification_pct(truth, hpr_part, proposed.clusters);
    out.proposed.inertia = intra_cluster_inertia(data, hpr_part, mean_series(hpr.model, data.grid()));
    out.proposed.log_likelihood = hpr.report.final_log_likelihood;
    out.proposed.converged = hpr.report.converged;

    const RegMixFit reg = regmix_fit_em(data, proposed.clusters, baseline_degree, options);
    const std::vector<int> reg_part = map_partition(reg.report.posteriors_r);
    out.baseline.misclassification_pct = misclassification_pct(truth, reg_part, proposed.clusters);
    out.baseline.inertia =
        intra_cluster_inertia(data, reg_part, regmix_mean_series(reg.model, data.grid()));
    out.baseline.log_likelihood = reg.report.final_log_likelihood;
    out.baseline.converged = reg.report.converged;
    return out;
}

std::uint64_t replicate_seed(std::uint64_t master, int replicate) {
    return derive_seed(master, static_cast<std::uint64_t>(replicate));
}

Comparison average(const std::vector<Comparison>& runs) {
    Comparison avg;
    if (runs.empty()) return avg;
    avg.proposed.converged = avg.baseline.converged = true;
    for (const auto& c : runs) {
        avg.proposed.misclassification_pct += c.proposed.misclassification_pct;
        avg.proposed.inertia += c.proposed.inertia;
        avg.proposed.log_likelihood += c.proposed.log_likelihood;
        avg.proposed.converged = avg.proposed.converged && c.proposed.converged;
        avg.baseline.misclassification_pct += c.baseline.misclassification_pct;
        avg.baseline.inertia += c.baseline.inertia;
        avg.baseline.log_likelihood += c.baseline.log_likelihood;
        avg.baseline.converged = avg.baseline.converged && c.baseline.converged;
    }
    const auto n = static_cast<double>(runs.size());
    for (MethodScore* s : {&avg.proposed, &avg.baseline}) {
        s->misclassification_pct /= n;
        s->inertia /= n;
        s->log_likelihood /= n;
    }
    return avg;
}

}  // namespace regclust
