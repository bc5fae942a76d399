#include "regclust/model_selection.hpp"

#include <cmath>
#include <optional>

#include "regclust/hpr_mixture.hpp"
#include "regclust/parallel.hpp"
#include "regclust/reg_mixture.hpp"

namespace regclust {

int free_parameter_count(const ModelStructure& s) {
    s.validate();
    const int k = s.clusters;
    const int l = s.segments;
    const int proportions = k - 1;
    const int gating = (s.gating_mode == GatingMode::Shared ? 2 : 2 * k) * (l - 1);
    const int coefficients = l * k * (s.degree + 1);
    int variances = l * k;
    if (s.variance_mode == VarianceMode::CommonPerCluster) variances = k;
    if (s.variance_mode == VarianceMode::CommonGlobal) variances = 1;
    return proportions + gating + coefficients + variances;
}

int regmix_free_parameter_count(int clusters, int degree) {
    return (clusters - 1) + clusters * (degree + 1) + clusters;
}

double bic(double log_likelihood, int free_parameters, std::size_t sample_size) {
    if (sample_size < 1) throw Error(ErrorCode::InvalidSpec, "BIC sample size must be >= 1");
    return log_likelihood - 0.5 * free_parameters * std::log(static_cast<double>(sample_size));
}

void SelectionGrid::validate() const {
    if (clusters.min < 1 || clusters.max < clusters.min || segments.min < 1 ||
        segments.max < segments.min || degrees.min < 0 || degrees.max < degrees.min) {
        throw Error(ErrorCode::InvalidSpec, "selection ranges must be nonempty with K, L >= 1, p >= 0");
    }
}

namespace {

std::size_t penalty_size(const TimeSeriesDataset& data, PenaltySize penalty) {
    return penalty == PenaltySize::Series ? data.series_count()
                                          : data.series_count() * data.length();
}

void pick_winner(SelectionReport& report) {
    std::optional<std::size_t> best;
    std::optional<std::size_t> best_any;
    for (std::size_t c = 0; c < report.cells.size(); ++c) {
        const auto& cell = report.cells[c];
        if (!cell.fitted) continue;
        if (!best_any || cell.bic > report.cells[*best_any].bic) best_any = c;
        if (cell.converged && (!best || cell.bic > report.cells[*best].bic)) best = c;
    }
    if (!best_any) throw Error(ErrorCode::NoFeasibleCell, "no grid cell could be fitted");
    if (!best) {
        report.warnings.push_back("no cell converged; winner chosen among non-converged cells");
        best = best_any;
    }
    report.winner = *best;
}

}  // namespace

SelectionReport select(const TimeSeriesDataset& data, const SelectionGrid& grid,
                       const EmOptions& options) {
    grid.validate();
    options.validate();
    SelectionReport report;
    for (int k = grid.clusters.min; k <= grid.clusters.max; ++k) {
        for (int l = grid.segments.min; l <= grid.segments.max; ++l) {
            for (int p = grid.degrees.min; p <= grid.degrees.max; ++p) {
                SelectionCell cell;
                cell.structure = {k, l, p, grid.variance_mode, grid.gating_mode};
                cell.parameters = free_parameter_count(cell.structure);
                if (static_cast<int>(data.length()) / l < p + 1) {
                    cell.feasible = false;
                    cell.note = "skipped: floor(m/L) < p+1";
                } else if (static_cast<int>(data.series_count()) < k) {
                    cell.feasible = false;
                    cell.note = "skipped: fewer series than clusters";
                }
                report.cells.push_back(cell);
            }
        }
    }

    EmOptions inner = options;
    inner.threads = 1;
    const std::size_t n_pen = penalty_size(data, grid.penalty);
    parallel_for(report.cells.size(), options.threads, [&](std::size_t c) {
        SelectionCell& cell = report.cells[c];
        if (!cell.feasible) return;
        try {
            const HprFit fit = hpr_fit_em(data, cell.structure, inner);
            cell.fitted = true;
            cell.log_likelihood = fit.report.final_log_likelihood;
            cell.converged = fit.report.converged;
            cell.bic = bic(cell.log_likelihood, cell.parameters, n_pen);
        } catch (const Error& e) {
            cell.note = e.what();
        }
    });
    pick_winner(report);
    return report;
}

SelectionReport select_regmix(const TimeSeriesDataset& data, const SelectionGrid& grid,
                              const EmOptions& options) {
    grid.validate();
    options.validate();
    SelectionReport report;
    report.baseline = true;
    for (int k = grid.clusters.min; k <= grid.clusters.max; ++k) {
        for (int p = grid.degrees.min; p <= grid.degrees.max; ++p) {
            SelectionCell cell;
            cell.structure = {k, 1, p, VarianceMode::Free, GatingMode::PerCluster};
            cell.parameters = regmix_free_parameter_count(k, p);
            if (p + 1 > static_cast<int>(data.length())) {
                cell.feasible = false;
                cell.note = "skipped: p+1 > m";
            } else if (static_cast<int>(data.series_count()) < k) {
                cell.feasible = false;
                cell.note = "skipped: fewer series than clusters";
            }
            report.cells.push_back(cell);
        }
    }

    EmOptions inner = options;
    inner.threads = 1;
    const std::size_t n_pen = penalty_size(data, grid.penalty);
    parallel_for(report.cells.size(), options.threads, [&](std::size_t c) {
        SelectionCell& cell = report.cells[c];
        if (!cell.feasible) return;
        try {
            const RegMixFit fit =
                regmix_fit_em(data, cell.structure.clusters, cell.structure.degree, inner);
            cell.fitted = true;
            cell.log_likelihood = fit.report.final_log_likelihood;
            cell.converged = fit.report.converged;
            cell.bic = bic(cell.log_likelihood, cell.parameters, n_pen);
        } catch (const Error& e) {
            cell.note = e.what();
        }
    });
    pick_winner(report);
    return report;
}

}  // namespace regclust
