#ifndef ENTANGLE_DIFFICULTY_HPP
#define ENTANGLE_DIFFICULTY_HPP

#include "entangle/common.hpp"
#include "entangle/ingest.hpp"

#include <optional>
#include <string>
#include <vector>

namespace entangle {

/// Per-task population failure rate d_t and easiness a_t = 1 - d_t.
struct DifficultyProfile {
    VectorXd difficulty;
    VectorXd easiness;
};

DifficultyProfile compute_difficulty(const ResponseDataset& ds);

/// Same computation from a T x M error-indicator matrix.
DifficultyProfile compute_difficulty(const MatrixXd& errors);

struct FitConfig {
    double ridge = 1e-6;       // L2 penalty on the slope
    int max_iterations = 100;
    double tolerance = 1e-8;   // on the gradient 2-norm
};

inline constexpr double kProbabilityFloor = 1e-6;

/// Logistic failure curve p(d) = sigmoid(alpha + beta * d) with diagnostics.
struct LogisticFit {
    double alpha = 0.0;
    double beta = 0.0;
    std::optional<double> auc; // absent when labels are all one class
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;   // all-0 or all-1 labels; constant clamped fit

    /// Predicted failure probability, clamped to [1e-6, 1 - 1e-6].
    double predict(double d) const;
};

/// Ridge-penalised IRLS fit of binary `y` on the single covariate `x`.
LogisticFit fit_logistic(const VectorXd& x, const VectorXd& y, const FitConfig& cfg = {});

struct CalibrationModel {
    std::vector<std::string> models;
    std::vector<LogisticFit> fits;

    /// T x M matrix of p_m(d_t).
    MatrixXd predict(const VectorXd& difficulty) const;
};

CalibrationModel fit_calibration(const ResponseDataset& ds, const DifficultyProfile& profile,
                                 const FitConfig& cfg = {});

/// R = Y - p_m(d_t), T x M.
MatrixXd compute_residuals(const MatrixXd& errors, const CalibrationModel& cal, const DifficultyProfile& profile);
MatrixXd compute_residuals(const ResponseDataset& ds, const CalibrationModel& cal, const DifficultyProfile& profile);

} // namespace entangle

#endif // ENTANGLE_DIFFICULTY_HPP
