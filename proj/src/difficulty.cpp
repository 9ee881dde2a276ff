#include "entangle/difficulty.hpp"

#include "entangle/stats.hpp"

#include <algorithm>
#include <cmath>

namespace entangle {

DifficultyProfile compute_difficulty(const MatrixXd& errors)
{
    if (errors.cols() < 1)
        throw EmptyInput("compute_difficulty: no models");
    DifficultyProfile p;
    p.difficulty = errors.rowwise().mean();
    p.easiness = VectorXd::Ones(errors.rows()) - p.difficulty;
    return p;
}

DifficultyProfile compute_difficulty(const ResponseDataset& ds)
{
    return compute_difficulty(ds.errors());
}

namespace {

double sigmoid(double z)
{
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + exp(z)) without overflow
double softplus(double z)
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double logit(double p)
{
    return std::log(p / (1.0 - p));
}

double penalized_loglik(const VectorXd& x, const VectorXd& y, double alpha, double beta, double ridge)
{
    double ll = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double eta = alpha + beta * x(i);
        // y*log(p) + (1-y)*log(1-p) = y*eta - log(1+exp(eta))
        ll += y(i) * eta - softplus(eta);
    }
    return ll - 0.5 * ridge * beta * beta;
}

} // namespace

double LogisticFit::predict(double d) const
{
    return std::clamp(sigmoid(alpha + beta * d), kProbabilityFloor, 1.0 - kProbabilityFloor);
}

LogisticFit fit_logistic(const VectorXd& x, const VectorXd& y, const FitConfig& cfg)
{
    if (x.size() != y.size())
        throw DimensionMismatch("fit_logistic: covariate and label lengths differ");
    if (x.size() < 2)
        throw EmptyInput("fit_logistic: need at least two observations");

    LogisticFit fit;
    const double positives = y.sum();
    const auto n = static_cast<double>(y.size());
    if (positives == 0.0 || positives == n) {
        fit.degenerate = true;
        fit.converged = true;
        fit.alpha = logit(positives == 0.0 ? kProbabilityFloor : 1.0 - kProbabilityFloor);
        return fit;
    }

    Eigen::Vector2d theta(logit(positives / n), 0.0);
    double ll = penalized_loglik(x, y, theta(0), theta(1), cfg.ridge);

    for (int iter = 0; iter <= cfg.max_iterations; ++iter) {
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
        for (Index i = 0; i < x.size(); ++i) {
            const double p = sigmoid(theta(0) + theta(1) * x(i));
            const double w = p * (1.0 - p);
            const double r = y(i) - p;
            grad(0) += r;
            grad(1) += r * x(i);
            hess(0, 0) += w;
            hess(0, 1) += w * x(i);
            hess(1, 1) += w * x(i) * x(i);
        }
        grad(1) -= cfg.ridge * theta(1);
        hess(1, 1) += cfg.ridge;
        hess(1, 0) = hess(0, 1);

        fit.iterations = iter;
        if (grad.norm() <= cfg.tolerance) {
            fit.converged = true;
            break;
        }
        if (iter == cfg.max_iterations)
            break;

        Eigen::Vector2d step = hess.ldlt().solve(grad);
        if (!step.allFinite())
            break;

        // Step halving keeps the penalised likelihood monotone near separation.
        double scale = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            Eigen::Vector2d cand = theta + scale * step;
            double cand_ll = penalized_loglik(x, y, cand(0), cand(1), cfg.ridge);
            if (cand_ll >= ll) {
                theta = cand;
                ll = cand_ll;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved)
            break;
    }

    fit.alpha = theta(0);
    fit.beta = theta(1);
    // Ranking by the linear predictor equals ranking by p(d) without the clamp's ties.
    const ArrayXd eta = fit.alpha + fit.beta * x.array();
    fit.auc = roc_auc(eta, y);
    return fit;
}

MatrixXd CalibrationModel::predict(const VectorXd& difficulty) const
{
    MatrixXd p(difficulty.size(), static_cast<Index>(fits.size()));
    for (std::size_t m = 0; m < fits.size(); ++m)
        for (Index t = 0; t < difficulty.size(); ++t)
            p(t, static_cast<Index>(m)) = fits[m].predict(difficulty(t));
    return p;
}

CalibrationModel fit_calibration(const ResponseDataset& ds, const DifficultyProfile& profile, const FitConfig& cfg)
{
    if (profile.difficulty.size() != ds.num_tasks())
        throw DimensionMismatch("fit_calibration: profile does not match dataset");
    if (ds.num_tasks() < 2)
        throw EmptyInput("fit_calibration: need T >= 2");
    const MatrixXd y = ds.errors();
    CalibrationModel cal;
    cal.models = ds.models();
    cal.fits.reserve(static_cast<std::size_t>(ds.num_models()));
    for (Index m = 0; m < ds.num_models(); ++m)
        cal.fits.push_back(fit_logistic(profile.difficulty, y.col(m), cfg));
    return cal;
}

MatrixXd compute_residuals(const MatrixXd& errors, const CalibrationModel& cal, const DifficultyProfile& profile)
{
    if (errors.rows() != profile.difficulty.size() || errors.cols() != static_cast<Index>(cal.fits.size()))
        throw DimensionMismatch("compute_residuals: errors, calibration and profile disagree in shape");
    return errors - cal.predict(profile.difficulty);
}

MatrixXd compute_residuals(const ResponseDataset& ds, const CalibrationModel& cal, const DifficultyProfile& profile)
{
    return compute_residuals(ds.errors(), cal, profile);
}

} // namespace entangle
