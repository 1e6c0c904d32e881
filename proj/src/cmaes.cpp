#include "instrbo/cmaes.hpp"

#include "instrbo/errors.hpp"
#include "instrbo/rng.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace instrbo {

int SearchConfig::resolved_population() const {
    if (population_size > 0) return population_size;
    return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

double SearchConfig::resolved_sigma0() const {
    return sigma0 > 0.0 ? sigma0 : (upper - lower) / 6.0;
}

void SearchConfig::validate() const {
    if (dimension < 1) throw ConfigError("search dimension must be >= 1");
    if (!(upper > lower)) throw ConfigError("search box is degenerate");
    if (resolved_population() < 4) throw ConfigError("population size must be >= 4");
    if (max_evaluations < resolved_population()) {
        throw ConfigError("max_evaluations must cover at least one generation");
    }
}

namespace {

struct Evaluation {
    SoftPrompt point;
    double value;
};

struct RunOutput {
    std::vector<Evaluation> history;
    SearchResult result;
};

RunOutput run_cmaes(const Objective& objective, const SearchConfig& cfg, Rng& rng) {
    cfg.validate();
    const int d = cfg.dimension;
    const int lambda = cfg.resolved_population();
    const int mu = lambda / 2;

    Vector weights(mu);
    for (int i = 0; i < mu; ++i) {
        weights(i) = std::log(mu + 0.5) - std::log(static_cast<double>(i + 1));
    }
    weights /= weights.sum();
    const double mu_eff = 1.0 / weights.squaredNorm();

    const double c_sigma = (mu_eff + 2.0) / (d + mu_eff + 5.0);
    const double d_sigma =
        1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (d + 1.0)) - 1.0) + c_sigma;
    const double c_c = (4.0 + mu_eff / d) / (d + 4.0 + 2.0 * mu_eff / d);
    const double c_1 = 2.0 / ((d + 1.3) * (d + 1.3) + mu_eff);
    const double c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                                ((d + 2.0) * (d + 2.0) + mu_eff));
    const double chi_n = std::sqrt(static_cast<double>(d)) *
                         (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));

    Vector mean(d);
    for (int i = 0; i < d; ++i) mean(i) = rng.uniform(cfg.lower, cfg.upper);
    double sigma = cfg.resolved_sigma0();
    Matrix cov = Matrix::Identity(d, d);
    Vector path_sigma = Vector::Zero(d);
    Vector path_c = Vector::Zero(d);

    RunOutput out;
    out.result.best_value = -std::numeric_limits<double>::infinity();
    int evals = 0;

    std::vector<SoftPrompt> xs(lambda), ys(lambda);
    std::vector<double> fitness(lambda);

    while (evals + lambda <= cfg.max_evaluations) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
        if (eig.info() != Eigen::Success) {
            throw SearchError("covariance eigendecomposition failed");
        }
        Vector eigvals = eig.eigenvalues().cwiseMax(1e-20);
        Vector sqrt_vals = eigvals.cwiseSqrt();
        const Matrix& basis = eig.eigenvectors();

        int finite_in_generation = 0;
        for (int k = 0; k < lambda; ++k) {
            Vector z(d);
            for (int i = 0; i < d; ++i) z(i) = rng.normal();
            SoftPrompt x = mean + sigma * (basis * (sqrt_vals.asDiagonal() * z));
            for (int i = 0; i < d; ++i) x(i) = std::clamp(x(i), cfg.lower, cfg.upper);
            double f = objective(x);
            if (std::isnan(f)) {
                ++out.result.nan_samples;
                f = -std::numeric_limits<double>::infinity();
            } else {
                ++finite_in_generation;
            }
            xs[k] = x;
            ys[k] = (x - mean) / sigma;  // repaired step, consistent with the clipped point
            fitness[k] = f;
            ++evals;
            out.history.push_back({x, f});
            if (f > out.result.best_value) {
                out.result.best_value = f;
                out.result.best_point = x;
            }
        }
        if (finite_in_generation == 0) {
            out.result.evaluations = evals;
            throw SearchError("objective returned NaN for an entire generation");
        }

        std::vector<int> order(lambda);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fitness[a] > fitness[b]; });

        Vector step = Vector::Zero(d);
        for (int i = 0; i < mu; ++i) step += weights(i) * ys[order[i]];
        Vector new_mean = mean + sigma * step;

        Vector inv_sqrt_step =
            basis * (sqrt_vals.cwiseInverse().asDiagonal() * (basis.transpose() * step));
        path_sigma = (1.0 - c_sigma) * path_sigma +
                     std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * inv_sqrt_step;

        double generations = static_cast<double>(evals) / lambda;
        bool h_sigma = path_sigma.norm() /
                           std::sqrt(1.0 - std::pow(1.0 - c_sigma, 2.0 * generations)) <
                       (1.4 + 2.0 / (d + 1.0)) * chi_n;
        path_c = (1.0 - c_c) * path_c;
        if (h_sigma) path_c += std::sqrt(c_c * (2.0 - c_c) * mu_eff) * step;

        Matrix rank_mu = Matrix::Zero(d, d);
        for (int i = 0; i < mu; ++i) {
            rank_mu += weights(i) * (ys[order[i]] * ys[order[i]].transpose());
        }
        double h_correction = h_sigma ? 0.0 : c_c * (2.0 - c_c);
        cov = (1.0 - c_1 - c_mu) * cov +
              c_1 * (path_c * path_c.transpose() + h_correction * cov) + c_mu * rank_mu;
        cov = 0.5 * (cov + cov.transpose());

        sigma *= std::exp((c_sigma / d_sigma) * (path_sigma.norm() / chi_n - 1.0));
        sigma = std::min(sigma, 1e6 * (cfg.upper - cfg.lower));
        mean = new_mean;
    }

    out.result.evaluations = evals;
    return out;
}

}  // namespace

SearchResult maximize(const Objective& objective, const SearchConfig& cfg) {
    Rng rng(cfg.seed);
    return run_cmaes(objective, cfg, rng).result;
}

std::vector<SoftPrompt> propose_candidates(const Objective& objective, const SearchConfig& cfg,
                                           int k) {
    if (k < 1) throw ArgumentError("propose_candidates needs k >= 1");
    Rng rng(cfg.seed);
    RunOutput run = run_cmaes(objective, cfg, rng);

    std::vector<std::size_t> order(run.history.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return run.history[a].value > run.history[b].value;
    });

    std::vector<SoftPrompt> out;
    out.reserve(k);
    for (std::size_t idx : order) {
        if (static_cast<int>(out.size()) == k) break;
        const SoftPrompt& candidate = run.history[idx].point;
        bool duplicate = false;
        for (const auto& kept : out) {
            if ((kept - candidate).norm() <= 1e-9) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) out.push_back(candidate);
    }
    while (static_cast<int>(out.size()) < k) {
        SoftPrompt x(cfg.dimension);
        for (int i = 0; i < cfg.dimension; ++i) x(i) = rng.uniform(cfg.lower, cfg.upper);
        out.push_back(x);
    }
    return out;
}

}  // namespace instrbo
