#include "instrbo/projection.hpp"

#include "instrbo/errors.hpp"
#include "instrbo/rng.hpp"

#include <cmath>

namespace instrbo {

std::string distribution_name(ProjectionDistribution d) {
    return d == ProjectionDistribution::Uniform ? "uniform" : "normal";
}

ProjectionDistribution distribution_from_name(const std::string& name) {
    if (name == "uniform") return ProjectionDistribution::Uniform;
    if (name == "normal") return ProjectionDistribution::Normal;
    throw ConfigError("unknown projection distribution: " + name);
}

ProjectionMatrix sample_projection(int d, int d_prime, std::uint64_t seed,
                                   ProjectionDistribution dist) {
    if (d < 1) throw ConfigError("projection requires d >= 1, got " + std::to_string(d));
    if (d_prime < d) {
        throw ConfigError("projection must lift, not shrink: d'=" + std::to_string(d_prime) +
                          " < d=" + std::to_string(d));
    }
    ProjectionMatrix A;
    A.seed = seed;
    A.distribution = dist;
    A.entries.resize(d, d_prime);
    Rng rng(seed);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d_prime; ++j) {
            A.entries(i, j) = dist == ProjectionDistribution::Uniform
                                  ? rng.uniform(-1.0, 1.0)
                                  : rng.normal();
        }
    }
    return A;
}

Vector project(const ProjectionMatrix& A, const SoftPrompt& p) {
    if (p.size() != A.rows()) {
        throw ArgumentError("prompt dimension " + std::to_string(p.size()) +
                            " does not match projection rows " + std::to_string(A.rows()));
    }
    if (!p.allFinite()) throw ArgumentError("prompt contains non-finite coordinates");
    return A.entries.transpose() * p;
}

DistortionReport jl_distortion_report(const ProjectionMatrix& A,
                                      const std::vector<SoftPrompt>& points) {
    if (points.size() < 2) throw ArgumentError("distortion report needs at least 2 points");

    std::vector<double> original;
    std::vector<double> lifted;
    DistortionReport report;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double dist = (points[i] - points[j]).norm();
            if (dist == 0.0) {
                ++report.skipped_pairs;
                continue;
            }
            original.push_back(dist);
            lifted.push_back((project(A, points[i]) - project(A, points[j])).norm());
        }
    }
    report.pair_count = static_cast<int>(original.size());
    if (original.empty()) return report;

    // Least-squares scale c minimizing sum (c*lifted - original)^2; it lands
    // near the 1/sqrt(d') normalization a uniform lift implies.
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < original.size(); ++k) {
        num += lifted[k] * original[k];
        den += lifted[k] * lifted[k];
    }
    report.scale = den > 0.0 ? num / den : 0.0;

    double sum = 0.0;
    for (std::size_t k = 0; k < original.size(); ++k) {
        double rel = std::abs(report.scale * lifted[k] - original[k]) / original[k];
        report.max_relative = std::max(report.max_relative, rel);
        sum += rel;
    }
    report.mean_relative = sum / static_cast<double>(original.size());
    return report;
}

}  // namespace instrbo
