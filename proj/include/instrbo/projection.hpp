#pragma once

#include "instrbo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace instrbo {

enum class ProjectionDistribution { Uniform, Normal };

std::string distribution_name(ProjectionDistribution d);
ProjectionDistribution distribution_from_name(const std::string& name);

/// Fixed random lift from the latent space R^d into the generator oracle's
/// prompt-embedding space R^{d'}. Entries are regenerated from the seed when
/// needed; they are never persisted.
struct ProjectionMatrix {
    Matrix entries;  // d x d_prime
    std::uint64_t seed = 0;
    ProjectionDistribution distribution = ProjectionDistribution::Uniform;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

/// Samples a d x d' matrix with i.i.d. entries, uniform on [-1, 1] by default
/// or standard normal. Deterministic given the seed.
/// Throws ConfigError if d < 1 or d_prime < d (the projection must lift).
ProjectionMatrix sample_projection(int d, int d_prime, std::uint64_t seed,
                                   ProjectionDistribution dist = ProjectionDistribution::Uniform);

/// Lifted vector A^T p of length d'. Throws ArgumentError on dimension mismatch.
Vector project(const ProjectionMatrix& A, const SoftPrompt& p);

/// Pairwise-distance preservation statistics for a fixed lift.
struct DistortionReport {
    double max_relative = 0.0;
    double mean_relative = 0.0;
    double scale = 0.0;  // least-squares factor applied to projected distances
    int pair_count = 0;
    int skipped_pairs = 0;  // zero-distance pairs
};

/// Diagnostic only: compares pairwise distances before and after projection,
/// after fitting the single best scale factor to the projected distances.
/// Throws ArgumentError with fewer than two points.
DistortionReport jl_distortion_report(const ProjectionMatrix& A,
                                      const std::vector<SoftPrompt>& points);

}  // namespace instrbo
