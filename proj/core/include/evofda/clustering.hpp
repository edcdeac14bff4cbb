#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace evofda {

/// Which per-project vector the clustering runs on.
enum class FeatureKind { coefficients, fitted_values };

/// One row of clustering input per project, all rows the same length.
struct FeatureMatrix {
    std::vector<std::string> project_ids;
    std::vector<std::vector<double>> rows;
    FeatureKind feature_kind = FeatureKind::coefficients;
};

/// Result of one k-medoids run.  `medoids[c-1]` is the representative row of
/// cluster c, and `assignment[i]` is the 1-based cluster label of row i.
/// Labels are canonical: the cluster containing the smallest row index is 1,
/// the cluster containing the smallest index outside it is 2, and so on, so
/// permuting input rows permutes assignments correspondingly.
struct ClusterSolution {
    int k = 0;
    std::vector<int> medoids;
    std::vector<int> assignment;
    double total_dissimilarity = 0.0;  // sum of each row's distance to its medoid
    double avg_within = 0.0;           // mean distance over unordered same-cluster pairs
    double avg_between = 0.0;          // mean distance over unordered medoid pairs
    int iterations = 0;                // full update/reassign cycles until stable
    std::uint64_t seed = 0;
};

/// Pairwise Euclidean distances; d(i,i) = 0, symmetric.  Throws
/// std::invalid_argument on fewer than two rows or ragged row lengths.
Eigen::MatrixXd distance_matrix(const FeatureMatrix& features);

/// K-medoids on a precomputed distance matrix.  Alternates medoid update
/// (each cluster's new medoid is the member minimizing total distance to the
/// cluster's other members) with reassignment to the nearest medoid until an
/// entire cycle leaves the assignment unchanged, then repeatedly applies the
/// best strictly-improving swap of a medoid for a non-medoid row until no
/// swap lowers the objective.  All ties break toward the
/// lowest index, and a medoid always stays in its own cluster, so the run is
/// fully determined by (dist, k, seed).  Restart 0 starts from a greedy build
/// (first medoid minimizes total distance to all rows; each later medoid
/// maximizes the drop in total nearest-medoid distance); restarts 1..r-1
/// start from seeded random distinct rows, and the best objective wins with
/// ties going to the earliest restart.  Throws std::invalid_argument unless
/// 2 <= k <= n.
ClusterSolution kmedoids(const Eigen::MatrixXd& dist, int k, std::uint64_t seed,
                         int restarts = 10);

/// Distance summaries for a solution: mean over unordered same-cluster pairs
/// (0 when no such pair exists) and mean over unordered medoid pairs (absent
/// when the solution has a single medoid).
struct WithinBetween {
    double avg_within = 0.0;
    std::optional<double> avg_between;
};
WithinBetween within_between(const ClusterSolution& solution, const Eigen::MatrixXd& dist);

/// One solution per k in [k_min, k_max], each run with the same seeding
/// discipline.  Throws std::invalid_argument on an empty or out-of-range
/// sweep.
std::vector<ClusterSolution> sweep_k(const Eigen::MatrixXd& dist, int k_min, int k_max,
                                     std::uint64_t seed, int restarts = 10);

/// Adjusted Rand index between two labelings of the same rows (labels are
/// arbitrary ints).  1 for identical partitions; near 0 for independent ones.
/// When the correction term makes the denominator zero (e.g. both labelings
/// all-singletons or all-one-cluster), returns 1 if the partitions are equal
/// and 0 otherwise.  Throws std::invalid_argument on length mismatch or empty
/// input.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace evofda
