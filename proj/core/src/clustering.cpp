#include "evofda/clustering.hpp"

#include "evofda/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

namespace evofda {

namespace {

// Assigns every row to the nearest medoid (ties to the lowest cluster
// index).  A medoid is pinned to its own cluster, which keeps every cluster
// non-empty even when duplicate rows put several medoids at distance zero.
std::vector<int> assign_rows(const Eigen::MatrixXd& dist, const std::vector<int>& medoids) {
    const int n = static_cast<int>(dist.rows());
    const int k = static_cast<int>(medoids.size());
    std::vector<int> assignment(n, -1);
    for (int c = 0; c < k; ++c) assignment[medoids[c]] = c;
    for (int i = 0; i < n; ++i) {
        if (assignment[i] >= 0) continue;
        int best = 0;
        double best_d = dist(i, medoids[0]);
        for (int c = 1; c < k; ++c) {
            const double d = dist(i, medoids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        assignment[i] = best;
    }
    return assignment;
}

// New medoid per cluster: the member minimizing total distance to the
// cluster's other members, ties to the lowest row index.
std::vector<int> update_medoids(const Eigen::MatrixXd& dist, const std::vector<int>& assignment,
                                int k) {
    const int n = static_cast<int>(dist.rows());
    std::vector<std::vector<int>> members(k);
    for (int i = 0; i < n; ++i) members[assignment[i]].push_back(i);
    std::vector<int> medoids(k, -1);
    for (int c = 0; c < k; ++c) {
        int best = members[c].front();
        double best_cost = std::numeric_limits<double>::infinity();
        for (int candidate : members[c]) {
            double cost = 0.0;
            for (int other : members[c]) cost += dist(candidate, other);
            if (cost < best_cost) {
                best_cost = cost;
                best = candidate;
            }
        }
        medoids[c] = best;
    }
    return medoids;
}

double objective_of(const Eigen::MatrixXd& dist, const std::vector<int>& medoids,
                    const std::vector<int>& assignment) {
    double total = 0.0;
    for (int i = 0; i < static_cast<int>(assignment.size()); ++i)
        total += dist(i, medoids[assignment[i]]);
    return total;
}

// Greedy build initialization: the first medoid minimizes total distance to
// all rows; each later medoid maximizes the drop in total nearest-medoid
// distance.  Ties to the lowest row index.
std::vector<int> build_init(const Eigen::MatrixXd& dist, int k) {
    const int n = static_cast<int>(dist.rows());
    std::vector<int> medoids;
    medoids.reserve(k);
    std::vector<char> chosen(n, 0);

    int first = 0;
    double first_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double cost = dist.row(i).sum();
        if (cost < first_cost) {
            first_cost = cost;
            first = i;
        }
    }
    medoids.push_back(first);
    chosen[first] = 1;

    std::vector<double> nearest(n);
    for (int j = 0; j < n; ++j) nearest[j] = dist(first, j);

    while (static_cast<int>(medoids.size()) < k) {
        int pick = -1;
        double pick_gain = -1.0;
        for (int i = 0; i < n; ++i) {
            if (chosen[i]) continue;
            double gain = 0.0;
            for (int j = 0; j < n; ++j) {
                const double saved = nearest[j] - dist(i, j);
                if (saved > 0.0) gain += saved;
            }
            if (gain > pick_gain) {
                pick_gain = gain;
                pick = i;
            }
        }
        medoids.push_back(pick);
        chosen[pick] = 1;
        for (int j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], dist(pick, j));
    }
    return medoids;
}

// Seeded draw of k distinct row indices (partial Fisher-Yates).
std::vector<int> random_init(int n, int k, std::uint64_t restart_seed) {
    std::mt19937_64 eng(restart_seed);
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int c = 0; c < k; ++c) {
        const int j = c + static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(n - c)));
        std::swap(pool[c], pool[j]);
    }
    pool.resize(k);
    return pool;
}

struct RunState {
    std::vector<int> medoids;
    std::vector<int> assignment;
    double objective = 0.0;
    int iterations = 0;
};

// Alternates medoid update and reassignment until a full cycle leaves the
// assignment unchanged (or fails to improve the objective, which only
// happens on exact ties).
void alternate(const Eigen::MatrixXd& dist, RunState& state, int k) {
    for (;;) {
        std::vector<int> next_medoids = update_medoids(dist, state.assignment, k);
        std::vector<int> next_assignment = assign_rows(dist, next_medoids);
        ++state.iterations;
        if (next_assignment == state.assignment) {
            state.medoids = std::move(next_medoids);
            state.objective = objective_of(dist, state.medoids, state.assignment);
            return;
        }
        const double next_objective = objective_of(dist, next_medoids, next_assignment);
        if (next_objective >= state.objective) return;
        state.medoids = std::move(next_medoids);
        state.assignment = std::move(next_assignment);
        state.objective = next_objective;
    }
}

// Applies the single best strictly-improving swap of one medoid for one
// non-medoid row, ties toward the lowest medoid slot then the lowest row.
// Returns false when no swap lowers the objective.
bool best_swap(const Eigen::MatrixXd& dist, RunState& state) {
    const int n = static_cast<int>(dist.rows());
    const int k = static_cast<int>(state.medoids.size());
    std::vector<char> is_medoid(std::size_t(n), 0);
    for (int m : state.medoids) is_medoid[std::size_t(m)] = 1;

    double best_objective = state.objective;
    int best_slot = -1, best_row = -1;
    std::vector<int> trial = state.medoids;
    for (int slot = 0; slot < k; ++slot) {
        const int original = trial[std::size_t(slot)];
        for (int row = 0; row < n; ++row) {
            if (is_medoid[std::size_t(row)]) continue;
            trial[std::size_t(slot)] = row;
            double objective = 0.0;
            for (int i = 0; i < n; ++i) {
                double nearest = dist(i, trial[0]);
                for (int c = 1; c < k; ++c) nearest = std::min(nearest, dist(i, trial[std::size_t(c)]));
                objective += nearest;
            }
            if (objective < best_objective) {
                best_objective = objective;
                best_slot = slot;
                best_row = row;
            }
        }
        trial[std::size_t(slot)] = original;
    }
    if (best_slot < 0) return false;
    state.medoids[std::size_t(best_slot)] = best_row;
    state.assignment = assign_rows(dist, state.medoids);
    state.objective = objective_of(dist, state.medoids, state.assignment);
    return true;
}

// One restart: alternation to a fixed point, then best-improvement swaps
// until no swap lowers the objective.  The swap phase escapes the local
// optima alternation alone settles into.  The phases must not interleave:
// two medoid sets can be exact mathematical ties whose objectives round
// differently under the summation orders the two phases use, and re-running
// alternation after a swap can then undo it forever.  Each applied swap
// strictly lowers the floating-point objective, so the loop terminates.
RunState run_from(const Eigen::MatrixXd& dist, std::vector<int> medoids) {
    const int k = static_cast<int>(medoids.size());
    RunState state;
    state.medoids = std::move(medoids);
    state.assignment = assign_rows(dist, state.medoids);
    state.objective = objective_of(dist, state.medoids, state.assignment);
    alternate(dist, state, k);
    while (best_swap(dist, state)) {
    }
    return state;
}

// Relabels clusters so that the cluster holding the smallest row index is 1,
// the cluster holding the smallest remaining index is 2, and so on.
void canonicalize(RunState& state, int k) {
    std::vector<int> new_label(k, 0);
    int next = 0;
    for (int label : state.assignment) {
        if (new_label[label] == 0) new_label[label] = ++next;
    }
    std::vector<int> medoids(k, -1);
    for (int c = 0; c < k; ++c) medoids[new_label[c] - 1] = state.medoids[c];
    state.medoids = std::move(medoids);
    for (int& label : state.assignment) label = new_label[label];
}

double binom2(double m) { return m * (m - 1.0) / 2.0; }

}  // namespace

Eigen::MatrixXd distance_matrix(const FeatureMatrix& features) {
    const int n = static_cast<int>(features.rows.size());
    if (n < 2) throw std::invalid_argument("distance_matrix: need at least two rows");
    const std::size_t width = features.rows.front().size();
    for (const std::vector<double>& row : features.rows)
        if (row.size() != width) throw std::invalid_argument("distance_matrix: ragged row lengths");

    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t f = 0; f < width; ++f) {
                const double diff = features.rows[i][f] - features.rows[j][f];
                sum += diff * diff;
            }
            dist(i, j) = dist(j, i) = std::sqrt(sum);
        }
    }
    return dist;
}

ClusterSolution kmedoids(const Eigen::MatrixXd& dist, int k, std::uint64_t seed, int restarts) {
    const int n = static_cast<int>(dist.rows());
    if (dist.rows() != dist.cols()) throw std::invalid_argument("kmedoids: distance matrix not square");
    if (k < 2 || k > n) throw std::invalid_argument("kmedoids: k must satisfy 2 <= k <= n");
    if (restarts < 1) throw std::invalid_argument("kmedoids: need at least one restart");

    RunState best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        std::vector<int> start =
            r == 0 ? build_init(dist, k) : random_init(n, k, mix_seed(seed, static_cast<std::uint64_t>(r)));
        RunState state = run_from(dist, std::move(start));
        if (!have_best || state.objective < best.objective) {
            best = std::move(state);
            have_best = true;
        }
    }
    canonicalize(best, k);

    ClusterSolution solution;
    solution.k = k;
    solution.medoids = std::move(best.medoids);
    solution.assignment = std::move(best.assignment);
    solution.total_dissimilarity = best.objective;
    solution.iterations = best.iterations;
    solution.seed = seed;
    const WithinBetween wb = within_between(solution, dist);
    solution.avg_within = wb.avg_within;
    solution.avg_between = wb.avg_between.value_or(0.0);
    return solution;
}

WithinBetween within_between(const ClusterSolution& solution, const Eigen::MatrixXd& dist) {
    const int n = static_cast<int>(solution.assignment.size());
    double within_sum = 0.0;
    long within_pairs = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (solution.assignment[i] != solution.assignment[j]) continue;
            within_sum += dist(i, j);
            ++within_pairs;
        }
    }
    WithinBetween wb;
    wb.avg_within = within_pairs > 0 ? within_sum / static_cast<double>(within_pairs) : 0.0;

    const int k = static_cast<int>(solution.medoids.size());
    if (k >= 2) {
        double between_sum = 0.0;
        long between_pairs = 0;
        for (int a = 0; a < k; ++a) {
            for (int b = a + 1; b < k; ++b) {
                between_sum += dist(solution.medoids[a], solution.medoids[b]);
                ++between_pairs;
            }
        }
        wb.avg_between = between_sum / static_cast<double>(between_pairs);
    }
    return wb;
}

std::vector<ClusterSolution> sweep_k(const Eigen::MatrixXd& dist, int k_min, int k_max,
                                     std::uint64_t seed, int restarts) {
    if (k_min < 2 || k_min > k_max) throw std::invalid_argument("sweep_k: bad k range");
    if (k_max > dist.rows()) throw std::invalid_argument("sweep_k: k exceeds row count");
    std::vector<ClusterSolution> solutions;
    solutions.reserve(k_max - k_min + 1);
    for (int k = k_min; k <= k_max; ++k) solutions.push_back(kmedoids(dist, k, seed, restarts));
    return solutions;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
    if (a.empty()) throw std::invalid_argument("adjusted_rand_index: empty labelings");

    std::map<std::pair<int, int>, long> cells;
    std::map<int, long> row_sums;
    std::map<int, long> col_sums;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cells[{a[i], b[i]}];
        ++row_sums[a[i]];
        ++col_sums[b[i]];
    }

    double index = 0.0;
    for (const auto& cell : cells) index += binom2(static_cast<double>(cell.second));
    double sum_a = 0.0;
    for (const auto& row : row_sums) sum_a += binom2(static_cast<double>(row.second));
    double sum_b = 0.0;
    for (const auto& col : col_sums) sum_b += binom2(static_cast<double>(col.second));

    const double total_pairs = binom2(static_cast<double>(a.size()));
    const double expected = total_pairs > 0.0 ? sum_a * sum_b / total_pairs : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denominator = max_index - expected;
    if (denominator == 0.0) {
        // Both labelings trivial in the same way; equal partitions score 1.
        std::map<int, int> remap_a;
        std::map<int, int> remap_b;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const int ca = remap_a.emplace(a[i], static_cast<int>(remap_a.size())).first->second;
            const int cb = remap_b.emplace(b[i], static_cast<int>(remap_b.size())).first->second;
            if (ca != cb) return 0.0;
        }
        return 1.0;
    }
    return (index - expected) / denominator;
}

}  // namespace evofda
