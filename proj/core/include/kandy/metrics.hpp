#ifndef KANDY_METRICS_HPP
#define KANDY_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "kandy/errors.hpp"

namespace kandy {

inline constexpr double kRandomGuessAccuracy = 0.5;

struct ConfusionCounts {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Class-balanced binary accuracy: 1/2 TPR + 1/2 TNR. Both classes must be
/// present (tp+fn > 0 and tn+fp > 0), otherwise MetricError.
double micro_accuracy(const ConfusionCounts& c);

/// Grid of per-task accuracies: entry (j, z) is the accuracy on task j
/// measured with the model state after streaming task z. Entries may be
/// absent (never measured).
class AccuracyMatrix {
public:
    explicit AccuracyMatrix(size_t n_tasks) : n_(n_tasks), cells_(n_tasks * n_tasks) {}

    /// Parses an N x N CSV grid: row j = task, column z = time, blank cell =
    /// undefined entry.
    static AccuracyMatrix from_csv(const std::string& text);

    size_t size() const { return n_; }
    void set(size_t task, size_t time, double value) { cells_[task * n_ + time] = value; }
    std::optional<double> at(size_t task, size_t time) const { return cells_[task * n_ + time]; }
    /// Value of a required entry; MetricError when absent or out of range.
    double require(size_t task, size_t time) const;

private:
    size_t n_;
    std::vector<std::optional<double>> cells_;
};

// Continual-learning metrics over the accuracy grid at stream time z.
//
// The printed formulas in the source material carry normalizers that are
// off-by-one against their own summation bounds (1/z over z+1 terms, and a
// forgetting best-so-far index set {1..z-1} that ignores the task index).
// Default mode normalizes by the number of summed terms and takes the
// per-task best over times at/after the task was trained; strict mode
// reproduces the printed formulas verbatim.

double average_accuracy(const AccuracyMatrix& m, size_t z, bool strict = false);
double average_forgetting(const AccuracyMatrix& m, size_t z, bool strict = false);

/// Literal printed formula, clamped at zero. Requires z >= 2 (the
/// normalizer 2/(z(z-1)) is undefined below that).
double backward_transfer(const AccuracyMatrix& m, size_t z);
/// Literal printed formula with the random-guess reference 0.5. z >= 2.
double forward_transfer(const AccuracyMatrix& m, size_t z);

}  // namespace kandy

#endif
