#include "kandy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kandy/errors.hpp"

namespace kandy {

double micro_accuracy(const ConfusionCounts& c) {
    if (c.tp < 0 || c.tn < 0 || c.fp < 0 || c.fn < 0) {
        throw MetricError("confusion counts must be non-negative");
    }
    if (c.tp + c.fn == 0 || c.tn + c.fp == 0) {
        throw MetricError("micro accuracy undefined: a class is absent");
    }
    double tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    double tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return 0.5 * tpr + 0.5 * tnr;
}

AccuracyMatrix AccuracyMatrix::from_csv(const std::string& text) {
    std::vector<std::vector<std::optional<double>>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.eof()) break;
        std::vector<std::optional<double>> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            size_t a = cell.find_first_not_of(" \t");
            size_t b = cell.find_last_not_of(" \t");
            std::string trimmed = a == std::string::npos ? "" : cell.substr(a, b - a + 1);
            if (trimmed.empty()) {
                row.push_back(std::nullopt);
            } else {
                try {
                    row.push_back(std::stod(trimmed));
                } catch (const std::exception&) {
                    throw ParseError("matrix row " + std::to_string(rows.size() + 1) +
                                     ": bad cell '" + trimmed + "'");
                }
            }
        }
        if (line.ends_with(",")) row.push_back(std::nullopt);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("empty accuracy matrix");
    size_t n = rows.size();
    AccuracyMatrix m(n);
    for (size_t j = 0; j < n; ++j) {
        if (rows[j].size() != n) {
            throw ParseError("matrix row " + std::to_string(j + 1) + " has " +
                             std::to_string(rows[j].size()) + " cells, expected " +
                             std::to_string(n));
        }
        for (size_t z = 0; z < n; ++z) {
            if (rows[j][z]) m.set(j, z, *rows[j][z]);
        }
    }
    return m;
}

double AccuracyMatrix::require(size_t task, size_t time) const {
    if (task >= n_ || time >= n_) {
        throw MetricError("matrix index (" + std::to_string(task) + ", " + std::to_string(time) +
                          ") out of range");
    }
    auto v = at(task, time);
    if (!v) {
        throw MetricError("matrix entry (" + std::to_string(task) + ", " + std::to_string(time) +
                          ") is undefined");
    }
    return *v;
}

double average_accuracy(const AccuracyMatrix& m, size_t z, bool strict) {
    if (z >= m.size()) throw MetricError("time index out of range");
    double sum = 0.0;
    for (size_t j = 0; j <= z; ++j) sum += m.require(j, z);
    if (strict) {
        if (z == 0) throw MetricError("strict average accuracy undefined at z = 0");
        return sum / static_cast<double>(z);
    }
    return sum / static_cast<double>(z + 1);
}

double average_forgetting(const AccuracyMatrix& m, size_t z, bool strict) {
    if (z >= m.size()) throw MetricError("time index out of range");
    if (z < 1) throw MetricError("forgetting undefined at z = 0");
    if (strict && z < 2) throw MetricError("strict forgetting undefined below z = 2");
    double sum = 0.0;
    for (size_t j = 0; j < z; ++j) {
        double best;
        if (strict) {
            best = m.require(j, 1);
            for (size_t k = 2; k <= z - 1; ++k) best = std::max(best, m.require(j, k));
        } else {
            best = m.require(j, j);
            for (size_t k = j + 1; k <= z - 1; ++k) best = std::max(best, m.require(j, k));
        }
        sum += best - m.require(j, z);
    }
    return sum / static_cast<double>(strict ? z - 1 : z);
}

double backward_transfer(const AccuracyMatrix& m, size_t z) {
    if (z >= m.size()) throw MetricError("time index out of range");
    if (z < 2) throw MetricError("backward transfer undefined below z = 2");
    double sum = 0.0;
    for (size_t j = 1; j <= z; ++j) {
        for (size_t h = 0; h < j; ++h) {
            sum += m.require(j, h) - m.require(j, j);
        }
    }
    double value = 2.0 / (static_cast<double>(z) * static_cast<double>(z - 1)) * sum;
    return std::max(value, 0.0);
}

double forward_transfer(const AccuracyMatrix& m, size_t z) {
    if (z >= m.size()) throw MetricError("time index out of range");
    if (z < 2) throw MetricError("forward transfer undefined below z = 2");
    double sum = 0.0;
    for (size_t j = 0; j < z; ++j) {
        for (size_t h = j + 1; h <= z; ++h) {
            sum += m.require(j, h) - kRandomGuessAccuracy;
        }
    }
    return 2.0 / (static_cast<double>(z) * static_cast<double>(z - 1)) * sum;
}

}  // namespace kandy
