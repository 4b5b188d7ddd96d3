#pragma once

#include <string>

#include "phiot/errors.hpp"
#include "phiot/types.hpp"

namespace phiot {

// Finitely supported probability measure. One atom per row of `points`,
// weights strictly positive and summing to one.
struct DiscreteMeasure {
    Matrix points;
    Vector weights;

    Index size() const { return points.rows(); }
    Index dim() const { return points.cols(); }
};

// Validates and normalizes: zero-weight atoms are dropped, a weight sum
// within 1e-9 of one is renormalized to exactly one. Negative weights,
// mismatched lengths or a sum off by more than 1e-9 raise InvalidMeasure.
DiscreteMeasure make_measure(Matrix points, Vector weights);

DiscreteMeasure dirac(const Vector& point);
DiscreteMeasure uniform_measure(Matrix points);

// Measure JSON schema: {"points": [[f64,...],...], "weights": [f64,...]}.
DiscreteMeasure load_measure(const std::string& json_text);
DiscreteMeasure load_measure_file(const std::string& path);
std::string measure_to_json(const DiscreteMeasure& m);

enum class CostKind { SqEuclidean, Euclidean, PNorm };

// Dense cost on a support product, with the max absolute entry cached.
struct CostMatrix {
    Matrix entries;
    double sup_norm = 0.0;

    Index rows() const { return entries.rows(); }
    Index cols() const { return entries.cols(); }
};

CostMatrix make_cost(Matrix entries);
CostMatrix build_cost(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                      CostKind kind, double p = 2.0);

// Row-major CSV, comma separated, no header, one row per source atom.
CostMatrix load_cost_matrix(const std::string& csv_text, Index rows, Index cols);
CostMatrix load_cost_matrix_file(const std::string& path, Index rows, Index cols);

}  // namespace phiot
