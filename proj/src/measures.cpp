#include "phiot/measures.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace phiot {

namespace {

constexpr double kWeightSumTol = 1e-9;

double parse_double(const std::string& token) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw InvalidCost("unparseable numeric entry '" + token + "'");
    return value;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

DiscreteMeasure make_measure(Matrix points, Vector weights) {
    if (points.rows() != weights.size())
        throw InvalidMeasure("points/weights length mismatch");
    if (points.rows() == 0) throw InvalidMeasure("measure has no atoms");
    if (points.cols() == 0) throw InvalidMeasure("atoms have dimension zero");
    if (!points.allFinite()) throw InvalidMeasure("non-finite atom coordinate");
    if (!weights.allFinite()) throw InvalidMeasure("non-finite weight");
    if ((weights.array() < 0.0).any()) throw InvalidMeasure("negative weight");

    const double sum = weights.sum();
    if (std::abs(sum - 1.0) > kWeightSumTol)
        throw InvalidMeasure("weights sum to " + std::to_string(sum) + ", expected 1");

    const Index kept = (weights.array() > 0.0).count();
    if (kept == 0) throw InvalidMeasure("all weights are zero");

    DiscreteMeasure m;
    m.points.resize(kept, points.cols());
    m.weights.resize(kept);
    Index r = 0;
    for (Index i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            m.points.row(r) = points.row(i);
            m.weights[r] = weights[i];
            ++r;
        }
    }
    m.weights /= m.weights.sum();
    return m;
}

DiscreteMeasure dirac(const Vector& point) {
    Matrix pts(1, point.size());
    pts.row(0) = point.transpose();
    return make_measure(std::move(pts), Vector::Ones(1));
}

DiscreteMeasure uniform_measure(Matrix points) {
    const Index n = points.rows();
    if (n == 0) throw InvalidMeasure("measure has no atoms");
    return make_measure(std::move(points), Vector::Constant(n, 1.0 / double(n)));
}

DiscreteMeasure load_measure(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidMeasure(std::string("bad measure JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("points") || !doc.contains("weights"))
        throw InvalidMeasure("measure JSON needs 'points' and 'weights'");
    const auto& jp = doc["points"];
    const auto& jw = doc["weights"];
    if (!jp.is_array() || !jw.is_array())
        throw InvalidMeasure("'points' and 'weights' must be arrays");
    const Index n = Index(jp.size());
    if (n == 0) throw InvalidMeasure("measure has no atoms");
    if (!jp[0].is_array()) throw InvalidMeasure("each point must be an array");
    const Index d = Index(jp[0].size());
    Matrix points(n, d);
    for (Index i = 0; i < n; ++i) {
        if (!jp[i].is_array() || Index(jp[i].size()) != d)
            throw InvalidMeasure("ragged point dimensions");
        for (Index k = 0; k < d; ++k) {
            if (!jp[i][k].is_number()) throw InvalidMeasure("non-numeric coordinate");
            points(i, k) = jp[i][k].get<double>();
        }
    }
    if (Index(jw.size()) != n) throw InvalidMeasure("points/weights length mismatch");
    Vector weights(n);
    for (Index i = 0; i < n; ++i) {
        if (!jw[i].is_number()) throw InvalidMeasure("non-numeric weight");
        weights[i] = jw[i].get<double>();
    }
    return make_measure(std::move(points), std::move(weights));
}

DiscreteMeasure load_measure_file(const std::string& path) {
    return load_measure(read_file(path));
}

std::string measure_to_json(const DiscreteMeasure& m) {
    nlohmann::json doc;
    doc["points"] = nlohmann::json::array();
    for (Index i = 0; i < m.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index k = 0; k < m.dim(); ++k) row.push_back(m.points(i, k));
        doc["points"].push_back(std::move(row));
    }
    doc["weights"] = nlohmann::json::array();
    for (Index i = 0; i < m.size(); ++i) doc["weights"].push_back(m.weights[i]);
    return doc.dump();
}

CostMatrix make_cost(Matrix entries) {
    if (entries.size() == 0) throw InvalidCost("empty cost matrix");
    if (!entries.allFinite()) throw InvalidCost("non-finite cost entry");
    CostMatrix c;
    c.sup_norm = entries.cwiseAbs().maxCoeff();
    c.entries = std::move(entries);
    return c;
}

CostMatrix build_cost(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                      CostKind kind, double p) {
    if (m1.dim() != m2.dim())
        throw DimensionMismatch("cost between measures of dimension " +
                                std::to_string(m1.dim()) + " and " + std::to_string(m2.dim()));
    if (kind == CostKind::PNorm && p < 1.0)
        throw InvalidParameter("pnorm exponent must satisfy p >= 1");

    Matrix entries(m1.size(), m2.size());
    for (Index j = 0; j < m2.size(); ++j) {
        for (Index i = 0; i < m1.size(); ++i) {
            const auto diff = m1.points.row(i) - m2.points.row(j);
            switch (kind) {
                case CostKind::SqEuclidean: entries(i, j) = diff.squaredNorm(); break;
                case CostKind::Euclidean: entries(i, j) = diff.norm(); break;
                case CostKind::PNorm:
                    entries(i, j) = std::pow(diff.cwiseAbs().array().pow(p).sum(), 1.0 / p);
                    break;
            }
        }
    }
    return make_cost(std::move(entries));
}

CostMatrix load_cost_matrix(const std::string& csv_text, Index rows, Index cols) {
    if (rows <= 0 || cols <= 0) throw InvalidCost("non-positive cost shape");
    Matrix entries(rows, cols);
    std::istringstream in(csv_text);
    std::string line;
    Index r = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (r >= rows) throw InvalidCost("more rows than declared");
        std::istringstream ls(line);
        std::string token;
        Index c = 0;
        while (std::getline(ls, token, ',')) {
            if (c >= cols) throw InvalidCost("row " + std::to_string(r) + " has too many columns");
            entries(r, c++) = parse_double(token);
        }
        if (c != cols)
            throw InvalidCost("row " + std::to_string(r) + " has " + std::to_string(c) +
                              " columns, expected " + std::to_string(cols));
        ++r;
    }
    if (r != rows)
        throw InvalidCost("got " + std::to_string(r) + " rows, expected " + std::to_string(rows));
    return make_cost(std::move(entries));
}

CostMatrix load_cost_matrix_file(const std::string& path, Index rows, Index cols) {
    return load_cost_matrix(read_file(path), rows, cols);
}

}  // namespace phiot
