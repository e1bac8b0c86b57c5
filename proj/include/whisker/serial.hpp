#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "whisker/csv.hpp"

namespace whisker {

// Whitespace-separated text tokens; doubles use shortest exact round-trip form.

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string read_token(std::istream& in) {
    std::string t;
    if (!(in >> t)) throw ModelFormatError("unexpected end of model file");
    return t;
}

inline void expect_token(std::istream& in, const std::string& expected) {
    const auto t = read_token(in);
    if (t != expected) throw ModelFormatError("expected '" + expected + "', found '" + t + "'");
}

inline Eigen::Index read_index(std::istream& in) {
    try {
        return static_cast<Eigen::Index>(parse_int(read_token(in)));
    } catch (const std::invalid_argument& e) {
        throw ModelFormatError(e.what());
    }
}

inline double read_double(std::istream& in) {
    try {
        return parse_double(read_token(in));
    } catch (const std::invalid_argument& e) {
        throw ModelFormatError(e.what());
    }
}

template <typename Derived>
void write_values(std::ostream& out, const Eigen::DenseBase<Derived>& m) {
    const auto& d = m.derived();
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(d(i, j));
        }
        out << '\n';
    }
}

template <typename Derived>
void read_values(std::istream& in, Eigen::DenseBase<Derived>& m) {
    auto& d = m.derived();
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) d(i, j) = read_double(in);
}

} // namespace whisker
