#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Core>
#include <boost/multiprecision/eigen.hpp>

#include "qfz/arith.hpp"

namespace qfz {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
using RatMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

// Half-integral symmetric Y, stored as the integral matrix 2Y.
class QuadraticForm {
public:
    explicit QuadraticForm(IntMatrix gram2);

    const IntMatrix& gram2() const { return gram2_; }
    int dim() const { return static_cast<int>(gram2_.rows()); }

    // Y[v] = v^T (2Y) v / 2, always an integer
    long long value(const IntVector& v) const;

    QuadraticForm negated() const { return QuadraticForm(IntMatrix(-gram2_)); }

    // stable 64-bit content hash of (m, gram2)
    std::uint64_t hash() const;

    bool operator==(const QuadraticForm& o) const { return gram2_ == o.gram2_; }

private:
    IntMatrix gram2_;
};

// Fundamental discriminant of a quadratic field, or 1 for Q (principal character).
struct FieldDisc {
    long long disc = 1;
    bool principal() const { return disc == 1; }
};

struct FormProfile {
    int m = 0;
    long long D = 0;    // det(2Y)
    int p = 0;          // positive eigenvalues
    long long N = 0;    // level
    IntMatrix dual_gram2;
    FieldDisc K;
    FieldDisc K_N;

    QuadraticForm dual() const { return QuadraticForm(dual_gram2); }
};

QuadraticForm make_form(const IntMatrix& gram2);
FormProfile validate(const QuadraticForm& form);
FormProfile validate(const IntMatrix& gram2);

Rational evaluate(const QuadraticForm& form, const IntVector& v);
BigInt determinant(const IntMatrix& a);
std::pair<int, int> signature(const QuadraticForm& form);

// exact (2Y)^{-1}
RatMatrix inverse_gram2(const QuadraticForm& form);

// smallest N > 0 with N (2Y)^{-1} integral with even diagonal
long long level(const QuadraticForm& form);

// 2Yhat = N (2Y)^{-1}
QuadraticForm dual_form(const QuadraticForm& form);

// fundamental discriminant of Q(sqrt(d)), d != 0
FieldDisc field_of(long long d);

// (K, K_N)
std::pair<FieldDisc, FieldDisc> field_characters(const QuadraticForm& form);

std::string to_string(const FieldDisc& f);

} // namespace qfz
