#include "qfz/quadform.hpp"

#include <cstdlib>
#include <vector>

#include "qfz/errors.hpp"

namespace qfz {

namespace {

using RatRows = std::vector<std::vector<Rational>>;

RatRows to_rational(const IntMatrix& a)
{
    RatRows r(a.rows(), std::vector<Rational>(a.cols()));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) r[i][j] = Rational(a(i, j));
    return r;
}

} // namespace

QuadraticForm::QuadraticForm(IntMatrix gram2) : gram2_(std::move(gram2))
{
    if (gram2_.rows() != gram2_.cols() || gram2_.rows() < 1)
        throw Error(Errc::DimensionMismatch, "gram matrix must be square and non-empty");
    const auto m = gram2_.rows();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (gram2_(i, i) % 2 != 0)
            throw Error(Errc::OddDiagonal, "diagonal entry " + std::to_string(i) + " of 2Y is odd");
        for (Eigen::Index j = i + 1; j < m; ++j)
            if (gram2_(i, j) != gram2_(j, i))
                throw Error(Errc::NotSymmetric,
                            "entries (" + std::to_string(i) + "," + std::to_string(j) + ") differ");
    }
    if (determinant(gram2_) == 0) throw Error(Errc::Singular, "det(2Y) = 0");
}

long long QuadraticForm::value(const IntVector& v) const
{
    if (v.size() != gram2_.rows()) throw Error(Errc::DimensionMismatch, "vector length differs from m");
    __int128 s = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        s += static_cast<__int128>(gram2_(i, i) / 2) * v(i) * v(i);
        for (Eigen::Index j = i + 1; j < v.size(); ++j)
            s += static_cast<__int128>(gram2_(i, j)) * v(i) * v(j);
    }
    return static_cast<long long>(s);
}

std::uint64_t QuadraticForm::hash() const
{
    std::vector<long long> data;
    data.push_back(gram2_.rows());
    for (Eigen::Index i = 0; i < gram2_.rows(); ++i)
        for (Eigen::Index j = 0; j < gram2_.cols(); ++j) data.push_back(gram2_(i, j));
    return fnv1a(data.data(), data.size() * sizeof(long long));
}

QuadraticForm make_form(const IntMatrix& gram2) { return QuadraticForm(gram2); }

Rational evaluate(const QuadraticForm& form, const IntVector& v) { return Rational(form.value(v)); }

// Bareiss fraction-free elimination
BigInt determinant(const IntMatrix& a)
{
    const auto n = a.rows();
    std::vector<std::vector<BigInt>> b(n, std::vector<BigInt>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b[i][j] = a(i, j);
    BigInt prev = 1;
    int sign = 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (b[k][k] == 0) {
            Eigen::Index piv = k + 1;
            while (piv < n && b[piv][k] == 0) ++piv;
            if (piv == n) return 0;
            std::swap(b[k], b[piv]);
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i)
            for (Eigen::Index j = k + 1; j < n; ++j)
                b[i][j] = (b[i][j] * b[k][k] - b[i][k] * b[k][j]) / prev;
        prev = b[k][k];
    }
    return sign * b[n - 1][n - 1];
}

// LDL^T over Q with symmetric pivoting; a zero diagonal with a non-zero
// off-diagonal entry is repaired by e_i <- e_i + e_j.
std::pair<int, int> signature(const QuadraticForm& form)
{
    RatRows a = to_rational(form.gram2());
    const std::size_t m = a.size();
    int pos = 0, neg = 0;
    std::vector<char> done(m, 0);
    for (std::size_t step = 0; step < m; ++step) {
        std::size_t piv = m;
        for (std::size_t i = 0; i < m; ++i)
            if (!done[i] && a[i][i] != 0) {
                piv = i;
                break;
            }
        if (piv == m) {
            std::size_t pi = m, pj = m;
            for (std::size_t i = 0; i < m && pi == m; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    if (!done[i] && !done[j] && i != j && a[i][j] != 0) {
                        pi = i;
                        pj = j;
                        break;
                    }
            if (pi == m) throw Error(Errc::Singular, "degenerate form");
            for (std::size_t k = 0; k < m; ++k) a[pi][k] += a[pj][k];
            for (std::size_t k = 0; k < m; ++k) a[k][pi] += a[k][pj];
            piv = pi;
        }
        const Rational d = a[piv][piv];
        (d > 0 ? pos : neg)++;
        done[piv] = 1;
        for (std::size_t i = 0; i < m; ++i) {
            if (done[i] || a[i][piv] == 0) continue;
            const Rational f = a[i][piv] / d;
            for (std::size_t j = 0; j < m; ++j) a[i][j] -= f * a[piv][j];
        }
        for (std::size_t i = 0; i < m; ++i)
            if (!done[i]) a[piv][i] = a[i][piv] = 0;
    }
    return {pos, neg};
}

RatMatrix inverse_gram2(const QuadraticForm& form)
{
    const int m = form.dim();
    RatRows a = to_rational(form.gram2());
    RatRows inv(m, std::vector<Rational>(m, Rational(0)));
    for (int i = 0; i < m; ++i) inv[i][i] = 1;
    for (int c = 0; c < m; ++c) {
        int piv = c;
        while (piv < m && a[piv][c] == 0) ++piv;
        if (piv == m) throw Error(Errc::Singular, "det(2Y) = 0");
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        const Rational d = a[c][c];
        for (int j = 0; j < m; ++j) {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for (int i = 0; i < m; ++i) {
            if (i == c || a[i][c] == 0) continue;
            const Rational f = a[i][c];
            for (int j = 0; j < m; ++j) {
                a[i][j] -= f * a[c][j];
                inv[i][j] -= f * inv[c][j];
            }
        }
    }
    RatMatrix out(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out(i, j) = inv[i][j];
    return out;
}

namespace {

bool is_even_matrix_multiple(const RatMatrix& inv, long long n)
{
    for (Eigen::Index i = 0; i < inv.rows(); ++i)
        for (Eigen::Index j = 0; j < inv.cols(); ++j) {
            const Rational x = inv(i, j) * n;
            if (denominator(x) != 1) return false;
            if (i == j && numerator(x) % 2 != 0) return false;
        }
    return true;
}

} // namespace

long long level(const QuadraticForm& form)
{
    const RatMatrix inv = inverse_gram2(form);
    const BigInt D = abs(determinant(form.gram2()));
    const long long bound = static_cast<long long>(2 * D);
    for (long long n : divisors(bound))
        if (is_even_matrix_multiple(inv, n)) return n;
    // not expected: adj(2Y) is integral, so 2|D| always qualifies
    for (long long n = 1;; ++n)
        if (is_even_matrix_multiple(inv, n)) return n;
}

QuadraticForm dual_form(const QuadraticForm& form)
{
    const long long n = level(form);
    const RatMatrix inv = inverse_gram2(form);
    IntMatrix g(inv.rows(), inv.cols());
    for (Eigen::Index i = 0; i < inv.rows(); ++i)
        for (Eigen::Index j = 0; j < inv.cols(); ++j)
            g(i, j) = static_cast<long long>(numerator(Rational(inv(i, j) * n)));
    return QuadraticForm(g);
}

FieldDisc field_of(long long d)
{
    if (d == 0) throw Error(Errc::DomainError, "Q(sqrt(0))");
    long long kernel = d < 0 ? -1 : 1;
    for (auto [p, e] : factorize(d))
        if (e % 2) kernel *= p;
    if (kernel == 1) return FieldDisc{1};
    return FieldDisc{mod(kernel, 4) == 1 ? kernel : 4 * kernel};
}

std::pair<FieldDisc, FieldDisc> field_characters(const QuadraticForm& form)
{
    const int m = form.dim();
    const long long D = static_cast<long long>(determinant(form.gram2()));
    if (m % 2 == 0) {
        const long long d = (m / 2) % 2 ? -D : D;
        return {field_of(d), field_of(d)};
    }
    const long long N = level(form);
    return {field_of(2 * std::llabs(D)), field_of(2 * std::llabs(D) * N)};
}

FormProfile validate(const QuadraticForm& form)
{
    FormProfile pr;
    pr.m = form.dim();
    pr.D = static_cast<long long>(determinant(form.gram2()));
    pr.p = signature(form).first;
    pr.N = level(form);
    pr.dual_gram2 = dual_form(form).gram2();
    std::tie(pr.K, pr.K_N) = field_characters(form);
    return pr;
}

FormProfile validate(const IntMatrix& gram2) { return validate(QuadraticForm(gram2)); }

std::string to_string(const FieldDisc& f)
{
    return f.principal() ? std::string("Q") : "disc " + std::to_string(f.disc);
}

} // namespace qfz
