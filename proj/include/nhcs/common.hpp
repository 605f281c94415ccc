#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace nhcs {

using cdouble = std::complex<double>;
using RepMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cdouble iu{0.0, 1.0};

/// Half-integer spin label stored exactly as 2j. Fixes the representation
/// dimension 2j+1; never kept as a floating-point j.
class SpinLabel {
public:
    explicit SpinLabel(int two_j) : two_j_(two_j) {
        if (two_j < 0) throw std::invalid_argument("SpinLabel: 2j must be >= 0");
    }

    int two_j() const { return two_j_; }
    int dimension() const { return two_j_ + 1; }
    double j() const { return 0.5 * two_j_; }

    /// m-value of basis index n, descending: n=0 -> m=j, ..., n=2j -> m=-j.
    double m_of(int n) const { return 0.5 * (two_j_ - 2 * n); }

    bool operator==(const SpinLabel& o) const { return two_j_ == o.two_j_; }

private:
    int two_j_;
};

inline bool is_finite(const RepMatrix& m) {
    return m.allFinite();
}

inline void require_finite(const RepMatrix& m, const char* what) {
    if (!is_finite(m)) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

/// Pairing <u, w> = sum_n conj(u_n) w_n. The contragredient representation
/// compensates the non-unitarity so this pairing is group invariant.
inline cdouble pairing(const StateVector& u, const StateVector& w) {
    if (u.size() != w.size()) throw std::invalid_argument("pairing: dimension mismatch");
    return u.dot(w);  // Eigen dot conjugates the left argument
}

}  // namespace nhcs
