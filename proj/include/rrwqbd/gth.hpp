#pragma once

// Grassmann-Taksar-Heyman elimination for stationary vectors. Only
// off-diagonal entries are read; the diagonal is implied by row sums, so the
// result is nonnegative and insensitive to rounding in the diagonal.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace rrwqbd {

/// Stationary row vector of an irreducible stochastic matrix, summing to 1.
/// Throws std::runtime_error when a pivot vanishes (reducible input).
Eigen::VectorXd gth_stationary(const Eigen::MatrixXd& P);

/// Square matrix stored by diagonals: entry (i, j) is kept for |i - j| <= w.
class BandMatrix {
public:
    BandMatrix(std::int64_t size, std::int64_t half_width);

    std::int64_t size() const { return n_; }
    std::int64_t half_width() const { return w_; }

    double get(std::int64_t i, std::int64_t j) const;
    void add(std::int64_t i, std::int64_t j, double v);

    /// Pointer to entry (i, j); valid for |i - j| <= w.
    double* at(std::int64_t i, std::int64_t j) { return &data_[i * stride_ + (j - i + w_)]; }
    const double* at(std::int64_t i, std::int64_t j) const {
        return &data_[i * stride_ + (j - i + w_)];
    }

    /// Bytes needed for a matrix of the given shape.
    static double bytes_for(std::int64_t size, std::int64_t half_width);

private:
    std::int64_t n_;
    std::int64_t w_;
    std::int64_t stride_;
    std::vector<double> data_;
};

/// GTH on a banded stochastic matrix. Elimination from the last state keeps
/// all fill inside the band. The matrix is consumed.
Eigen::VectorXd gth_stationary(BandMatrix&& P);

}  // namespace rrwqbd
