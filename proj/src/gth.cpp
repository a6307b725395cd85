#include "rrwqbd/gth.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace rrwqbd {

Eigen::VectorXd gth_stationary(const Eigen::MatrixXd& P0) {
    const Eigen::Index n = P0.rows();
    if (n == 0 || P0.cols() != n) throw std::invalid_argument("GTH needs a nonempty square matrix");
    Eigen::MatrixXd P = P0;
    Eigen::VectorXd s(n);
    for (Eigen::Index p = n - 1; p >= 1; --p) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) sum += P(p, j);
        if (!(sum > 0.0))
            throw std::runtime_error("GTH pivot vanished at state " + std::to_string(p) +
                                     " (chain is reducible)");
        s[p] = sum;
        for (Eigen::Index i = 0; i < p; ++i) {
            const double f = P(i, p) / sum;
            if (f == 0.0) continue;
            for (Eigen::Index j = 0; j < p; ++j) P(i, j) += f * P(p, j);
        }
    }
    Eigen::VectorXd x(n);
    x[0] = 1.0;
    for (Eigen::Index p = 1; p < n; ++p) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) acc += x[i] * P(i, p);
        x[p] = acc / s[p];
    }
    return x / x.sum();
}

BandMatrix::BandMatrix(std::int64_t size, std::int64_t half_width)
    : n_(size), w_(half_width), stride_(2 * half_width + 1) {
    if (size <= 0 || half_width < 0) throw std::invalid_argument("bad band matrix shape");
    data_.assign(static_cast<std::size_t>(n_ * stride_), 0.0);
}

double BandMatrix::get(std::int64_t i, std::int64_t j) const {
    if (j - i > w_ || i - j > w_) return 0.0;
    return *at(i, j);
}

void BandMatrix::add(std::int64_t i, std::int64_t j, double v) {
    if (j - i > w_ || i - j > w_) throw std::out_of_range("entry outside band");
    *at(i, j) += v;
}

double BandMatrix::bytes_for(std::int64_t size, std::int64_t half_width) {
    return static_cast<double>(size) * static_cast<double>(2 * half_width + 1) * sizeof(double);
}

Eigen::VectorXd gth_stationary(BandMatrix&& P) {
    const std::int64_t n = P.size();
    const std::int64_t w = P.half_width();
    std::vector<double> s(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t p = n - 1; p >= 1; --p) {
        const std::int64_t lo = std::max<std::int64_t>(0, p - w);
        const double* row_p = P.at(p, lo);
        double sum = 0.0;
        for (std::int64_t j = lo; j < p; ++j) sum += row_p[j - lo];
        if (!(sum > 0.0))
            throw std::runtime_error("GTH pivot vanished at state " + std::to_string(p) +
                                     " (chain is reducible)");
        s[p] = sum;
        for (std::int64_t i = lo; i < p; ++i) {
            const double f = *P.at(i, p) / sum;
            if (f == 0.0) continue;
            double* row_i = P.at(i, lo);
            for (std::int64_t j = lo; j < p; ++j) row_i[j - lo] += f * row_p[j - lo];
        }
    }
    Eigen::VectorXd x(n);
    x[0] = 1.0;
    for (std::int64_t p = 1; p < n; ++p) {
        const std::int64_t lo = std::max<std::int64_t>(0, p - w);
        double acc = 0.0;
        for (std::int64_t i = lo; i < p; ++i) acc += x[i] * *P.at(i, p);
        x[p] = acc / s[p];
    }
    return x / x.sum();
}

}  // namespace rrwqbd
