#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ionqec {

// In-place orthonormal fast Walsh-Hadamard transform: x -> H^{\otimes n} x,
// with H = [[1,1],[1,-1]]/sqrt(2). Length must be a power of two.
inline void fwht(std::span<double> x) {
    const size_t n = x.size();
    if (n == 0 || (n & (n - 1)))
        throw std::invalid_argument("fwht: length must be a power of two");
    for (size_t h = 1; h < n; h <<= 1) {
        for (size_t i = 0; i < n; i += h << 1) {
            for (size_t j = i; j < i + h; ++j) {
                const double u = x[j], v = x[j + h];
                x[j] = u + v;
                x[j + h] = u - v;
            }
        }
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& v : x) v *= norm;
}

// Conjugate a dense row-major dim x dim matrix by H^{\otimes n} on both sides.
// Since H is symmetric and real this is an involution.
inline void hadamard_conjugate(std::vector<double>& m, size_t dim) {
    if (m.size() != dim * dim)
        throw std::invalid_argument("hadamard_conjugate: non-square input");
    for (size_t r = 0; r < dim; ++r)
        fwht(std::span<double>(m.data() + r * dim, dim));
    std::vector<double> col(dim);
    for (size_t c = 0; c < dim; ++c) {
        for (size_t r = 0; r < dim; ++r) col[r] = m[r * dim + c];
        fwht(col);
        for (size_t r = 0; r < dim; ++r) m[r * dim + c] = col[r];
    }
}

}  // namespace ionqec
