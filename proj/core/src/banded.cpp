#include "etdrd/banded.hpp"

#include <cmath>
#include <string>

#include "etdrd/errors.hpp"

namespace etdrd {

BandedLDLT::BandedLDLT(int n, int bw) : n_(n), bw_(bw) {
    if (n < 1 || bw < 0 || bw >= n)
        throw ConfigError("invalid banded matrix dimensions");
    a_.assign(static_cast<std::size_t>(n) * (bw + 1), {0.0, 0.0});
}

std::size_t banded_storage_bytes(int n, int bw) {
    return static_cast<std::size_t>(n) * (bw + 1) * sizeof(std::complex<double>);
}

// Banded LDL^T for a complex *symmetric* (not Hermitian) matrix: A = L D L^T
// with unit-lower-triangular L confined to the band.  Column sweep; entries
// below the band of the reduced matrix stay zero, so the factor fits the
// original storage.
void BandedLDLT::factor() {
    for (int j = 0; j < n_; ++j) {
        const std::complex<double> d = band(0, j);
        if (std::abs(d) < 1e-300)
            throw NumericsError("banded LDL^T pivot underflow at column " + std::to_string(j));
        const int reach = std::min(bw_, n_ - 1 - j);
        for (int r = 1; r <= reach; ++r) {
            // l = A(j+r, j) / d; update trailing column j+r in place
            const std::complex<double> l = band(r, j) / d;
            for (int r2 = r; r2 <= reach; ++r2)
                band(r2 - r, j + r) -= l * band(r2, j);
            band(r, j) = l;
        }
    }
    factored_ = true;
}

void BandedLDLT::solve(std::complex<double>* x) const {
    if (!factored_) throw NumericsError("banded solve before factorization");
    // forward: L y = b
    for (int j = 0; j < n_; ++j) {
        const std::complex<double> xj = x[j];
        if (xj == std::complex<double>(0.0, 0.0)) continue;
        const int reach = std::min(bw_, n_ - 1 - j);
        for (int r = 1; r <= reach; ++r) x[j + r] -= band(r, j) * xj;
    }
    // diagonal: D z = y
    for (int j = 0; j < n_; ++j) x[j] /= band(0, j);
    // backward: L^T x = z
    for (int j = n_ - 1; j >= 0; --j) {
        const int reach = std::min(bw_, n_ - 1 - j);
        std::complex<double> acc = x[j];
        for (int r = 1; r <= reach; ++r) acc -= band(r, j) * x[j + r];
        x[j] = acc;
    }
}

} // namespace etdrd
