#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace etdrd {

// Complex symmetric banded matrix in lower packed storage:
// band(r, j) with r = 0..bw holds entry (j+r, j).  factor() computes an
// in-place LDL^T without pivoting -- valid here because the matrices are
// diagonal shifts tau*A - s*I with Im(s) != 0, so principal minors never
// vanish; a tiny-pivot check still guards the assumption.
class BandedLDLT {
public:
    BandedLDLT() = default;
    BandedLDLT(int n, int bw);

    int n() const { return n_; }
    int bandwidth() const { return bw_; }

    std::complex<double>& band(int r, int j) { return a_[idx(r, j)]; }
    std::complex<double> band(int r, int j) const { return a_[idx(r, j)]; }

    std::size_t storage_elems() const { return a_.size(); }

    void factor();                                // throws NumericsError on tiny pivot
    void solve(std::complex<double>* x) const;    // in-place, length n
    bool factored() const { return factored_; }

private:
    std::size_t idx(int r, int j) const {
        return static_cast<std::size_t>(j) * (bw_ + 1) + r;
    }
    int n_ = 0;
    int bw_ = 0;
    bool factored_ = false;
    std::vector<std::complex<double>> a_;
};

// Bytes of factor storage for a given order/bandwidth (memory-guard math).
std::size_t banded_storage_bytes(int n, int bw);

} // namespace etdrd
