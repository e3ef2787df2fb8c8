// Order-invariant summation via Shewchuk partials (the math.fsum algorithm).
// The result is the correctly rounded value of the exact real sum, so any
// reduction over rows, columns, or cells returns the same double no matter
// how the data are ordered. This keeps fits exactly equivariant under
// relabeling of the grid.
#ifndef GVACL_EXACT_SUM_HPP
#define GVACL_EXACT_SUM_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace gvacl::detail {

class ExactSum {
public:
    void add(double x) {
        std::size_t out = 0;
        for (std::size_t k = 0; k < parts_.size(); ++k) {
            double y = parts_[k];
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            const double hi = x + y;
            const double lo = y - (hi - x);
            if (lo != 0.0) parts_[out++] = lo;
            x = hi;
        }
        parts_.resize(out);
        parts_.push_back(x);
    }

    // correctly rounded value of the exact running sum
    double value() const {
        std::size_t n = parts_.size();
        if (n == 0) return 0.0;
        double hi = parts_[--n];
        double lo = 0.0;
        while (n > 0) {
            const double x = hi;
            const double y = parts_[--n];
            hi = x + y;
            lo = y - (hi - x);
            if (lo != 0.0) break;
        }
        // half-way cases round away from hi when the next partial agrees
        // in sign with the residue
        if (n > 0 && ((lo < 0.0 && parts_[n - 1] < 0.0) ||
                      (lo > 0.0 && parts_[n - 1] > 0.0))) {
            const double y = lo * 2.0;
            const double x = hi + y;
            if (y == x - hi) hi = x;
        }
        return hi;
    }

private:
    std::vector<double> parts_;
};

inline double exact_dot(const std::vector<double>& a,
                        const std::vector<double>& b) {
    ExactSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
    return s.value();
}

}  // namespace gvacl::detail

#endif
