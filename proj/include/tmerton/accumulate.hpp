#pragma once

#include <cmath>
#include <cstddef>

namespace tmerton {

// Neumaier compensated sum. merge() folds one batch into another, so batched
// reductions stay exact enough for 3-standard-error comparisons at 1e6+
// samples, and are independent of thread layout when merged in batch order.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    void merge(const Accumulator& o) {
        add(o.sum);
        add(o.comp);
    }

    double value() const { return sum + comp; }
};

// Streaming mean / standard error of one scalar statistic.
struct Moment {
    Accumulator sum, sumsq;
    std::size_t n = 0;

    void add(double x) {
        sum.add(x);
        sumsq.add(x * x);
        ++n;
    }

    void merge(const Moment& o) {
        sum.merge(o.sum);
        sumsq.merge(o.sumsq);
        n += o.n;
    }

    double mean() const { return n ? sum.value() / static_cast<double>(n) : 0.0; }

    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double v = (sumsq.value() - static_cast<double>(n) * m * m) /
                         static_cast<double>(n - 1);
        return v > 0.0 ? v : 0.0;
    }

    double std_error() const {
        return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

}  // namespace tmerton
