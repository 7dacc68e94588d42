#include "fdlab/util.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace fdlab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 matching samples");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        f.rss += r * r;
    }
    if (x.size() > 2) f.slope_stderr = std::sqrt(f.rss / (n - 2.0) / sxx);
    return f;
}

Extrapolation richardson_extrapolate(std::span<const double> eps,
                                     std::span<const double> values) {
    if (eps.size() != values.size() || eps.size() < 3)
        throw std::invalid_argument("richardson_extrapolate: need >= 3 samples");
    const size_t k = eps.size();
    const double ratio = eps[1] / eps[0];  // schedule assumed geometric

    // Local order from the last difference triple that is usable.
    double order = 1.0;
    bool have_order = false;
    for (size_t i = k; i-- >= 3;) {
        const double d1 = values[i - 1] - values[i - 2];
        const double d2 = values[i] - values[i - 1];
        if (d1 != 0.0 && d2 != 0.0 && d1 * d2 > 0.0) {
            const double q = d2 / d1;
            if (q > 0.0 && q < 1.0) {
                order = std::log(q) / std::log(ratio);
                have_order = true;
                break;
            }
        }
        if (i == 3) break;
    }

    Extrapolation ex;
    const double w = std::pow(ratio, have_order ? order : 1.0);
    for (size_t i = 1; i < k; ++i)
        ex.extrapolants.push_back((values[i] - w * values[i - 1]) / (1.0 - w));

    // Monotonicity of the raw tail.
    for (size_t i = 2; i < k; ++i) {
        const double d1 = values[i - 1] - values[i - 2];
        const double d2 = values[i] - values[i - 1];
        if (d1 * d2 < 0.0) ex.monotone = false;
    }

    ex.fitted_order = order;
    ex.limit = ex.extrapolants.back();
    const size_t ne = ex.extrapolants.size();
    ex.uncertainty = std::abs(ex.extrapolants[ne - 1] - ex.extrapolants[ne - 2]);
    if (!ex.monotone)
        ex.uncertainty = std::max(ex.uncertainty,
                                  std::abs(values.back() - ex.limit));
    return ex;
}

void parallel_for(int begin, int end, int workers,
                  const std::function<void(int)>& body) {
    if (end <= begin) return;
    const int count = end - begin;
    if (workers <= 1 || count == 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    workers = std::min(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = begin + w; i < end; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw std::runtime_error("bisect: no sign change on bracket");
    for (int it = 0; it < max_iter && (hi - lo) > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace fdlab
