#include "frogsim/rng.hpp"

#include "frogsim/errors.hpp"

namespace frogsim {

int poisson_quantile(double mean, double u) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw ValidationError("poisson mean must be finite and >= 0");
    if (mean > 500.0) throw ValidationError("poisson mean above 500 is not supported by inversion");
    if (mean == 0.0) return 0;
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (cdf < u) {
        ++k;
        p *= mean / k;
        cdf += p;
        // past the mode the pmf underflows before cdf reaches u only through rounding
        if (p == 0.0 && k > mean) break;
    }
    return k;
}

}  // namespace frogsim
