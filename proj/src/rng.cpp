#include "dml/rng.hpp"

#include "dml/stats.hpp"

namespace dml {

double Rng::next_gaussian() {
    double u = next_double();
    while (u <= 0.0) u = next_double();
    return normal_quantile(u);
}

} // namespace dml
