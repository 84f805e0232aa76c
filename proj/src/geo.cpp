#include "pgr/geo.hpp"

#include <cmath>

#include "pgr/error.hpp"

namespace pgr {

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusM = 6371000.0;
    constexpr double kDeg2Rad = M_PI / 180.0;
    const double phi1 = lat1 * kDeg2Rad;
    const double phi2 = lat2 * kDeg2Rad;
    const double dphi = (lat2 - lat1) * kDeg2Rad;
    const double dlam = (lon2 - lon1) * kDeg2Rad;
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    a = std::min(1.0, std::max(0.0, a));
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(a));
}

std::vector<std::size_t> sample_sequence(const std::vector<LatLon>& points,
                                         double min_spacing_m) {
    if (!(min_spacing_m >= 0.0)) throw RangeError("min spacing must be >= 0");
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (kept.empty()) {
            kept.push_back(i);
            continue;
        }
        const LatLon& last = points[kept.back()];
        if (haversine_m(last.lat, last.lon, points[i].lat, points[i].lon) >= min_spacing_m)
            kept.push_back(i);
    }
    return kept;
}

}  // namespace pgr
