#pragma once

#include <cstddef>
#include <vector>

namespace pgr {

// Great-circle distance in meters on a sphere of radius 6,371,000 m.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

// Greedy spatial subsampling: walk the sequence in order and keep a point
// when it is at least min_spacing_m away from the last kept point. The
// first point is always kept. Returns indices into the input.
struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};
std::vector<std::size_t> sample_sequence(const std::vector<LatLon>& points,
                                         double min_spacing_m = 2.0);

}  // namespace pgr
