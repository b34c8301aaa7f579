#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ratesculpt::detail {

// Monotone piecewise-linear map between two sample timelines. Beyond the
// knots it continues with slope 1.
class TimeMap {
public:
    TimeMap(std::vector<double> from, std::vector<double> to);

    // Segment boundaries in `from`, per-segment slopes d(to)/d(from).
    static TimeMap from_slopes(std::span<const std::size_t> boundaries, std::span<const double> slopes);

    double forward(double from_pos) const;
    double inverse(double to_pos) const;
    double slope_at(double from_pos) const;
    double span_to() const { return to_.back() - to_.front(); }

private:
    std::vector<double> from_;
    std::vector<double> to_;
};

// Phase vocoder with identity phase locking. Output sample n draws from input
// position map.inverse(n).
std::vector<double> vocoder(std::span<const double> x, int sample_rate, const TimeMap& map,
                            std::size_t out_length);

// Band-limited read of src at fractional positions; step[i] is the local read rate
// used to set the anti-aliasing cutoff.
std::vector<double> sinc_read(std::span<const double> src, std::span<const double> positions,
                              std::span<const double> steps);

}  // namespace ratesculpt::detail
