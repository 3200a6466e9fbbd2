#pragma once

#include <vector>

namespace diffsplines {

/// Positions and momenta of point masses on (0,1).
struct LandmarkState {
    std::vector<double> q;
    std::vector<double> p;

    /// Throws DomainError unless positions are finite, inside (0,1), strictly increasing,
    /// and the momenta match in count and are finite.
    void validate() const;
    std::size_t size() const { return q.size(); }
};

}  // namespace diffsplines
