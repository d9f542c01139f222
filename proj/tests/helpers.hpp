#pragma once

// Small builders for synthetic streams used across the unit tests.

#include "kvlu/model.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace testutil {

inline kvlu::WristStream wrist(kvlu::Side side, double rate, std::size_t n,
                               const std::function<double(double)>& pressure,
                               const std::function<double(double)>& pitch)
{
    kvlu::WristStream w{side, {}};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        w.samples.push_back({t, pressure(t), pitch(t), side});
    }
    return w;
}

// Insole whose heel / midfoot / forefoot region sums follow the given
// functions, spread evenly over each region's cells.
inline kvlu::InsoleStream insole(kvlu::Side side, double rate, std::size_t n,
                                 const std::function<double(double)>& heel,
                                 const std::function<double(double)>& mid,
                                 const std::function<double(double)>& fore)
{
    kvlu::InsoleStream s{side, kvlu::default_region_map(), {}};
    const auto& m = s.regions;
    const double nh = static_cast<double>(m.count(kvlu::Region::Heel));
    const double nm = static_cast<double>(m.count(kvlu::Region::Midfoot));
    const double nf = static_cast<double>(m.count(kvlu::Region::Forefoot));
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / rate;
        kvlu::InsoleSample x;
        x.t = t;
        x.side = side;
        for (std::size_t c = 0; c < kvlu::kInsoleCells; ++c) {
            switch (m.at(c)) {
            case kvlu::Region::Heel: x.cells[c] = heel(t) / nh; break;
            case kvlu::Region::Midfoot: x.cells[c] = mid(t) / nm; break;
            default: x.cells[c] = fore(t) / nf; break;
            }
        }
        s.samples.push_back(x);
    }
    return s;
}

inline std::function<double(double)> constant(double v)
{
    return [v](double) { return v; };
}

}  // namespace testutil
