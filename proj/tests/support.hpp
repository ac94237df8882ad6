#pragma once

#include "csdflow/errors.hpp"
#include "csdflow/profile.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

namespace testing {

inline csdflow::ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const csdflow::Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return csdflow::ErrorKind::InvalidConfig;
}

inline double max_shift(const csdflow::ProfileSurface& a, const csdflow::ProfileSurface& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::hypot(a[i].r - b[i].r, a[i].z - b[i].z));
    return m;
}

} // namespace testing
