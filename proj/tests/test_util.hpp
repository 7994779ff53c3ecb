#pragma once

#include <cmath>

// Absolute-tolerance comparison for oracle checks.
inline bool near(double a, double b, double tol = 1e-9) {
    return std::fabs(a - b) <= tol;
}
