#pragma once

#include <string>
#include <vector>

#include "wavecompact/data.hpp"
#include "wavecompact/errors.hpp"

namespace wavecompact::presets
{

//! 1 - |2x/X - 1|: continuous, kinks at 0, X/2, X; sine coefficients ~ k^{-2}.
inline Profile hat(double X, double peak = 1.0)
{
    return Profile::piecewise_polynomial(X, {0.0, 0.5 * X, X}, {{0.0, 2.0 * peak / X}, {peak, -2.0 * peak / X}});
}

//! H(x - at); sine coefficients ~ k^{-1}.
inline Profile step(double X, double at, NodeConvention convention = NodeConvention::mean)
{
    return Profile::piecewise_polynomial(X, {0.0, at, X}, {{0.0}, {1.0}}, convention);
}

/*!
 * x (2c - x) / c^2 on [0, c] and 1 - ((x - c)/(X - c))^2 on [c, X] with
 * c = X/3: C^1 with a jump of the second derivative; coefficients ~ k^{-3}.
 */
inline Profile kinked_quadratic(double X)
{
    const double c = X / 3.0;
    const double r = X - c;
    return Profile::piecewise_polynomial(X, {0.0, c, X}, {{0.0, 2.0 / c, -1.0 / (c * c)}, {1.0, 0.0, -1.0 / (r * r)}});
}

struct Preset
{
    std::string name;
    DataSpec data;
    double lambda;         //!< smoothness index of the data
    double expected_rate;  //!< 4 (lambda - 1) / 5
};

inline std::vector<std::string> preset_names() { return {"lambda_3_2", "lambda_5_2"}; }

//! Nonsmooth data families with f = 0.
inline Preset make_preset(const std::string& name, double X)
{
    if (name == "lambda_3_2")
    {
        return {name, DataSpec{hat(X), step(X, 0.5 * X), std::nullopt}, 1.5, 0.4};
    }
    if (name == "lambda_5_2")
    {
        return {name, DataSpec{kinked_quadratic(X), hat(X), std::nullopt}, 2.5, 1.2};
    }
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace wavecompact::presets
