#pragma once

#include "mftsc/grid.hpp"

namespace mftsc {

/// Central mortality rates m on a (year, age) lattice of forecasts.
struct MortalitySurface {
    int year0 = 0;
    int age0 = 0;
    Matrix rates; // n_years x n_ages

    bool has(int year, int age) const {
        return year >= year0 && year < year0 + rates.rows() && age >= age0 &&
               age < age0 + rates.cols();
    }
    double rate(int year, int age) const;
};

/// Central-rate to death-probability conversion.
enum class RateConversion {
    ConstantForce, // q = 1 - exp(-m)
    MidYear        // q = m / (1 + 0.5 m)
};

/// np_{x,t} for n = 1..n_max along the cohort diagonal (t+s, x+s);
/// values in [0,1], nonincreasing in n.
Vector survival_probabilities(const MortalitySurface& surface, int age, int year,
                              int n_max, RateConversion conversion = RateConversion::ConstantForce);

struct AnnuityQuote {
    int age = 0;
    int year = 0;
    double interest = 0.0;
    double present_value = 0.0;
};

/// Present value of a $1-per-year life annuity paying from retirement (65)
/// to the pre-agreed final age 90: the immediate branch for x >= 65 and the
/// deferred branch (payments discounted from age 65) for x < 65.
AnnuityQuote annuity_price(const MortalitySurface& surface, int age, int year,
                           double interest,
                           RateConversion conversion = RateConversion::ConstantForce);

} // namespace mftsc
