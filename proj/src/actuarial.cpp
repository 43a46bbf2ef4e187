#include "mftsc/actuarial.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mftsc {

double MortalitySurface::rate(int year, int age) const {
    if (!has(year, age))
        throw std::invalid_argument("mortality surface missing year " + std::to_string(year) +
                                    " age " + std::to_string(age));
    return rates(year - year0, age - age0);
}

Vector survival_probabilities(const MortalitySurface& surface, int age, int year, int n_max,
                              RateConversion conversion) {
    if (n_max < 1) throw std::invalid_argument("survival_probabilities: n_max >= 1");
    Vector p(n_max);
    double alive = 1.0;
    for (int s = 0; s < n_max; ++s) {
        const double m = surface.rate(year + s, age + s);
        if (m < 0.0) throw std::invalid_argument("survival_probabilities: negative rate");
        const double q = conversion == RateConversion::ConstantForce
                             ? 1.0 - std::exp(-m)
                             : m / (1.0 + 0.5 * m);
        alive *= 1.0 - std::min(q, 1.0);
        p(s) = alive;
    }
    return p;
}

AnnuityQuote annuity_price(const MortalitySurface& surface, int age, int year,
                           double interest, RateConversion conversion) {
    if (age < 0 || age >= 90)
        throw std::invalid_argument("annuity_price: age must satisfy 0 <= x < 90");
    if (!(interest > -1.0)) throw std::invalid_argument("annuity_price: interest <= -1");

    AnnuityQuote quote;
    quote.age = age;
    quote.year = year;
    quote.interest = interest;

    double pv = 0.0;
    if (age >= 65) {
        const int n_pay = 90 - age;
        const Vector p = survival_probabilities(surface, age, year, n_pay, conversion);
        for (int n = 1; n <= n_pay; ++n)
            pv += p(n - 1) / std::pow(1.0 + interest, n);
    } else {
        const int defer = 65 - age;
        const Vector p = survival_probabilities(surface, 65, year + defer, 25, conversion);
        for (int n = 1; n <= 25; ++n)
            pv += p(n - 1) / std::pow(1.0 + interest, n + defer);
    }
    quote.present_value = pv;
    return quote;
}

} // namespace mftsc
